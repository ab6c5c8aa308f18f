#include "ehrqa/model/decode.hpp"

#include <algorithm>
#include <cmath>

#include "ehrqa/common/error.hpp"

namespace ehrqa {

namespace {

Eigen::RowVectorXd log_softmax(const Eigen::RowVectorXd& z) {
  const double mx = z.maxCoeff();
  const double lse = mx + std::log((z.array() - mx).exp().sum());
  return z.array() - lse;
}

struct Candidate {
  std::size_t parent;
  TokenId token;
  double log_prob;
  std::vector<TokenId> path;
};

}  // namespace

double Hypothesis::normalized() const {
  const std::size_t count = tokens.size() + (finished ? 1 : 0);
  return count == 0 ? 0.0 : log_prob / static_cast<double>(count);
}

bool emittable(TokenId id) { return id != kPad && id != kMask; }

bool ranks_above(const Hypothesis& a, const Hypothesis& b) {
  const double sa = a.normalized(), sb = b.normalized();
  if (sa != sb) return sa > sb;
  if (a.tokens != b.tokens) return a.tokens < b.tokens;
  return a.finished && !b.finished;
}

IncrementalDecoder::IncrementalDecoder(const Model& model, std::span<const TokenId> q_ids)
    : model_(&model) {
  const int n = static_cast<int>(q_ids.size());
  if (n + 2 > model.config().max_len) {
    throw TooLong("question of " + std::to_string(n) + " tokens leaves no room to decode");
  }
  std::vector<TokenId> ids(q_ids.begin(), q_ids.end());
  ids.push_back(kSep);
  const std::vector<int> segments(ids.size(), 0);
  const std::vector<int> limits(ids.size(), n + 1);
  forward_rows(model, ids, segments, limits, cache_, true);
}

Eigen::RowVectorXd IncrementalDecoder::next_log_probs() {
  const TokenId id = kMask;
  const int seg = 1;
  const int limit = cache_.rows + 1;
  const MatR h = forward_rows(*model_, {&id, 1}, {&seg, 1}, {&limit, 1}, cache_, false);
  return log_softmax(output_logits(*model_, h).row(0));
}

void IncrementalDecoder::push(TokenId id) {
  const int seg = 1;
  const int limit = cache_.rows + 1;
  forward_rows(*model_, {&id, 1}, {&seg, 1}, {&limit, 1}, cache_, true);
  ++generated_;
}

int IncrementalDecoder::room() const { return model_->config().max_len - cache_.rows; }

Hypothesis decode_greedy_scored(const Model& model, std::span<const TokenId> q_ids,
                                int max_out) {
  IncrementalDecoder dec(model, q_ids);
  Hypothesis h;
  while (static_cast<int>(h.tokens.size()) < max_out && dec.room() > 0) {
    const Eigen::RowVectorXd lp = dec.next_log_probs();
    TokenId best = -1;
    for (TokenId t = 0; t < lp.size(); ++t) {
      if (emittable(t) && (best < 0 || lp(t) > lp(best))) best = t;
    }
    h.log_prob += lp(best);
    if (best == kSep) {
      h.finished = true;
      break;
    }
    h.tokens.push_back(best);
    if (static_cast<int>(h.tokens.size()) < max_out && dec.room() > 1) dec.push(best);
    else break;
  }
  return h;
}

std::vector<TokenId> decode_greedy(const Model& model, std::span<const TokenId> q_ids,
                                   int max_out) {
  return decode_greedy_scored(model, q_ids, max_out).tokens;
}

Hypothesis decode_beam_scored(const Model& model, std::span<const TokenId> q_ids,
                              int beam, int max_out) {
  if (beam < 1) throw InvalidArgument("beam must be at least 1");
  const std::size_t width = static_cast<std::size_t>(beam);
  struct Live {
    Hypothesis hyp;
    IncrementalDecoder dec;
  };
  std::vector<Live> live;
  live.push_back({Hypothesis{}, IncrementalDecoder(model, q_ids)});
  std::vector<Hypothesis> done;

  for (int step = 0; step < max_out && !live.empty(); ++step) {
    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < live.size(); ++i) {
      if (live[i].dec.room() <= 0) continue;
      const Eigen::RowVectorXd lp = live[i].dec.next_log_probs();
      std::vector<TokenId> ids;
      for (TokenId t = 0; t < lp.size(); ++t) {
        if (emittable(t)) ids.push_back(t);
      }
      const std::size_t k = std::min(width, ids.size());
      std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k), ids.end(),
                        [&](TokenId a, TokenId b) {
                          return lp(a) != lp(b) ? lp(a) > lp(b) : a < b;
                        });
      for (std::size_t j = 0; j < k; ++j) {
        Candidate c{i, ids[j], live[i].hyp.log_prob + lp(ids[j]), live[i].hyp.tokens};
        c.path.push_back(ids[j]);
        cands.push_back(std::move(c));
      }
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      return a.log_prob != b.log_prob ? a.log_prob > b.log_prob : a.path < b.path;
    });
    if (cands.size() > width) cands.resize(width);

    std::vector<Live> next;
    for (auto& c : cands) {
      Hypothesis h;
      h.log_prob = c.log_prob;
      h.tokens = live[c.parent].hyp.tokens;
      if (c.token == kSep) {
        h.finished = true;
        done.push_back(std::move(h));
        continue;
      }
      h.tokens.push_back(c.token);
      IncrementalDecoder dec = live[c.parent].dec;
      const bool extendable = step + 1 < max_out && dec.room() > 1;
      if (extendable) {
        dec.push(c.token);
        next.push_back({std::move(h), std::move(dec)});
      } else {
        done.push_back(std::move(h));
      }
    }
    live = std::move(next);
    if (done.size() >= width) break;
  }
  for (auto& l : live) done.push_back(std::move(l.hyp));
  done.push_back(decode_greedy_scored(model, q_ids, max_out));
  return *std::min_element(done.begin(), done.end(), [](const Hypothesis& a, const Hypothesis& b) {
    return ranks_above(a, b);
  });
}

std::vector<TokenId> decode_beam(const Model& model, std::span<const TokenId> q_ids,
                                 int beam, int max_out) {
  return decode_beam_scored(model, q_ids, beam, max_out).tokens;
}

Hypothesis score_output(const Model& model, std::span<const TokenId> q_ids,
                        std::span<const TokenId> y_ids, bool finished) {
  Hypothesis h;
  h.tokens.assign(y_ids.begin(), y_ids.end());
  h.finished = finished;
  const std::size_t steps = y_ids.size() + (finished ? 1 : 0);
  const int n = static_cast<int>(q_ids.size());
  for (std::size_t t = 0; t < steps; ++t) {
    Example ex;
    ex.seq = build_input(q_ids, y_ids.first(t), model.config().max_len);
    ex.seq.ids.back() = kMask;
    ex.n = n;
    ex.m = static_cast<int>(t);
    ex.labels.assign(ex.seq.ids.size(), kNoLabel);
    const MatR logits = forward(model, ex);
    const Eigen::RowVectorXd lp = log_softmax(logits.row(logits.rows() - 1));
    h.log_prob += lp(t < y_ids.size() ? y_ids[t] : kSep);
  }
  return h;
}

}  // namespace ehrqa
