#include "ehrqa/model/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ehrqa/common/error.hpp"

namespace ehrqa {

namespace {

void check_lengths(const std::vector<PairIds>& pairs, int max_len) {
  for (const auto& p : pairs) {
    if (p.q.size() + p.y.size() + 2 > static_cast<std::size_t>(max_len)) {
      throw TooLong("pair '" + p.id + "' needs " + std::to_string(p.q.size() + p.y.size() + 2) +
                    " positions, max_len is " + std::to_string(max_len));
    }
  }
}

}  // namespace

double scheduled_lr(const TrainConfig& tcfg, long step, long total_steps) {
  const long warmup = static_cast<long>(std::floor(tcfg.warmup_frac * static_cast<double>(total_steps)));
  if (step < warmup) return tcfg.lr * static_cast<double>(step + 1) / static_cast<double>(warmup);
  const long span = total_steps - warmup;
  if (span <= 0) return 0.0;
  return tcfg.lr * static_cast<double>(total_steps - step) / static_cast<double>(span);
}

std::vector<Example> validation_examples(const std::vector<PairIds>& pairs,
                                         const TrainConfig& tcfg, int vocab_size, int max_len) {
  TrainConfig vcfg = tcfg;
  vcfg.input_mask_prob = 0.0;
  Rng rng(mix_seed(tcfg.seed, 0x7a11d));
  std::vector<Example> out;
  for (const auto& p : pairs) {
    Example ex = make_example(p.q, p.y, vcfg, vocab_size, max_len, rng);
    if (ex.label_count() > 0) out.push_back(std::move(ex));
  }
  return out;
}

TrainResult train_model(const std::vector<PairIds>& train, const std::vector<PairIds>& valid,
                        const ModelConfig& mcfg, const TrainConfig& tcfg,
                        const EpochCallback& on_epoch) {
  mcfg.validate();
  tcfg.validate();
  if (train.empty()) throw EmptyTrainSet("training split is empty");
  check_lengths(train, mcfg.max_len);
  check_lengths(valid, mcfg.max_len);

  const auto& valid_pairs = valid.empty() ? train : valid;
  const std::vector<Example> valid_ex =
      validation_examples(valid_pairs, tcfg, mcfg.vocab_size, mcfg.max_len);

  Model model = Model::init(mcfg, tcfg.seed);
  TrainResult result{model, 0, std::numeric_limits<double>::infinity(), {}, {}, false};

  const std::size_t n = train.size();
  const std::size_t bs = static_cast<std::size_t>(tcfg.batch);
  const long steps_per_epoch = static_cast<long>((n + bs - 1) / bs);
  const long total_steps = steps_per_epoch * tcfg.epochs;

  Rng rng(mix_seed(tcfg.seed, 0x7));
  auto& w = model.params();
  ParamVector m1(w.size(), 0.0), m2(w.size(), 0.0), grad;
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  long step = 0;
  int stale = 0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 1; epoch <= tcfg.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double epoch_loss = 0.0;
    int epoch_batches = 0;
    double lr = 0.0;
    for (std::size_t start = 0; start < n; start += bs) {
      std::vector<Example> batch;
      int labels = 0;
      for (std::size_t k = start; k < std::min(n, start + bs); ++k) {
        const auto& p = train[order[k]];
        batch.push_back(make_example(p.q, p.y, tcfg, mcfg.vocab_size, mcfg.max_len, rng));
        labels += batch.back().label_count();
      }
      lr = scheduled_lr(tcfg, step, total_steps);
      ++step;
      if (labels == 0) continue;
      const double loss = loss_and_gradient(model, batch, &rng, grad);
      result.step_losses.push_back(loss);
      epoch_loss += loss;
      ++epoch_batches;

      if (tcfg.clip_norm > 0.0) {
        double sq = 0.0;
        for (double g : grad) sq += g * g;
        const double norm = std::sqrt(sq);
        if (norm > tcfg.clip_norm) {
          const double s = tcfg.clip_norm / norm;
          for (double& g : grad) g *= s;
        }
      }
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      for (std::size_t i = 0; i < w.size(); ++i) {
        m1[i] = kBeta1 * m1[i] + (1.0 - kBeta1) * grad[i];
        m2[i] = kBeta2 * m2[i] + (1.0 - kBeta2) * grad[i] * grad[i];
        w[i] -= lr * (m1[i] / c1) / (std::sqrt(m2[i] / c2) + kEps);
      }
    }

    EpochReport rep;
    rep.epoch = epoch;
    rep.train_loss = epoch_batches > 0 ? epoch_loss / epoch_batches : 0.0;
    rep.valid_loss = valid_ex.empty() ? rep.train_loss : batch_loss(model, valid_ex);
    rep.lr = lr;
    rep.improved = rep.valid_loss < result.best_valid_loss;
    if (rep.improved) {
      result.best_valid_loss = rep.valid_loss;
      result.best_epoch = epoch;
      result.model = model;
      stale = 0;
    } else {
      ++stale;
    }
    result.epochs.push_back(rep);
    if (on_epoch && on_epoch(rep, model)) break;
    if (stale >= tcfg.patience) {
      result.early_stopped = true;
      break;
    }
  }
  return result;
}

}  // namespace ehrqa
