#include "ehrqa/model/transformer.hpp"

#include <cmath>
#include <limits>

#include "ehrqa/common/error.hpp"

namespace ehrqa {

namespace {

constexpr double kLnEps = 1e-5;

using Index = Eigen::Index;
using CMap = Eigen::Map<const MatR>;
using Map = Eigen::Map<MatR>;
using CRow = Eigen::Map<const Eigen::RowVectorXd>;
using Row = Eigen::Map<Eigen::RowVectorXd>;

CMap cmat(const ParamVector& p, std::size_t off, Index r, Index c) {
  return CMap(p.data() + off, r, c);
}
Map mat(ParamVector& p, std::size_t off, Index r, Index c) {
  return Map(p.data() + off, r, c);
}
CRow crow(const ParamVector& p, std::size_t off, Index n) {
  return CRow(p.data() + off, n);
}
Row row(ParamVector& p, std::size_t off, Index n) {
  return Row(p.data() + off, n);
}

MatR linear(const MatR& x, const CMap& w, const CRow& b) {
  MatR y = x * w;
  y.rowwise() += b;
  return y;
}

void layer_norm(const MatR& x, const CRow& g, const CRow& b, MatR& y, MatR& xhat,
                Eigen::VectorXd& rstd) {
  const Index t = x.rows(), d = x.cols();
  y.resize(t, d);
  xhat.resize(t, d);
  rstd.resize(t);
  for (Index i = 0; i < t; ++i) {
    const double mu = x.row(i).sum() / static_cast<double>(d);
    double var = 0.0;
    for (Index j = 0; j < d; ++j) {
      const double c = x(i, j) - mu;
      var += c * c;
    }
    var /= static_cast<double>(d);
    const double r = 1.0 / std::sqrt(var + kLnEps);
    rstd(i) = r;
    for (Index j = 0; j < d; ++j) {
      xhat(i, j) = (x(i, j) - mu) * r;
      y(i, j) = xhat(i, j) * g(j) + b(j);
    }
  }
}

MatR layer_norm_backward(const MatR& dy, const MatR& xhat, const Eigen::VectorXd& rstd,
                         const CRow& g, Row dg, Row db) {
  const Index t = dy.rows(), d = dy.cols();
  MatR dx(t, d);
  Eigen::RowVectorXd dxhat(d);
  for (Index i = 0; i < t; ++i) {
    double m1 = 0.0, m2 = 0.0;
    for (Index j = 0; j < d; ++j) {
      dxhat(j) = dy(i, j) * g(j);
      dg(j) += dy(i, j) * xhat(i, j);
      db(j) += dy(i, j);
      m1 += dxhat(j);
      m2 += dxhat(j) * xhat(i, j);
    }
    m1 /= static_cast<double>(d);
    m2 /= static_cast<double>(d);
    for (Index j = 0; j < d; ++j) {
      dx(i, j) = rstd(i) * (dxhat(j) - m1 - xhat(i, j) * m2);
    }
  }
  return dx;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2)); }

void gelu_with_grad(const MatR& x, MatR& y, MatR& dy) {
  y.resize(x.rows(), x.cols());
  dy.resize(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) {
      const double v = x(i, j);
      const double cdf = 0.5 * (1.0 + std::erf(v * M_SQRT1_2));
      y(i, j) = v * cdf;
      dy(i, j) = cdf + v * std::exp(-0.5 * v * v) * 0.3989422804014327;
    }
  }
}

MatR dropout_mask(Index r, Index c, double p, Rng& rng) {
  MatR m(r, c);
  const double keep = 1.0 / (1.0 - p);
  for (Index i = 0; i < r; ++i) {
    for (Index j = 0; j < c; ++j) m(i, j) = rng.bernoulli(p) ? 0.0 : keep;
  }
  return m;
}

// Masked multi-head attention of query rows `q` over key/value rows.
// `allowed(i, j)` decides visibility; disallowed scores get probability 0.
template <typename Allowed>
MatR attend(const MatR& q, const MatR& k, const MatR& v, int heads, Allowed allowed,
            std::vector<MatR>* probs) {
  const Index r = q.rows(), n = k.rows(), d = q.cols();
  const Index dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  MatR out(r, d);
  for (int h = 0; h < heads; ++h) {
    const Index c0 = h * dh;
    MatR s = q.middleCols(c0, dh) * k.middleCols(c0, dh).transpose();
    MatR p(r, n);
    for (Index i = 0; i < r; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (Index j = 0; j < n; ++j) {
        if (allowed(i, j)) mx = std::max(mx, s(i, j) * scale);
      }
      double sum = 0.0;
      for (Index j = 0; j < n; ++j) {
        const double e = allowed(i, j) ? std::exp(s(i, j) * scale - mx) : 0.0;
        p(i, j) = e;
        sum += e;
      }
      if (sum > 0.0) p.row(i) /= sum;
    }
    out.middleCols(c0, dh).noalias() = p * v.middleCols(c0, dh);
    if (probs) probs->push_back(std::move(p));
  }
  return out;
}

MatR embed(const Model& model, std::span<const TokenId> ids, std::span<const int> positions,
           std::span<const int> segments) {
  const auto& c = model.config();
  const auto& L = model.layout();
  const auto& p = model.params();
  const Index d = c.hidden;
  MatR x(static_cast<Index>(ids.size()), d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    x.row(static_cast<Index>(i)) =
        crow(p, L.tok + static_cast<std::size_t>(ids[i]) * static_cast<std::size_t>(d), d) +
        crow(p, L.pos + static_cast<std::size_t>(positions[i]) * static_cast<std::size_t>(d), d) +
        crow(p, L.seg + static_cast<std::size_t>(segments[i]) * static_cast<std::size_t>(d), d);
  }
  return x;
}

void check_sequence(const Model& model, const TokenSequence& seq, const AttentionMask& mask) {
  const auto& c = model.config();
  const std::size_t t = seq.ids.size();
  if (seq.segments.size() != t || seq.positions.size() != t) {
    throw ShapeMismatch("ids, segments and positions differ in length");
  }
  if (t == 0) throw ShapeMismatch("empty sequence");
  if (static_cast<std::size_t>(mask.size()) != t) {
    throw ShapeMismatch("attention mask is " + std::to_string(mask.size()) +
                        " wide for a sequence of " + std::to_string(t));
  }
  if (t > static_cast<std::size_t>(c.max_len)) throw TooLong("sequence exceeds max_len");
  for (std::size_t i = 0; i < t; ++i) {
    if (seq.ids[i] < 0 || seq.ids[i] >= c.vocab_size) {
      throw ShapeMismatch("token id " + std::to_string(seq.ids[i]) + " outside vocabulary");
    }
    if (seq.segments[i] != 0 && seq.segments[i] != 1) throw ShapeMismatch("segment not 0/1");
    if (seq.positions[i] < 0 || seq.positions[i] >= c.max_len) {
      throw ShapeMismatch("position outside [0, max_len)");
    }
  }
}

}  // namespace

ParamLayout::ParamLayout(const ModelConfig& c) {
  const std::size_t d = static_cast<std::size_t>(c.hidden);
  const std::size_t f = static_cast<std::size_t>(c.ffn());
  const std::size_t v = static_cast<std::size_t>(c.vocab_size);
  std::size_t off = 0;
  auto take = [&](std::size_t n) {
    const std::size_t at = off;
    off += n;
    return at;
  };
  tok = take(v * d);
  pos = take(static_cast<std::size_t>(c.max_len) * d);
  seg = take(2 * d);
  for (int l = 0; l < c.layers; ++l) {
    LayerLayout ll{};
    ll.ln1_g = take(d);
    ll.ln1_b = take(d);
    ll.wq = take(d * d);
    ll.bq = take(d);
    ll.wk = take(d * d);
    ll.bk = take(d);
    ll.wv = take(d * d);
    ll.bv = take(d);
    ll.wo = take(d * d);
    ll.bo = take(d);
    ll.ln2_g = take(d);
    ll.ln2_b = take(d);
    ll.w1 = take(d * f);
    ll.b1 = take(f);
    ll.w2 = take(f * d);
    ll.b2 = take(d);
    layers.push_back(ll);
  }
  lnf_g = take(d);
  lnf_b = take(d);
  out_b = take(v);
  total = off;
}

Model::Model(const ModelConfig& cfg) : cfg_(cfg), layout_((cfg.validate(), cfg)) {
  params_.assign(layout_.total, 0.0);
}

Model Model::init(const ModelConfig& cfg, std::uint64_t seed) {
  Model m(cfg);
  Rng rng(mix_seed(seed, 0x1417));
  auto& p = m.params_;
  const auto& L = m.layout_;
  const std::size_t d = static_cast<std::size_t>(cfg.hidden);
  const std::size_t f = static_cast<std::size_t>(cfg.ffn());
  auto normal = [&](std::size_t off, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) p[off + i] = cfg.init_std * rng.normal();
  };
  auto ones = [&](std::size_t off, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) p[off + i] = 1.0;
  };
  normal(L.tok, static_cast<std::size_t>(cfg.vocab_size) * d);
  normal(L.pos, static_cast<std::size_t>(cfg.max_len) * d);
  normal(L.seg, 2 * d);
  for (const auto& ll : L.layers) {
    ones(ll.ln1_g, d);
    normal(ll.wq, d * d);
    normal(ll.wk, d * d);
    normal(ll.wv, d * d);
    normal(ll.wo, d * d);
    ones(ll.ln2_g, d);
    normal(ll.w1, d * f);
    normal(ll.w2, f * d);
  }
  ones(L.lnf_g, d);
  return m;
}

std::vector<MatR> ForwardCache::hidden_states() const {
  std::vector<MatR> out;
  for (const auto& l : layers) out.push_back(l.x_in);
  out.push_back(x_final);
  return out;
}

std::vector<std::vector<MatR>> ForwardCache::attention() const {
  std::vector<std::vector<MatR>> out;
  for (const auto& l : layers) out.push_back(l.probs);
  return out;
}

MatR forward_hidden(const Model& model, const TokenSequence& seq, const AttentionMask& mask,
                    Rng* dropout_rng, ForwardCache* cache) {
  check_sequence(model, seq, mask);
  const auto& c = model.config();
  const auto& L = model.layout();
  const auto& p = model.params();
  const Index d = c.hidden, f = c.ffn();
  const bool drop = dropout_rng && c.dropout > 0.0;

  MatR x = embed(model, seq.ids, seq.positions, seq.segments);
  if (drop) {
    MatR m = dropout_mask(x.rows(), d, c.dropout, *dropout_rng);
    x = x.cwiseProduct(m);
    if (cache) cache->drop_emb = std::move(m);
  }
  auto allowed = [&](Index i, Index j) { return mask(static_cast<int>(i), static_cast<int>(j)); };
  if (cache) cache->layers.clear();

  for (const auto& ll : L.layers) {
    LayerCache lc;
    MatR a;
    layer_norm(x, crow(p, ll.ln1_g, d), crow(p, ll.ln1_b, d), a, lc.xhat1, lc.rstd1);
    lc.q = linear(a, cmat(p, ll.wq, d, d), crow(p, ll.bq, d));
    lc.k = linear(a, cmat(p, ll.wk, d, d), crow(p, ll.bk, d));
    lc.v = linear(a, cmat(p, ll.wv, d, d), crow(p, ll.bv, d));
    lc.attn_out = attend(lc.q, lc.k, lc.v, c.heads, allowed, &lc.probs);
    MatR z = linear(lc.attn_out, cmat(p, ll.wo, d, d), crow(p, ll.bo, d));
    if (drop) {
      lc.drop1 = dropout_mask(z.rows(), d, c.dropout, *dropout_rng);
      z = z.cwiseProduct(lc.drop1);
    }
    lc.x1 = x + z;
    layer_norm(lc.x1, crow(p, ll.ln2_g, d), crow(p, ll.ln2_b, d), lc.b, lc.xhat2, lc.rstd2);
    lc.pre_act = linear(lc.b, cmat(p, ll.w1, d, f), crow(p, ll.b1, f));
    if (cache) {
      gelu_with_grad(lc.pre_act, lc.act, lc.act_grad);
    } else {
      lc.act = lc.pre_act.unaryExpr([](double v) { return gelu(v); });
    }
    MatR ff = linear(lc.act, cmat(p, ll.w2, f, d), crow(p, ll.b2, d));
    if (drop) {
      lc.drop2 = dropout_mask(ff.rows(), d, c.dropout, *dropout_rng);
      ff = ff.cwiseProduct(lc.drop2);
    }
    MatR next = lc.x1 + ff;
    if (cache) {
      lc.x_in = std::move(x);
      cache->layers.push_back(std::move(lc));
    }
    x = std::move(next);
  }
  MatR h, xhat;
  Eigen::VectorXd rstd;
  layer_norm(x, crow(p, L.lnf_g, d), crow(p, L.lnf_b, d), h, xhat, rstd);
  if (cache) {
    cache->x_final = std::move(x);
    cache->xhat_f = std::move(xhat);
    cache->rstd_f = std::move(rstd);
  }
  return h;
}

MatR output_logits(const Model& model, const MatR& hidden_rows) {
  const auto& c = model.config();
  const auto& p = model.params();
  const auto& L = model.layout();
  MatR z = hidden_rows * cmat(p, L.tok, c.vocab_size, c.hidden).transpose();
  z.rowwise() += crow(p, L.out_b, c.vocab_size);
  return z;
}

MatR forward(const Model& model, const Example& ex) {
  if (ex.labels.size() != ex.seq.ids.size()) throw ShapeMismatch("labels and ids differ in length");
  const MatR h = forward_hidden(model, ex.seq, build_attention_mask(ex.n, ex.m), nullptr, nullptr);
  return output_logits(model, h);
}

double cross_entropy(const MatR& logits, std::span<const TokenId> labels) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size()) {
    throw ShapeMismatch("logits rows and labels differ");
  }
  double total = 0.0;
  int count = 0;
  for (Index i = 0; i < logits.rows(); ++i) {
    const TokenId y = labels[static_cast<std::size_t>(i)];
    if (y == kNoLabel) continue;
    if (y < 0 || y >= logits.cols()) throw ShapeMismatch("label outside vocabulary");
    const double mx = logits.row(i).maxCoeff();
    const double lse = mx + std::log((logits.row(i).array() - mx).exp().sum());
    total += lse - logits(i, y);
    ++count;
  }
  if (count == 0) throw NoLabels("no labeled positions");
  return total / count;
}

namespace {

void backward_example(const Model& model, const Example& ex, const ForwardCache& cache,
                      const MatR& d_hidden, ParamVector& grad) {
  const auto& c = model.config();
  const auto& L = model.layout();
  const auto& p = model.params();
  const Index d = c.hidden, f = c.ffn();
  const Index dh = c.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  MatR dx = layer_norm_backward(d_hidden, cache.xhat_f, cache.rstd_f, crow(p, L.lnf_g, d),
                                row(grad, L.lnf_g, d), row(grad, L.lnf_b, d));
  for (std::size_t li = L.layers.size(); li-- > 0;) {
    const auto& ll = L.layers[li];
    const auto& lc = cache.layers[li];

    MatR dff = lc.drop2.size() ? MatR(dx.cwiseProduct(lc.drop2)) : dx;
    mat(grad, ll.w2, f, d).noalias() += lc.act.transpose() * dff;
    row(grad, ll.b2, d) += dff.colwise().sum();
    MatR dact = dff * cmat(p, ll.w2, f, d).transpose();
    dact.array() *= lc.act_grad.array();
    mat(grad, ll.w1, d, f).noalias() += lc.b.transpose() * dact;
    row(grad, ll.b1, f) += dact.colwise().sum();
    MatR db = dact * cmat(p, ll.w1, d, f).transpose();
    MatR dx1 = dx + layer_norm_backward(db, lc.xhat2, lc.rstd2, crow(p, ll.ln2_g, d),
                                        row(grad, ll.ln2_g, d), row(grad, ll.ln2_b, d));

    MatR dz = lc.drop1.size() ? MatR(dx1.cwiseProduct(lc.drop1)) : dx1;
    mat(grad, ll.wo, d, d).noalias() += lc.attn_out.transpose() * dz;
    row(grad, ll.bo, d) += dz.colwise().sum();
    MatR d_attn = dz * cmat(p, ll.wo, d, d).transpose();

    const Index t = dx.rows();
    MatR dq = MatR::Zero(t, d), dk = MatR::Zero(t, d), dv = MatR::Zero(t, d);
    for (int h = 0; h < c.heads; ++h) {
      const Index c0 = h * dh;
      const MatR& pr = lc.probs[static_cast<std::size_t>(h)];
      MatR d_out = d_attn.middleCols(c0, dh);
      MatR dp = d_out * lc.v.middleCols(c0, dh).transpose();
      dv.middleCols(c0, dh).noalias() += pr.transpose() * d_out;
      MatR ds(t, t);
      for (Index i = 0; i < t; ++i) {
        const double dot = pr.row(i).dot(dp.row(i));
        for (Index j = 0; j < t; ++j) ds(i, j) = pr(i, j) * (dp(i, j) - dot) * scale;
      }
      dq.middleCols(c0, dh).noalias() += ds * lc.k.middleCols(c0, dh);
      dk.middleCols(c0, dh).noalias() += ds.transpose() * lc.q.middleCols(c0, dh);
    }
    MatR a = lc.xhat1;
    for (Index i = 0; i < a.rows(); ++i) {
      a.row(i) = a.row(i).cwiseProduct(crow(p, ll.ln1_g, d)) + crow(p, ll.ln1_b, d);
    }
    mat(grad, ll.wq, d, d).noalias() += a.transpose() * dq;
    mat(grad, ll.wk, d, d).noalias() += a.transpose() * dk;
    mat(grad, ll.wv, d, d).noalias() += a.transpose() * dv;
    row(grad, ll.bq, d) += dq.colwise().sum();
    row(grad, ll.bk, d) += dk.colwise().sum();
    row(grad, ll.bv, d) += dv.colwise().sum();
    MatR da = dq * cmat(p, ll.wq, d, d).transpose();
    da.noalias() += dk * cmat(p, ll.wk, d, d).transpose();
    da.noalias() += dv * cmat(p, ll.wv, d, d).transpose();
    dx = dx1 + layer_norm_backward(da, lc.xhat1, lc.rstd1, crow(p, ll.ln1_g, d),
                                   row(grad, ll.ln1_g, d), row(grad, ll.ln1_b, d));
  }
  if (cache.drop_emb.size()) dx = dx.cwiseProduct(cache.drop_emb);
  for (std::size_t i = 0; i < ex.seq.ids.size(); ++i) {
    const auto r = dx.row(static_cast<Index>(i));
    row(grad, L.tok + static_cast<std::size_t>(ex.seq.ids[i]) * static_cast<std::size_t>(d), d) += r;
    row(grad, L.pos + static_cast<std::size_t>(ex.seq.positions[i]) * static_cast<std::size_t>(d), d) += r;
    row(grad, L.seg + static_cast<std::size_t>(ex.seq.segments[i]) * static_cast<std::size_t>(d), d) += r;
  }
}

int total_labels(std::span<const Example> batch) {
  int total = 0;
  for (const auto& ex : batch) {
    if (ex.labels.size() != ex.seq.ids.size()) throw ShapeMismatch("labels and ids differ in length");
    total += ex.label_count();
  }
  if (total == 0) throw NoLabels("batch has no labeled positions");
  return total;
}

}  // namespace

double loss_and_gradient(const Model& model, std::span<const Example> batch, Rng* dropout_rng,
                         ParamVector& grad) {
  const int total = total_labels(batch);
  const auto& c = model.config();
  const auto& L = model.layout();
  const auto& p = model.params();
  const Index d = c.hidden, v = c.vocab_size;
  grad.assign(L.total, 0.0);
  const double w = 1.0 / total;
  double loss = 0.0;
  for (const auto& ex : batch) {
    std::vector<Index> rows;
    for (std::size_t i = 0; i < ex.labels.size(); ++i) {
      if (ex.labels[i] != kNoLabel) rows.push_back(static_cast<Index>(i));
    }
    if (rows.empty()) continue;
    ForwardCache cache;
    const MatR h = forward_hidden(model, ex.seq, build_attention_mask(ex.n, ex.m), dropout_rng, &cache);
    MatR hr(static_cast<Index>(rows.size()), d);
    for (std::size_t k = 0; k < rows.size(); ++k) hr.row(static_cast<Index>(k)) = h.row(rows[k]);
    MatR z = output_logits(model, hr);
    for (Index k = 0; k < z.rows(); ++k) {
      const TokenId y = ex.labels[static_cast<std::size_t>(rows[static_cast<std::size_t>(k)])];
      if (y < 0 || y >= v) throw ShapeMismatch("label outside vocabulary");
      const double mx = z.row(k).maxCoeff();
      Eigen::RowVectorXd e = (z.row(k).array() - mx).exp();
      const double sum = e.sum();
      loss += mx + std::log(sum) - z(k, y);
      z.row(k) = e / sum * w;
      z(k, y) -= w;
    }
    mat(grad, L.tok, v, d).noalias() += z.transpose() * hr;
    row(grad, L.out_b, v) += z.colwise().sum();
    MatR dhr = z * cmat(p, L.tok, v, d);
    MatR dh = MatR::Zero(h.rows(), d);
    for (std::size_t k = 0; k < rows.size(); ++k) dh.row(rows[k]) = dhr.row(static_cast<Index>(k));
    backward_example(model, ex, cache, dh, grad);
  }
  return loss * w;
}

double batch_loss(const Model& model, std::span<const Example> batch) {
  const int total = total_labels(batch);
  double loss = 0.0;
  for (const auto& ex : batch) {
    if (ex.label_count() == 0) continue;
    loss += cross_entropy(forward(model, ex), ex.labels) * ex.label_count();
  }
  return loss / total;
}

MatR forward_rows(const Model& model, std::span<const TokenId> ids,
                  std::span<const int> segments, std::span<const int> limits,
                  KvCache& cache, bool persist) {
  const auto& c = model.config();
  const auto& L = model.layout();
  const auto& p = model.params();
  const Index d = c.hidden, f = c.ffn();
  const Index r = static_cast<Index>(ids.size());
  if (segments.size() != ids.size() || limits.size() != ids.size()) {
    throw ShapeMismatch("ids, segments and limits differ in length");
  }
  if (cache.keys.empty()) {
    cache.keys.resize(L.layers.size());
    cache.values.resize(L.layers.size());
  }
  const int start = cache.rows;
  if (start + r > c.max_len) throw TooLong("decoding past max_len");
  std::vector<int> positions(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= c.vocab_size) throw ShapeMismatch("token id outside vocabulary");
    positions[i] = start + static_cast<int>(i);
  }
  MatR x = embed(model, ids, positions, segments);
  const Index total = start + r;
  auto allowed = [&](Index i, Index j) { return j < limits[static_cast<std::size_t>(i)]; };

  for (std::size_t li = 0; li < L.layers.size(); ++li) {
    const auto& ll = L.layers[li];
    MatR a, xhat;
    Eigen::VectorXd rstd;
    layer_norm(x, crow(p, ll.ln1_g, d), crow(p, ll.ln1_b, d), a, xhat, rstd);
    MatR q = linear(a, cmat(p, ll.wq, d, d), crow(p, ll.bq, d));
    MatR k = linear(a, cmat(p, ll.wk, d, d), crow(p, ll.bk, d));
    MatR v = linear(a, cmat(p, ll.wv, d, d), crow(p, ll.bv, d));
    MatR kk(total, d), vv(total, d);
    if (start > 0) {
      kk.topRows(start) = cmat(cache.keys[li], 0, start, d);
      vv.topRows(start) = cmat(cache.values[li], 0, start, d);
    }
    kk.bottomRows(r) = k;
    vv.bottomRows(r) = v;
    MatR o = attend(q, kk, vv, c.heads, allowed, nullptr);
    MatR x1 = x + linear(o, cmat(p, ll.wo, d, d), crow(p, ll.bo, d));
    MatR b;
    layer_norm(x1, crow(p, ll.ln2_g, d), crow(p, ll.ln2_b, d), b, xhat, rstd);
    MatR act = linear(b, cmat(p, ll.w1, d, f), crow(p, ll.b1, f))
                   .unaryExpr([](double v) { return gelu(v); });
    x = x1 + linear(act, cmat(p, ll.w2, f, d), crow(p, ll.b2, d));
    if (persist) {
      cache.keys[li].insert(cache.keys[li].end(), k.data(), k.data() + k.size());
      cache.values[li].insert(cache.values[li].end(), v.data(), v.data() + v.size());
    }
  }
  if (persist) cache.rows = static_cast<int>(total);
  MatR h, xhat;
  Eigen::VectorXd rstd;
  layer_norm(x, crow(p, L.lnf_g, d), crow(p, L.lnf_b, d), h, xhat, rstd);
  return h;
}

}  // namespace ehrqa
