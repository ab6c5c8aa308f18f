#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ehrqa/common/error.hpp"
#include "ehrqa/corpus/corpus.hpp"
#include "ehrqa/model/checkpoint.hpp"
#include "ehrqa/model/decode.hpp"
#include "ehrqa/model/train.hpp"
#include "model_checks.hpp"

using namespace ehrqa;

namespace {

bool mask_rule(int n, int i, int j) { return i <= n ? j <= n : j <= i; }

struct TinyTask {
  Vocab vocab;
  std::vector<PairIds> pairs;
};

TinyTask tiny_task(int count) {
  const Database db = generate_database(3, Scale::tiny);
  const auto qa = generate_pairs(db, default_templates(), count, 3);
  std::vector<std::string> texts;
  for (const auto& p : qa) {
    texts.push_back(p.question);
    texts.push_back(p.sql);
  }
  TinyTask t{train_vocab(texts, 300, 0), {}};
  for (const auto& p : qa) t.pairs.push_back({p.id, encode(t.vocab, p.question), encode(t.vocab, p.sql)});
  return t;
}

ModelConfig task_config(const TinyTask& t) {
  ModelConfig c = ModelConfig::tiny();
  c.layers = 1;
  c.hidden = 32;
  c.vocab_size = t.vocab.size();
  return c;
}

}  // namespace

TEST_CASE("input layout") {
  const std::vector<TokenId> none;
  auto s = build_input(none, none, 8);
  CHECK(s.ids == std::vector<TokenId>{kSep, kSep});
  CHECK(s.segments == std::vector<int>{0, 1});
  CHECK(s.positions == std::vector<int>{0, 1});
  const std::vector<TokenId> q{5, 6}, y{7, 8};
  s = build_input(q, y, 8);
  CHECK(s.ids == std::vector<TokenId>{5, 6, kSep, 7, 8, kSep});
  CHECK(s.segments == std::vector<int>{0, 0, 0, 1, 1, 1});
  CHECK(s.positions == std::vector<int>{0, 1, 2, 3, 4, 5});
  CHECK_THROWS_AS(build_input(q, y, 5), TooLong);
}

TEST_CASE("attention mask examples and rule") {
  auto m = build_attention_mask(2, 2);
  const std::vector<int> q1{1, 1, 1, 0, 0, 0}, y1{1, 1, 1, 1, 0, 0};
  for (int j = 0; j < 6; ++j) {
    CHECK(m(0, j) == (q1[static_cast<std::size_t>(j)] == 1));
    CHECK(m(3, j) == (y1[static_cast<std::size_t>(j)] == 1));
    CHECK(m(5, j));
  }
  auto z = build_attention_mask(0, 0);
  CHECK(z(0, 0));
  CHECK_FALSE(z(0, 1));
  CHECK(z(1, 0));
  CHECK(z(1, 1));
  for (int n = 0; n <= 64; n += 3) {
    for (int k = 0; k <= 64; k += 5) {
      const auto mask = build_attention_mask(n, k);
      CHECK(mask.size() == n + k + 2);
      bool ok = true;
      for (int i = 0; i < mask.size(); ++i) {
        ok &= mask(i, i);
        for (int j = 0; j < mask.size(); ++j) {
          ok &= mask(i, j) == mask_rule(n, i, j);
          if (i <= n && j > n) ok &= !mask(i, j);
        }
      }
      CHECK(ok);
    }
  }
}

TEST_CASE("input masking rates and contract") {
  TrainConfig cfg;
  Rng rng(5);
  const int vocab = 50;
  std::vector<TokenId> q(1000);
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = 4 + static_cast<TokenId>(i % 46);
  long selected = 0, masked = 0, random = 0, kept = 0, total = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const Masked out = apply_input_masking(q, cfg, vocab, rng);
    for (std::size_t i = 0; i < q.size(); ++i) {
      ++total;
      if (out.labels[i] == kNoLabel) {
        REQUIRE(out.ids[i] == q[i]);
        continue;
      }
      REQUIRE(out.labels[i] == q[i]);
      ++selected;
      if (out.ids[i] == kMask) ++masked;
      else if (out.ids[i] == q[i]) ++kept;
      else ++random;
      REQUIRE(out.ids[i] >= (out.ids[i] == kMask ? kMask : kNumSpecial));
    }
  }
  const double sel = static_cast<double>(selected) / static_cast<double>(total);
  CHECK(std::abs(sel - 0.2) <= 0.005);
  // A random draw equal to the original token counts as kept; correct for it.
  const double p_same = 1.0 / 46.0;
  const double s = static_cast<double>(selected);
  CHECK(std::abs(masked / s - 0.8) <= 0.01);
  CHECK(std::abs(random / s - 0.1 * (1 - p_same)) <= 0.01);
  CHECK(std::abs(kept / s - (0.1 + 0.1 * p_same)) <= 0.01);

  cfg.input_mask_prob = 0.0;
  const Masked none = apply_input_masking(q, cfg, vocab, rng);
  CHECK(none.ids == q);
  CHECK(std::all_of(none.labels.begin(), none.labels.end(), [](TokenId l) { return l == kNoLabel; }));
  const std::vector<TokenId> bad{5, kSep};
  CHECK_THROWS_AS(apply_input_masking(bad, cfg, vocab, rng), InvalidArgument);
}

TEST_CASE("target masking rates and contract") {
  TrainConfig cfg;
  Rng rng(9);
  std::vector<TokenId> y(999, 7);
  y.push_back(kSep);
  long selected = 0, total = 0, sep_selected = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const Masked out = apply_target_masking(y, cfg, rng);
    for (std::size_t i = 0; i < y.size(); ++i) {
      ++total;
      if (out.labels[i] == kNoLabel) {
        REQUIRE(out.ids[i] == y[i]);
        continue;
      }
      ++selected;
      REQUIRE(out.ids[i] == kMask);
      REQUIRE(out.labels[i] == y[i]);
      if (i + 1 == y.size()) ++sep_selected;
    }
  }
  CHECK(std::abs(static_cast<double>(selected) / static_cast<double>(total) - 0.3) <= 0.01);
  CHECK(sep_selected > 0);
  cfg.target_mask_prob = 1.0;
  const Masked all = apply_target_masking(y, cfg, rng);
  CHECK(std::all_of(all.ids.begin(), all.ids.end(), [](TokenId t) { return t == kMask; }));
  CHECK(all.labels == y);
  const std::vector<TokenId> no_sep{5, 6};
  CHECK_THROWS(apply_target_masking(no_sep, cfg, rng));
}

TEST_CASE("make_example without input masking labels only the query side") {
  TrainConfig cfg;
  cfg.input_mask_prob = 0.0;
  cfg.target_mask_prob = 1.0;
  Rng rng(1);
  const std::vector<TokenId> q{5, 6, 7}, y{8, 9};
  const Example ex = make_example(q, y, cfg, 20, 16, rng);
  CHECK(ex.n == 3);
  CHECK(ex.m == 2);
  CHECK(ex.label_count() == 3);
  for (int i = 0; i <= ex.n; ++i) CHECK(ex.labels[static_cast<std::size_t>(i)] == kNoLabel);
  CHECK(ex.labels.back() == kSep);
  CHECK(ex.seq.ids.back() == kMask);
}

TEST_CASE("cross entropy values") {
  MatR uniform = MatR::Zero(3, 17);
  const std::vector<TokenId> labels{4, kNoLabel, 9};
  CHECK(cross_entropy(uniform, labels) == doctest::Approx(std::log(17.0)).epsilon(1e-12));
  MatR sharp = MatR::Zero(2, 5);
  sharp(0, 2) = 60;
  sharp(1, 3) = 60;
  const std::vector<TokenId> right{2, 3};
  CHECK(cross_entropy(sharp, right) < 1e-20);
  const std::vector<TokenId> none{kNoLabel, kNoLabel};
  CHECK_THROWS_AS(cross_entropy(sharp, none), NoLabels);
}

TEST_CASE("pooled loss is the count-weighted average of the two objectives") {
  const ModelConfig cfg = fixture::small_config(20, 2, 16, 2, 24);
  const Model model = fixture::random_model(cfg, 4);
  Rng rng(4);
  std::vector<Example> batch;
  for (int k = 0; k < 3; ++k) batch.push_back(fixture::random_example(6, 5, 20, 24, rng));
  double q_sum = 0, y_sum = 0;
  int q_count = 0, y_count = 0;
  for (const auto& ex : batch) {
    const MatR logits = forward(model, ex);
    std::vector<TokenId> q_lab(ex.labels.size(), kNoLabel), y_lab(ex.labels.size(), kNoLabel);
    int qc = 0, yc = 0;
    for (std::size_t i = 0; i < ex.labels.size(); ++i) {
      if (ex.labels[i] == kNoLabel) continue;
      if (static_cast<int>(i) <= ex.n) {
        q_lab[i] = ex.labels[i];
        ++qc;
      } else {
        y_lab[i] = ex.labels[i];
        ++yc;
      }
    }
    if (qc) q_sum += cross_entropy(logits, q_lab) * qc;
    if (yc) y_sum += cross_entropy(logits, y_lab) * yc;
    q_count += qc;
    y_count += yc;
  }
  REQUIRE(q_count > 0);
  REQUIRE(y_count > 0);
  const double pooled = (q_sum + y_sum) / (q_count + y_count);
  CHECK(batch_loss(model, batch) == doctest::Approx(pooled).epsilon(1e-12));
  ParamVector grad;
  CHECK(loss_and_gradient(model, batch, nullptr, grad) == doctest::Approx(pooled).epsilon(1e-12));
}

TEST_CASE("no labeled positions") {
  const ModelConfig cfg = fixture::small_config(20, 1, 8, 2, 16);
  const Model model = fixture::random_model(cfg, 1);
  Example ex;
  const std::vector<TokenId> q{5}, y{6};
  ex.seq = build_input(q, y, 16);
  ex.n = 1;
  ex.m = 1;
  ex.labels.assign(4, kNoLabel);
  std::vector<Example> batch{ex};
  ParamVector grad;
  CHECK_THROWS_AS(loss_and_gradient(model, batch, nullptr, grad), NoLabels);
  CHECK_THROWS_AS(batch_loss(model, batch), NoLabels);
}

TEST_CASE("gradients match finite differences") {
  const ModelConfig cfg = fixture::small_config(16, 2, 32, 4, 20);
  Rng rng(11);
  std::vector<Example> batch;
  batch.push_back(fixture::random_example(8, 10, 16, 20, rng));
  batch.push_back(fixture::random_example(5, 7, 16, 20, rng));
  const Model model = fixture::random_model(cfg, 12);
  const auto res = fixture::gradient_check(model, batch, 100, 13);
  CHECK(res.checked == 100);
  CHECK(res.nonzero >= 80);
  CHECK(res.max_rel < 1e-4);
}

TEST_CASE("empty question: gradients of unused rows vanish") {
  ModelConfig cfg = fixture::small_config(16, 1, 16, 2, 12);
  cfg.dropout = 0.0;
  const Model model = fixture::random_model(cfg, 21);
  Rng rng(21);
  std::vector<Example> batch{fixture::random_example(0, 4, 16, 12, rng)};
  ParamVector grad;
  loss_and_gradient(model, batch, nullptr, grad);
  const auto& L = model.layout();
  const std::size_t d = 16;
  // Positions past the sequence never feed the loss.
  for (std::size_t p = static_cast<std::size_t>(batch[0].size()); p < 12; ++p) {
    for (std::size_t k = 0; k < d; ++k) CHECK(grad[L.pos + p * d + k] == 0.0);
  }
}

TEST_CASE("question-side states ignore the query side") {
  for (int draw = 0; draw < 5; ++draw) {
    const ModelConfig cfg = fixture::small_config(30, 2, 16, 2, 40);
    const Model model = fixture::random_model(cfg, 100 + static_cast<std::uint64_t>(draw));
    Rng rng(static_cast<std::uint64_t>(draw));
    const Example ex = fixture::random_example(7, 9, 30, 40, rng);
    CHECK(fixture::question_side_isolated(model, ex, rng));
  }
}

TEST_CASE("causality on the query side") {
  const ModelConfig cfg = fixture::small_config(30, 2, 16, 2, 40);
  const Model model = fixture::random_model(cfg, 7);
  Rng rng(7);
  const Example ex = fixture::random_example(5, 8, 30, 40, rng);
  const MatR base = forward(model, ex);
  for (int j = ex.n + 1; j < ex.size(); ++j) {
    Example changed = ex;
    auto& id = changed.seq.ids[static_cast<std::size_t>(j)];
    id = id == 10 ? 11 : 10;
    const MatR out = forward(model, changed);
    CHECK(out.topRows(j) == base.topRows(j));
    CHECK(out.row(j) != base.row(j));
  }
}

TEST_CASE("attention rows are normalized over allowed columns") {
  const ModelConfig cfg = fixture::small_config(30, 2, 16, 4, 40);
  const Model model = fixture::random_model(cfg, 8, 1.0);
  Rng rng(8);
  const Example ex = fixture::random_example(6, 6, 30, 40, rng);
  const AttentionMask mask = build_attention_mask(ex.n, ex.m);
  ForwardCache cache;
  forward_hidden(model, ex.seq, mask, nullptr, &cache);
  for (const auto& layer : cache.attention()) {
    for (const auto& p : layer) {
      for (int i = 0; i < mask.size(); ++i) {
        double sum = 0;
        for (int j = 0; j < mask.size(); ++j) {
          if (mask(i, j)) sum += p(i, j);
          else CHECK(p(i, j) == 0.0);
        }
        CHECK(std::abs(sum - 1.0) < 1e-6);
      }
    }
  }
}

TEST_CASE("forward rejects malformed input") {
  const ModelConfig cfg = fixture::small_config(20, 1, 8, 2, 16);
  const Model model = fixture::random_model(cfg, 1);
  const std::vector<TokenId> q{5}, y{6};
  TokenSequence s = build_input(q, y, 16);
  CHECK_THROWS_AS(forward_hidden(model, s, build_attention_mask(2, 1), nullptr, nullptr), ShapeMismatch);
  s.ids[0] = 25;
  CHECK_THROWS_AS(forward_hidden(model, s, build_attention_mask(1, 1), nullptr, nullptr), ShapeMismatch);
  s = build_input(q, y, 16);
  s.segments.pop_back();
  CHECK_THROWS_AS(forward_hidden(model, s, build_attention_mask(1, 1), nullptr, nullptr), ShapeMismatch);
}

TEST_CASE("incremental decoding matches full forward passes") {
  const ModelConfig cfg = fixture::small_config(25, 2, 16, 2, 30);
  const Model model = fixture::random_model(cfg, 31, 0.5);
  Rng rng(31);
  const auto q = fixture::random_ids(6, 25, rng);
  const auto y = fixture::random_ids(4, 25, rng);
  IncrementalDecoder dec(model, q);
  double sum = 0;
  for (std::size_t t = 0; t <= y.size(); ++t) {
    const auto lp = dec.next_log_probs();
    sum += lp(t < y.size() ? y[t] : kSep);
    if (t < y.size()) dec.push(y[t]);
  }
  const Hypothesis h = score_output(model, q, y, true);
  CHECK(h.log_prob == doctest::Approx(sum).epsilon(1e-10));
}

TEST_CASE("greedy decoding contracts") {
  const ModelConfig cfg = fixture::small_config(25, 1, 16, 2, 30);
  Model model = fixture::random_model(cfg, 41, 0.5);
  // Output bias dominating on SEP forces an empty output.
  Model stop = model;
  stop.params()[stop.layout().out_b + kSep] = 1e3;
  const std::vector<TokenId> q{5, 6, 7};
  CHECK(decode_greedy(stop, q, 10).empty());
  CHECK(decode_greedy_scored(stop, q, 10).finished);
  // PAD and MASK strongly preferred by the logits are still never emitted.
  model.params()[model.layout().out_b + kPad] = 1e3;
  model.params()[model.layout().out_b + kMask] = 1e3;
  const auto out = decode_greedy(model, q, 12);
  CHECK(out.size() <= 12);
  for (TokenId t : out) {
    CHECK(t != kPad);
    CHECK(t != kMask);
    CHECK(t != kSep);
  }
  const std::vector<TokenId> long_q(29, 5);
  CHECK_THROWS_AS(decode_greedy(model, long_q, 4), TooLong);
}

TEST_CASE("beam width one is greedy; wider beams dominate greedy") {
  const ModelConfig cfg = fixture::small_config(30, 1, 16, 2, 40);
  const Model model = fixture::random_model(cfg, 51, 0.6);
  Rng rng(51);
  for (int k = 0; k < 50; ++k) {
    const auto q = fixture::random_ids(3 + static_cast<int>(rng.below(6)), 30, rng);
    const Hypothesis g = decode_greedy_scored(model, q, 8);
    const Hypothesis b1 = decode_beam_scored(model, q, 1, 8);
    CHECK(b1.tokens == g.tokens);
    CHECK(b1.finished == g.finished);
    const Hypothesis b5 = decode_beam_scored(model, q, 5, 8);
    CHECK(b5.normalized() >= g.normalized());
  }
  CHECK_THROWS_AS(decode_beam(model, std::vector<TokenId>{5}, 0, 4), InvalidArgument);
}

TEST_CASE("unbounded beam equals exhaustive enumeration") {
  const ModelConfig cfg = fixture::small_config(6, 1, 8, 2, 16);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Model model = fixture::random_model(cfg, 60 + seed, 1.0);
    Rng rng(seed);
    const auto q = fixture::random_ids(3, 6, rng);
    const Hypothesis brute = fixture::exhaustive_best(model, q, 3);
    const Hypothesis beam = decode_beam_scored(model, q, 1000, 3);
    CHECK(beam.tokens == brute.tokens);
    CHECK(beam.finished == brute.finished);
    CHECK(beam.normalized() == doctest::Approx(brute.normalized()).epsilon(1e-9));
  }
}

TEST_CASE("learning rate schedule") {
  TrainConfig t;
  t.lr = 1.0;
  t.warmup_frac = 0.1;
  CHECK(scheduled_lr(t, 0, 100) == doctest::Approx(0.1));
  CHECK(scheduled_lr(t, 9, 100) == doctest::Approx(1.0));
  CHECK(scheduled_lr(t, 10, 100) == doctest::Approx(1.0));
  CHECK(scheduled_lr(t, 55, 100) == doctest::Approx(0.5));
  CHECK(scheduled_lr(t, 99, 100) == doctest::Approx(1.0 / 90));
}

TEST_CASE("training reduces loss, is deterministic and checkpoints exactly") {
  const TinyTask task = tiny_task(16);
  const ModelConfig cfg = task_config(task);
  TrainConfig t;
  t.batch = 16;
  t.epochs = 50;
  t.patience = 50;
  t.warmup_frac = 0.1;
  const auto valid = validation_examples(task.pairs, t, cfg.vocab_size, cfg.max_len);
  const double initial = batch_loss(Model::init(cfg, t.seed), valid);
  std::vector<double> curve{initial};
  const TrainResult a = train_model(task.pairs, {}, cfg, t, [&](const EpochReport& r, const Model&) {
    if (r.epoch % 10 == 0) curve.push_back(r.valid_loss);
    return false;
  });
  REQUIRE(a.step_losses.size() == 50);
  for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i] < curve[i - 1]);

  const TrainResult b = train_model(task.pairs, {}, cfg, t);
  CHECK(a.step_losses == b.step_losses);
  CHECK(a.model == b.model);

  const auto dir = std::filesystem::temp_directory_path() / "ehrqa_test_model";
  std::filesystem::create_directories(dir);
  save_checkpoint(dir / "model.bin", a.model);
  write_model_meta(dir / "model.meta", cfg, t);
  const Model back = load_checkpoint(dir / "model.bin");
  CHECK(back == a.model);
  CHECK(std::abs(batch_loss(back, valid) - a.best_valid_loss) <= 1e-10);
  CHECK(std::filesystem::file_size(dir / "model.meta") > 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("two epochs on sixteen pairs with a validation split") {
  const TinyTask task = tiny_task(20);
  const ModelConfig cfg = task_config(task);
  TrainConfig t;
  t.epochs = 2;
  t.batch = 4;
  const std::vector<PairIds> train(task.pairs.begin(), task.pairs.begin() + 16);
  const std::vector<PairIds> valid(task.pairs.begin() + 16, task.pairs.end());
  const TrainResult r = train_model(train, valid, cfg, t);
  CHECK(r.epochs.size() == 2);
  CHECK(r.step_losses.size() == 8);
  CHECK(r.best_epoch >= 1);
  CHECK_THROWS_AS(train_model({}, valid, cfg, t), EmptyTrainSet);
}

TEST_CASE("early stopping keeps the best epoch") {
  const TinyTask task = tiny_task(12);
  const ModelConfig cfg = task_config(task);
  TrainConfig t;
  t.epochs = 200;
  t.patience = 2;
  t.lr = 0.05;
  const TrainResult r = train_model(task.pairs, {}, cfg, t);
  CHECK(r.early_stopped);
  CHECK(static_cast<int>(r.epochs.size()) == r.best_epoch + t.patience);
  const auto valid = validation_examples(task.pairs, t, cfg.vocab_size, cfg.max_len);
  CHECK(batch_loss(r.model, valid) == doctest::Approx(r.best_valid_loss).epsilon(1e-12));
}

TEST_CASE("checkpoint errors") {
  const auto dir = std::filesystem::temp_directory_path() / "ehrqa_test_ckpt";
  std::filesystem::create_directories(dir);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.bin"), IoError);
  {
    std::ofstream out(dir / "bad.bin");
    out << "not a checkpoint\n";
  }
  CHECK_THROWS_AS(load_checkpoint(dir / "bad.bin"), ParseError);
  const Model m = fixture::random_model(fixture::small_config(10, 1, 8, 2, 8), 1);
  save_checkpoint(dir / "ok.bin", m);
  std::filesystem::resize_file(dir / "ok.bin", std::filesystem::file_size(dir / "ok.bin") - 8);
  CHECK_THROWS_AS(load_checkpoint(dir / "ok.bin"), ParseError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("config validation and json") {
  ModelConfig c = ModelConfig::tiny();
  c.vocab_size = 100;
  CHECK_NOTHROW(c.validate());
  c.heads = 3;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  TrainConfig t;
  t.mix_keep = 0.2;
  CHECK_THROWS_AS(t.validate(), InvalidArgument);
  TrainConfig u;
  u.lr = 0.5;
  u.seed = 77;
  CHECK(nlohmann::json(u).get<TrainConfig>() == u);
  c.heads = 4;
  CHECK(nlohmann::json(c).get<ModelConfig>() == c);
}
