#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "relmine/error.hpp"
#include "relmine/training.hpp"
#include "test_util.hpp"

using namespace relmine;
using testutil::make_log;

namespace {

struct Corpus {
  ActivityVocabulary vocab;
  std::vector<EncodedGraph> graphs;
};

Corpus encode_log(const EventLog& log, std::size_t padding) {
  Corpus c;
  c.vocab = build_vocabulary(log);
  for (const Trace& t : log.traces) {
    c.graphs.push_back(encode_graph(build_instance_graph(t), c.vocab,
                                    c.vocab.size() + padding));
  }
  return c;
}

Corpus tiny_corpus() {
  return encode_log(make_log({{{"a", "b"}, 1},
                              {{"b", "c"}, 0},
                              {{"a", "c", "a"}, 1},
                              {{"c"}, 0}}),
                    2);
}

}  // namespace

TEST_SUITE("training") {

TEST_CASE("the early stopper rewards only real improvement") {
  EarlyStopper s(10);
  CHECK(s.observe(0.30));
  CHECK(s.observe(0.29));
  for (int i = 0; i < 10; ++i) {
    CHECK(!s.observe(0.29));  // flat is not an improvement
    CHECK(s.should_stop() == (i == 9));
  }
  CHECK(s.best_epoch() == 2);
  CHECK(s.best_loss() == 0.29);

  EarlyStopper t(2);
  CHECK(t.observe(1.0));
  CHECK(!t.observe(1.0 - 1e-9));   // within the minimum improvement
  CHECK(t.observe(1.0 - 1e-6));    // beyond it
  CHECK(!t.should_stop());
}

TEST_CASE("sgd steps are plain scaled subtraction") {
  GgnnParams p = GgnnParams::zeros(3, 2, ReadoutMode::literal);
  GgnnParams g = GgnnParams::zeros(3, 2, ReadoutMode::literal);
  p.w_update.fill(1.0);
  g.w_update.fill(0.25);
  g.attn_bias(0, 0) = -2.0;

  GgnnParams frozen = p;
  sgd_step(frozen, g, 0.0);
  CHECK(frozen.flatten() == p.flatten());  // zero rate moves nothing

  sgd_step(p, g, 0.1);
  CHECK(p.w_update(0, 0) == 1.0 - 0.1 * 0.25);
  CHECK(p.w_update(2, 2) == 1.0 - 0.1 * 0.25);
  CHECK(p.attn_bias(0, 0) == 0.2);
  CHECK(p.b_cand(0, 0) == 0.0);
}

TEST_CASE("the first adam step moves by roughly the learning rate") {
  GgnnParams p = GgnnParams::zeros(3, 2, ReadoutMode::literal);
  GgnnParams g = GgnnParams::zeros(3, 2, ReadoutMode::literal);
  for (auto& [name, m] : p.blocks()) m->fill(0.5);
  g.w_update.fill(1.0);
  g.u_reset.fill(-1.0);

  OptimizerState st = OptimizerState::zeros(p);
  adam_step(p, g, st, 0.001);
  CHECK(st.step == 1);
  // bias-corrected first step: lr * g / (|g| + eps)
  CHECK(p.w_update(1, 1) == doctest::Approx(0.5 - 0.001).epsilon(1e-9));
  CHECK(p.u_reset(0, 2) == doctest::Approx(0.5 + 0.001).epsilon(1e-9));
  CHECK(p.w_cand(0, 0) == 0.5);  // zero gradient, zero movement

  GgnnParams q = GgnnParams::zeros(3, 2, ReadoutMode::literal);
  GgnnParams zero = GgnnParams::zeros(3, 2, ReadoutMode::literal);
  OptimizerState st2 = OptimizerState::zeros(q);
  adam_step(q, zero, st2, 0.001);
  for (double v : q.flatten()) CHECK(v == 0.0);
}

TEST_CASE("one sgd epoch equals one hand-computed step") {
  Corpus c = tiny_corpus();
  Rng init_rng(3);
  GgnnParams p0 = init_params(c.vocab.size(), GgnnConfig{.padding = 2}, init_rng);

  TrainConfig cfg;
  cfg.max_epochs = 1;
  cfg.batch_size = 16;  // one batch swallows all four graphs
  cfg.learning_rate = 0.01;
  cfg.optimizer = Optimizer::sgd;

  Rng r1(77);
  TrainedModel m = train_from(p0, c.graphs, {}, cfg, c.vocab, r1);

  // Mirror the documented epoch: shuffle the order, one summed-gradient step.
  Rng r2(77);
  std::vector<std::size_t> order{0, 1, 2, 3};
  r2.shuffle(order);
  std::vector<BatchItem> batch;
  for (std::size_t i : order) {
    batch.push_back({&c.graphs[i], static_cast<double>(c.graphs[i].label)});
  }
  GradientResult gr = gradients(batch, p0);
  GgnnParams expect = p0;
  sgd_step(expect, gr.grads, 0.01);

  CHECK(m.params.flatten() == expect.flatten());
  REQUIRE(m.report.size() == 1);
  CHECK(m.report[0].train_cost == gr.cost);
  CHECK(m.stopped_epoch == 1);
}

TEST_CASE("early stopping returns the best epoch's parameters") {
  SynthSpec spec;
  spec.num_traces = 120;
  spec.alphabet_size = 5;
  spec.mean_length = 5;
  spec.plant_rate = 0.4;
  EventLog log = generate_synthetic_log(spec, 7);
  Corpus c = encode_log(log, 4);
  std::span<const EncodedGraph> all(c.graphs);
  auto train_span = all.subspan(0, 100);
  auto val_span = all.subspan(100);

  TrainConfig cfg;
  cfg.max_epochs = 25;
  cfg.patience = 3;
  cfg.batch_size = 16;
  cfg.learning_rate = 0.05;  // deliberately jumpy so validation oscillates

  GgnnConfig gcfg;
  gcfg.padding = 4;
  Rng ra(5);
  TrainedModel first = train(train_span, val_span, cfg, gcfg, c.vocab, ra);
  REQUIRE(first.best_epoch >= 1);
  CHECK(first.stopped_epoch == first.report.size());
  if (first.stopped_epoch < cfg.max_epochs) {
    CHECK(first.stopped_epoch == first.best_epoch + cfg.patience);
  }
  for (std::size_t i = 0; i < first.report.size(); ++i) {
    CHECK(first.report[i].epoch == i + 1);
  }
  std::size_t last_best = 0;
  for (const EpochRecord& r : first.report) {
    if (r.is_best) last_best = r.epoch;
  }
  CHECK(last_best == first.best_epoch);

  // Rerunning with the epoch budget cut at the best epoch and no validation
  // set must land on exactly the parameters the first run restored.
  TrainConfig cut = cfg;
  cut.max_epochs = first.best_epoch;
  Rng rb(5);
  TrainedModel second = train(train_span, {}, cut, gcfg, c.vocab, rb);
  CHECK(second.params.flatten() == first.params.flatten());
}

TEST_CASE("without validation, training runs its full budget") {
  Corpus c = tiny_corpus();
  TrainConfig cfg;
  cfg.max_epochs = 4;
  cfg.batch_size = 2;
  Rng rng(9);
  TrainedModel m = train(c.graphs, {}, cfg, GgnnConfig{.padding = 2}, c.vocab, rng);
  CHECK(m.stopped_epoch == 4);
  CHECK(m.best_epoch == 4);
  REQUIRE(m.report.size() == 4);
  for (const EpochRecord& r : m.report) {
    CHECK(std::isnan(r.val_loss));
    CHECK(std::isfinite(r.train_cost));
  }
  CHECK(m.report.back().is_best);
}

TEST_CASE("training reduces the cost on learnable data") {
  SynthSpec spec;
  spec.num_traces = 200;
  EventLog log = generate_synthetic_log(spec, 1);
  Corpus c = encode_log(log, 8);
  TrainConfig cfg;
  cfg.max_epochs = 5;
  Rng rng(1);
  TrainedModel m = train(c.graphs, {}, cfg, GgnnConfig{}, c.vocab, rng);
  REQUIRE(m.report.size() == 5);
  for (std::size_t i = 1; i < 5; ++i) {
    CHECK(m.report[i].train_cost < m.report[i - 1].train_cost);
  }
}

TEST_CASE("divergence points at its epoch and batch") {
  Corpus c = tiny_corpus();
  GgnnParams bad = GgnnParams::zeros(c.vocab.size() + 2, 5, ReadoutMode::literal);
  bad.w_update(0, 0) = std::numeric_limits<double>::infinity();
  TrainConfig cfg;
  cfg.max_epochs = 2;
  Rng rng(2);
  try {
    train_from(bad, c.graphs, {}, cfg, c.vocab, rng);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("epoch 1, batch 1") != std::string::npos);
  }
}

TEST_CASE("config validation rejects empty budgets") {
  Corpus c = tiny_corpus();
  Rng rng(1);
  auto attempt = [&](TrainConfig cfg) {
    Rng r(1);
    return train(c.graphs, {}, cfg, GgnnConfig{.padding = 2}, c.vocab, r);
  };
  TrainConfig cfg;
  cfg.max_epochs = 0;
  CHECK_THROWS_AS(attempt(cfg), ConfigError);
  cfg = TrainConfig{};
  cfg.batch_size = 0;
  CHECK_THROWS_AS(attempt(cfg), ConfigError);
  cfg = TrainConfig{};
  cfg.patience = 0;
  CHECK_THROWS_AS(attempt(cfg), ConfigError);
  cfg = TrainConfig{};
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(attempt(cfg), ConfigError);
  cfg = TrainConfig{};
  CHECK_THROWS_AS(
      train(std::span<const EncodedGraph>{}, {}, cfg, GgnnConfig{}, c.vocab, rng),
      ConfigError);
}

TEST_CASE("optimizer names round-trip") {
  CHECK(optimizer_from_name("adam") == Optimizer::adam);
  CHECK(optimizer_from_name("sgd") == Optimizer::sgd);
  CHECK(std::string(optimizer_name(Optimizer::sgd)) == "sgd");
  CHECK_THROWS_AS(optimizer_from_name("sgdm"), ConfigError);
}

TEST_CASE("training reports serialize cleanly") {
  std::vector<EpochRecord> report{
      {1, 2.0, 0.5, true},
      {2, 1.5, std::numeric_limits<double>::quiet_NaN(), false}};
  std::ostringstream out;
  write_training_report_csv(out, report);
  CHECK(out.str() == "epoch,train_cost,val_loss,is_best\n1,2,0.5,1\n2,1.5,,0\n");
}

}  // TEST_SUITE
