#include <benchmark/benchmark.h>

#include <sstream>
#include <vector>

#include "relmine/evaluation.hpp"
#include "relmine/event_log.hpp"
#include "relmine/ggnn.hpp"
#include "relmine/instance_graph.hpp"
#include "relmine/numerics.hpp"

namespace {

using namespace relmine;

struct Fixture {
  EventLog log;
  ActivityVocabulary vocab;
  std::vector<EncodedGraph> graphs;
  GgnnParams params;

  explicit Fixture(std::size_t traces) {
    SynthSpec spec;
    spec.num_traces = traces;
    spec.alphabet_size = 8;
    spec.mean_length = 6;
    log = generate_synthetic_log(spec, 7);
    vocab = build_vocabulary(log);
    GgnnConfig cfg;
    const std::size_t dim = vocab.size() + cfg.padding;
    for (const Trace& t : log.traces) {
      graphs.push_back(encode_graph(build_instance_graph(t), vocab, dim));
    }
    Rng rng(7);
    params = init_params(vocab.size(), cfg, rng);
  }
};

void BM_Propagate(benchmark::State& state) {
  const Fixture fx(64);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(propagate(fx.graphs[i % fx.graphs.size()], fx.params));
    ++i;
  }
}
BENCHMARK(BM_Propagate);

void BM_GradientsBatch32(benchmark::State& state) {
  const Fixture fx(32);
  std::vector<BatchItem> batch;
  for (const EncodedGraph& g : fx.graphs) {
    batch.push_back({&g, static_cast<double>(g.label)});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(gradients(batch, fx.params));
  }
}
BENCHMARK(BM_GradientsBatch32);

void BM_ParseCsv(benchmark::State& state) {
  const Fixture fx(256);
  std::ostringstream buffer;
  write_csv(buffer, fx.log, SchemaConfig{});
  const std::string text = buffer.str();
  for (auto _ : state) {
    std::istringstream in(text);
    benchmark::DoNotOptimize(parse_csv(in, SchemaConfig{}));
  }
}
BENCHMARK(BM_ParseCsv);

void BM_Auc(benchmark::State& state) {
  Rng rng(11);
  std::vector<double> scores;
  std::vector<int> labels;
  for (std::size_t i = 0; i < 4096; ++i) {
    scores.push_back(rng.next_double());
    labels.push_back(static_cast<int>(rng.next_below(2)));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(compute_metrics(scores, labels));
  }
}
BENCHMARK(BM_Auc);

void BM_BuildInstanceGraph(benchmark::State& state) {
  const Fixture fx(256);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        build_instance_graph(fx.log.traces[i % fx.log.traces.size()]));
    ++i;
  }
}
BENCHMARK(BM_BuildInstanceGraph);

}  // namespace

BENCHMARK_MAIN();
