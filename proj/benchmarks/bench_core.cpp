#include <benchmark/benchmark.h>

#include "lexda/app/pipeline.hpp"
#include "lexda/autodiff/ops.hpp"
#include "lexda/corpus/batching.hpp"
#include "lexda/corpus/synthetic.hpp"
#include "lexda/eval/metrics.hpp"

using namespace lexda;

namespace {

ad::Tensor filled_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  ad::Tensor t({rows, cols});
  for (auto& v : t.values()) v = uniform(rng, -1, 1);
  return t;
}

void BM_MatmulBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = filled_matrix(n, n, 1), b = filled_matrix(n, n, 2);
  for (auto _ : state) {
    ad::Graph g;
    const auto x = g.variable(a);
    auto grads = g.backward(ad::sum(ad::tanh(ad::matmul(x, g.constant(b)))));
    benchmark::DoNotOptimize(grads[x]);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MatmulBackward)->RangeMultiplier(2)->Range(16, 128)->Complexity();

void BM_Softmax(benchmark::State& state) {
  const auto x = filled_matrix(64, static_cast<std::size_t>(state.range(0)), 3);
  ad::Graph g(ad::GradMode::disabled);
  for (auto _ : state) benchmark::DoNotOptimize(ad::softmax(g.constant(x)).value());
}
BENCHMARK(BM_Softmax)->Arg(16)->Arg(128)->Arg(1024);

// one epoch of the default model on 32 synthetic examples, setup included
void BM_TrainEpoch(benchmark::State& state) {
  app::RunConfig config;
  config.model.variant = state.range(0) == 0 ? model::Variant::base : model::Variant::base_da;
  config.data.synthetic.per_domain = 16;
  config.plan.epochs = 1;
  config.epochs = 1;
  const auto data = app::load_run_data(config);
  for (auto _ : state) benchmark::DoNotOptimize(app::train(config, data).report.epochs.size());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.train.size()));
}
BENCHMARK(BM_TrainEpoch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_MakeBatches(benchmark::State& state) {
  corpus::SyntheticSpec spec;
  spec.per_domain = static_cast<std::size_t>(state.range(0));
  const auto examples = corpus::gen_synthetic_domains(spec, 4);
  const auto vocab = corpus::build_vocabularies(examples);
  const auto labels = corpus::LabelSet::from_examples(examples);
  for (auto _ : state) benchmark::DoNotOptimize(corpus::make_batches(examples, vocab, labels, 32, 7));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(examples.size()));
}
BENCHMARK(BM_MakeBatches)->Arg(100)->Arg(1000);

void BM_Pearson(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(5);
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = uniform01(rng);
    b[i] = a[i] + 0.1 * standard_normal(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(eval::pearson(a, b));
}
BENCHMARK(BM_Pearson)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
