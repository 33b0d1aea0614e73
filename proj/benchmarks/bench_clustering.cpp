#include <benchmark/benchmark.h>

#include "cdel/clustering.hpp"
#include "cdel/random.hpp"
#include "cdel/validity.hpp"

namespace {

cdel::EmbeddingMatrix cloud(int n, int dim, std::uint64_t seed) {
  cdel::Rng rng(seed);
  Eigen::MatrixXd x(n, dim);
  for (int i = 0; i < n; ++i) {
    // A handful of loose groups so the sweep sees a real curve.
    const double shift = static_cast<double>(i % 8) * 3.0;
    for (int j = 0; j < dim; ++j) x(i, j) = shift + rng.normal();
  }
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) ids.push_back("b" + std::to_string(i));
  return {std::move(ids), std::move(x)};
}

void BM_Distances(benchmark::State& state) {
  const auto emb = cloud(static_cast<int>(state.range(0)), 128, 1);
  for (auto _ : state) benchmark::DoNotOptimize(cdel::pairwise_distances(emb));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Distances)->RangeMultiplier(2)->Range(128, 1024)->Complexity();

void BM_Linkage(benchmark::State& state) {
  const auto dm = cdel::pairwise_distances(cloud(static_cast<int>(state.range(0)), 16, 2));
  const auto linkage = static_cast<cdel::Linkage>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(cdel::build_linkage(dm, linkage));
  state.SetLabel(std::string(cdel::linkage_name(linkage)));
}
BENCHMARK(BM_Linkage)->ArgsProduct({{256, 1024}, {0, 1, 2}});

void BM_Sweep(benchmark::State& state) {
  const auto emb = cloud(static_cast<int>(state.range(0)), 16, 3);
  const auto dm = cdel::pairwise_distances(emb);
  for (auto _ : state) benchmark::DoNotOptimize(cdel::sweep_thresholds(dm, emb, cdel::Linkage::single, 1));
}
BENCHMARK(BM_Sweep)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_Indices(benchmark::State& state) {
  const auto emb = cloud(static_cast<int>(state.range(0)), 16, 4);
  const auto dm = cdel::pairwise_distances(emb);
  const auto assign = cdel::kmeans_cluster(emb, 8, 1);
  for (auto _ : state) benchmark::DoNotOptimize(cdel::score_partition(dm, emb, assign));
}
BENCHMARK(BM_Indices)->Arg(256)->Arg(1024);

void BM_KMeans(benchmark::State& state) {
  const auto emb = cloud(static_cast<int>(state.range(0)), 16, 5);
  for (auto _ : state) benchmark::DoNotOptimize(cdel::kmeans_cluster(emb, 8, 1));
}
BENCHMARK(BM_KMeans)->Arg(256)->Arg(1024);

}  // namespace
