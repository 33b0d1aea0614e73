#include <benchmark/benchmark.h>

#include "cdel/model.hpp"
#include "cdel/random.hpp"

namespace {

struct Data {
  cdel::SampleTable samples;
  cdel::EmbeddingMatrix text;
  cdel::EmbeddingMatrix image;
};

Data synthetic(int n, int dim) {
  cdel::Rng rng(9);
  std::vector<cdel::SampleRecord> recs;
  std::vector<std::string> ids;
  Eigen::MatrixXd t(n, dim), v(n, dim);
  for (int i = 0; i < n; ++i) {
    const auto label = cdel::label_at(rng.index(3));
    ids.push_back("m" + std::to_string(i));
    recs.push_back({ids.back(), "some words here", std::nullopt, label});
    for (int j = 0; j < dim; ++j) {
      t(i, j) = rng.normal() + (j == static_cast<int>(cdel::index_of(label)) ? 1.0 : 0.0);
      v(i, j) = rng.normal();
    }
  }
  return {cdel::SampleTable(std::move(recs)), {ids, t}, {ids, v}};
}

void BM_TrainEpoch(benchmark::State& state) {
  const auto d = synthetic(static_cast<int>(state.range(0)), 64);
  const cdel::DatasetView view{&d.samples, &d.text, &d.image};
  cdel::EncoderSettings s;
  s.text_mode = cdel::TextMode::precomputed;
  s.image_mode = cdel::ImageMode::projection;
  s.use_clusters = false;
  cdel::TrainConfig cfg;
  cfg.epochs = 1;
  cfg.learning_rate = 1e-3;
  for (auto _ : state) benchmark::DoNotOptimize(cdel::train_model(view, s, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainEpoch)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

void BM_ToyTextEpoch(benchmark::State& state) {
  const auto d = synthetic(static_cast<int>(state.range(0)), 8);
  const cdel::DatasetView view{&d.samples};
  cdel::EncoderSettings s;
  s.toy_text = {256, 16, 32};
  s.use_clusters = false;
  cdel::TrainConfig cfg;
  cfg.epochs = 1;
  cfg.learning_rate = 1e-3;
  for (auto _ : state) benchmark::DoNotOptimize(cdel::train_model(view, s, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ToyTextEpoch)->Arg(512)->Unit(benchmark::kMillisecond);

}  // namespace
