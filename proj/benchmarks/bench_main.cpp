#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "cardl/alignment.hpp"
#include "cardl/evaluation.hpp"
#include "cardl/mlp.hpp"
#include "cardl/retrieval.hpp"
#include "cardl/synthetic.hpp"

namespace {

cardl::UnifiedIndex random_index(std::size_t n, std::size_t dim) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<cardl::IndexEntry> items;
  for (std::size_t i = 0; i < n; ++i) {
    cardl::Vector v(dim);
    for (double& x : v) x = normal(rng);
    items.push_back({"e" + std::to_string(i),
                     i % 2 == 0 ? cardl::Modality::kText : cardl::Modality::kImage, v});
  }
  return cardl::UnifiedIndex::build(std::move(items));
}

void BM_QueryTopK(benchmark::State& state) {
  const auto index = random_index(static_cast<std::size_t>(state.range(0)), 64);
  const cardl::Vector q = index.entries().front().vector;
  for (auto _ : state) {
    auto results = cardl::query_topk(index, q, 10, cardl::Modality::kImage);
    benchmark::DoNotOptimize(results);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_QueryTopK)->Arg(1000)->Arg(10000);

void BM_MlpForward(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const std::vector<std::size_t> dims{192, 256, 64};
  const auto params = cardl::init_mlp(dims, rng);
  cardl::Matrix batch(32, 192, 0.5);
  for (auto _ : state) {
    auto out = cardl::mlp_apply(params, batch);
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_MlpForward);

void BM_AlignmentStep(benchmark::State& state) {
  cardl::SyntheticConfig config;
  config.pairs_per_cluster = 4;
  const auto data = cardl::generate_synthetic(config);
  cardl::TrainConfig train;
  const auto model = cardl::init_alignment_model(config.text_dim, config.image_dim, train);
  const cardl::FeatureSet text(cardl::Modality::kText, data.text);
  const cardl::FeatureSet image(cardl::Modality::kImage, data.image);
  std::vector<std::string> text_ids, image_ids;
  std::vector<std::optional<std::string>> labels;
  for (const auto& p : data.pairs) {
    text_ids.push_back(p.text_id);
    image_ids.push_back(p.image_id);
    labels.push_back(p.label);
  }
  const auto tb = text.gather(text_ids);
  const auto ib = image.gather(image_ids);
  const auto targets = cardl::batch_targets(labels);
  for (auto _ : state) {
    auto step = cardl::alignment_loss_and_grad(model, tb, ib, targets);
    benchmark::DoNotOptimize(step);
  }
}
BENCHMARK(BM_AlignmentStep);

void BM_AveragePrecision(benchmark::State& state) {
  std::vector<bool> flags(100);
  for (std::size_t i = 0; i < flags.size(); i += 3) flags[i] = true;
  for (auto _ : state) benchmark::DoNotOptimize(cardl::average_precision(flags, 40));
}
BENCHMARK(BM_AveragePrecision);

}  // namespace
BENCHMARK_MAIN();
