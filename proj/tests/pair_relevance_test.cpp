#include <gtest/gtest.h>

#include <random>

#include "cardl/errors.hpp"
#include "cardl/pair_relevance.hpp"

namespace cardl {
namespace {

TEST(CombinePair, WorkedExamples) {
  EXPECT_EQ(combine_pair(Vector{1, 2}, Vector{1, 2}), (Vector{1, 2, 1, 2, 0, 0, 1, 2}));
  EXPECT_EQ(combine_pair(Vector{1, 0}, Vector{0, 1}), (Vector{1, 0, 0, 1, 1, 1, 1, 1}));
}

TEST(CombinePair, ShapeAndSwapSymmetry) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t d : {1u, 3u, 64u}) {
    Vector x(d), y(d);
    for (double& v : x) v = normal(rng);
    for (double& v : y) v = normal(rng);
    const Vector xy = combine_pair(x, y);
    const Vector yx = combine_pair(y, x);
    ASSERT_EQ(xy.size(), 4 * d);
    EXPECT_TRUE(std::equal(x.begin(), x.end(), xy.begin()));
    EXPECT_TRUE(std::equal(y.begin(), y.end(), xy.begin() + static_cast<long>(d)));
    EXPECT_TRUE(std::equal(xy.begin() + 2 * static_cast<long>(d), xy.end(),
                           yx.begin() + 2 * static_cast<long>(d)));
  }
  EXPECT_THROW(combine_pair(Vector{1}, Vector{1, 2}), DimensionError);
}

TEST(PredictPair, ZeroHeadIsExactlyHalf) {
  const PairHead head = zero_pair_head(3);
  EXPECT_EQ(predict_pair(head, Vector{1, 2, 3}, Vector{-1, 0, 4}), 0.5);
}

TEST(PredictPair, RangeAndDimensionCheck) {
  const PairHead head = init_pair_head(2, 5);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal(0.0, 10.0);
  for (int i = 0; i < 50; ++i) {
    const double p = predict_pair(head, Vector{normal(rng), normal(rng)},
                                  Vector{normal(rng), normal(rng)});
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
  EXPECT_THROW(predict_pair(head, Vector{1, 2, 3}, Vector{1, 2, 3}), DimensionError);
}

TEST(PairLoss, GradientMatchesFiniteDifferences) {
  for (std::size_t d : {1u, 2u, 4u}) {
    PairHead head = init_pair_head(d, 10 + d);
    for (double& b : head.mlp.layers[0].bias) b = 0.05;
    const auto examples = make_separable_pairs(6, std::max<std::size_t>(d, 2), d);
    std::vector<PairExample> trimmed;
    for (auto e : examples) {
      e.x.resize(d);
      e.y.resize(d);
      trimmed.push_back(e);
    }
    const auto analytic = pair_loss_and_grad(head, trimmed);
    const Vector numeric = finite_diff_grad(
        [&](std::span<const double> flat) {
          PairHead h = head;
          assign_params(h.mlp, flat);
          return pair_loss(h, trimmed);
        },
        flatten_params(head.mlp), 1e-6);
    EXPECT_LT(max_relative_error(flatten_grads(analytic.grads), numeric), 1e-4) << "d=" << d;
  }
}

TEST(FitPairHead, SeparableToySet) {
  const auto examples = make_separable_pairs(200, 8, 7);
  // Distance threshold oracle: positives at distance 0, negatives at sqrt(2).
  for (const auto& e : examples) {
    double dist = 0.0;
    for (std::size_t i = 0; i < e.x.size(); ++i) dist += (e.x[i] - e.y[i]) * (e.x[i] - e.y[i]);
    EXPECT_EQ(std::sqrt(dist) < 0.7, e.relevant);
  }
  TrainConfig config;
  config.epochs = 100;
  config.seed = 7;
  const PairHead head = fit_pair_head(examples, config);
  EXPECT_GE(pair_accuracy(head, examples), 0.95);
  for (const auto& e : examples) {
    if (e.relevant) EXPECT_GT(predict_pair(head, e.x, e.y), 0.5);
  }
}

TEST(FitPairHead, DeterministicGivenSeed) {
  const auto examples = make_separable_pairs(40, 4, 3);
  TrainConfig config;
  config.epochs = 5;
  EXPECT_EQ(fit_pair_head(examples, config), fit_pair_head(examples, config));
}

TEST(FitPairHead, SingleClassIsDataError) {
  auto examples = make_separable_pairs(10, 4, 3);
  std::erase_if(examples, [](const PairExample& e) { return !e.relevant; });
  EXPECT_THROW(fit_pair_head(examples, TrainConfig{}), DataError);
}

TEST(SampleNegativePairs, NeverReusesOwnPartner) {
  std::vector<PairExample> positives;
  for (int i = 0; i < 20; ++i) {
    positives.push_back({Vector{double(i)}, Vector{double(i)}, true});
  }
  const auto negatives = sample_negative_pairs(positives, 9);
  ASSERT_EQ(negatives.size(), positives.size());
  for (const auto& n : negatives) {
    EXPECT_FALSE(n.relevant);
    EXPECT_NE(n.x[0], n.y[0]);
  }
  EXPECT_EQ(sample_negative_pairs(positives, 9)[3].y, negatives[3].y);
}

}  // namespace
}  // namespace cardl
