#include <gtest/gtest.h>

#include <random>

#include "streamdist/scaling.hpp"

namespace streamdist {
namespace {

using Vec = std::vector<double>;

std::vector<Instance> rows(const std::vector<Vec>& xs) {
  std::vector<Instance> out;
  for (const auto& x : xs) out.push_back({x, 0});
  return out;
}

TEST(FitMinmax, Examples) {
  const auto m = fit_minmax(rows({{2}, {6}, {10}}));
  EXPECT_EQ(m.mins[0], 2.0);
  EXPECT_EQ(m.maxs[0], 10.0);
  const auto single = fit_minmax(rows({{1, -3}}));
  EXPECT_EQ(single.mins, single.maxs);
  EXPECT_EQ(single.mins, (Vec{1, -3}));
  const auto twin = fit_minmax(rows({{4, 5}, {4, 5}}));
  EXPECT_EQ(twin.mins, twin.maxs);
  EXPECT_THROW(fit_minmax({}), std::invalid_argument);
}

TEST(Transform, Examples) {
  const auto m = fit_minmax(rows({{2}, {10}}));
  EXPECT_EQ(transform(m, Vec{2})[0], 0.0);
  EXPECT_EQ(transform(m, Vec{10})[0], 1.0);
  EXPECT_EQ(transform(m, Vec{6})[0], 0.5);
  EXPECT_EQ(transform(m, Vec{14})[0], 1.5);  // no clamping
  EXPECT_EQ(transform(m, Vec{-6})[0], -1.0);
}

TEST(Transform, ConstantFeatureMapsToZero) {
  const auto m = fit_minmax(rows({{5}, {5}}));
  EXPECT_EQ(transform(m, Vec{5})[0], 0.0);
  EXPECT_EQ(transform(m, Vec{7})[0], 0.0);
}

TEST(Transform, DimensionMismatch) {
  const auto m = fit_minmax(rows({{1, 2}}));
  EXPECT_THROW(transform(m, Vec{1}), std::invalid_argument);
}

std::vector<Instance> random_rows(std::mt19937_64& rng, std::size_t count, std::size_t n) {
  std::uniform_real_distribution<double> u(-50, 50);
  std::vector<Instance> out(count);
  for (auto& inst : out) {
    inst.features.resize(n);
    for (double& v : inst.features) v = u(rng);
  }
  return out;
}

TEST(ScalingProperties, FitTransformSpansUnitInterval) {
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 1 + rng() % 8;
    auto data = random_rows(rng, 2 + rng() % 100, n);
    if (rep % 5 == 0)
      for (auto& inst : data) inst.features[0] = 3.0;  // constant column
    const auto m = fit_minmax(data);
    const auto t = transform(m, data);
    for (std::size_t j = 0; j < n; ++j) {
      double lo = t[0].features[j], hi = lo;
      for (const auto& inst : t) {
        lo = std::min(lo, inst.features[j]);
        hi = std::max(hi, inst.features[j]);
      }
      if (m.maxs[j] == m.mins[j]) {
        EXPECT_EQ(lo, 0.0);
        EXPECT_EQ(hi, 0.0);
      } else {
        EXPECT_NEAR(lo, 0.0, 1e-12);
        EXPECT_NEAR(hi, 1.0, 1e-12);
      }
    }
  }
}

TEST(ScalingProperties, TransformIsAffine) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> a01(0, 1);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 1 + rng() % 6;
    const auto m = fit_minmax(random_rows(rng, 20, n));
    const auto pts = random_rows(rng, 2, n);
    const double a = a01(rng);
    Vec mix(n);
    for (std::size_t j = 0; j < n; ++j)
      mix[j] = a * pts[0].features[j] + (1 - a) * pts[1].features[j];
    const auto tm = transform(m, mix);
    const auto tx = transform(m, pts[0].features);
    const auto ty = transform(m, pts[1].features);
    for (std::size_t j = 0; j < n; ++j)
      EXPECT_NEAR(tm[j], a * tx[j] + (1 - a) * ty[j], 1e-9 * (1 + std::abs(tm[j])));
  }
}

struct Stream {
  std::vector<Instance> data;
  std::vector<Batch> batches;
};

Stream make_stream(std::uint64_t seed, std::size_t nbatches, std::size_t bs = 20) {
  std::mt19937_64 rng(seed);
  Stream s;
  s.data = random_rows(rng, nbatches * bs, 3);
  for (std::size_t i = 0; i < s.data.size(); ++i) s.data[i].label = static_cast<Label>(i % 2);
  s.batches = batchify(std::span<const Instance>(s.data), bs);
  return s;
}

TEST(PrepareViews, OriginalIsIdentity) {
  const auto s = make_stream(3, 5);
  for (std::size_t t = 2; t <= 5; ++t) {
    const auto v = prepare_views(NormalizationPolicy::original, s.batches, t);
    EXPECT_FALSE(v.scaler.has_value());
    EXPECT_FALSE(v.leakage);
    EXPECT_TRUE(std::equal(v.train.begin(), v.train.end(), s.batches[t - 2].instances.begin()));
    EXPECT_TRUE(std::equal(v.test.begin(), v.test.end(), s.batches[t - 1].instances.begin()));
  }
}

TEST(PrepareViews, PreviousBatchFitsOnBatchTMinusOne) {
  const auto s = make_stream(4, 5);
  const auto v = prepare_views(NormalizationPolicy::previous_batch, s.batches, 2);
  ASSERT_TRUE(v.scaler);
  EXPECT_EQ(v.scaler->fitted_on.source, ScalerProvenance::Source::previous_batch);
  EXPECT_EQ(v.scaler->fitted_on.batch_index, 1u);
  for (std::size_t j = 0; j < 3; ++j) {
    double lo = 1e9, hi = -1e9;
    for (const auto& inst : v.train) {
      lo = std::min(lo, inst.features[j]);
      hi = std::max(hi, inst.features[j]);
    }
    EXPECT_NEAR(lo, 0.0, 1e-12);
    EXPECT_NEAR(hi, 1.0, 1e-12);
  }
  const auto v4 = prepare_views(NormalizationPolicy::previous_batch, s.batches, 4);
  EXPECT_EQ(v4.scaler->fitted_on.batch_index, 3u);
  const auto direct = fit_minmax(s.batches[2].instances);
  EXPECT_EQ(v4.scaler->mins, direct.mins);
  EXPECT_EQ(v4.scaler->maxs, direct.maxs);
}

TEST(PrepareViews, FirstBatchScalerNormalizesBatchOneToo) {
  const auto s = make_stream(5, 4);
  const auto first = fit_minmax(s.batches[0].instances);
  for (std::size_t t = 2; t <= 4; ++t) {
    const auto v = prepare_views(NormalizationPolicy::first_batch, s.batches, t);
    EXPECT_EQ(v.scaler->mins, first.mins);
    EXPECT_EQ(v.test, transform(first, s.batches[t - 1].instances));
  }
  const auto v2 = prepare_views(NormalizationPolicy::first_batch, s.batches, 2);
  EXPECT_EQ(v2.train, transform(first, s.batches[0].instances));
}

TEST(PrepareViews, FullStreamLiesInUnitIntervalAndLeaks) {
  const auto s = make_stream(6, 6);
  for (std::size_t t = 2; t <= 6; ++t) {
    const auto v = prepare_views(NormalizationPolicy::full_stream, s.batches, t);
    EXPECT_TRUE(v.leakage);
    for (const auto* view : {&v.train, &v.test})
      for (const auto& inst : *view)
        for (double x : inst.features) {
          EXPECT_GE(x, 0.0);
          EXPECT_LE(x, 1.0);
        }
  }
  EXPECT_EQ(fit_minmax(s.data).mins,
            prepare_views(NormalizationPolicy::full_stream, s.batches, 3).scaler->mins);
}

TEST(PrepareViews, StepOutOfRange) {
  const auto s = make_stream(7, 3);
  EXPECT_THROW(prepare_views(NormalizationPolicy::original, s.batches, 1), std::out_of_range);
  EXPECT_THROW(prepare_views(NormalizationPolicy::original, s.batches, 4), std::out_of_range);
}

// Perturbing batch t+1 never changes the step-t views under the causal
// policies.
TEST(PrepareViews, PreviousBatchIsCausal) {
  auto s = make_stream(8, 6);
  const auto before = prepare_views(NormalizationPolicy::previous_batch, s.batches, 3);
  for (std::size_t i = 60; i < 80; ++i) s.data[i].features[0] *= 1000.0;  // batch 4
  const auto after = prepare_views(NormalizationPolicy::previous_batch, s.batches, 3);
  EXPECT_EQ(before.train, after.train);
  EXPECT_EQ(before.test, after.test);
  EXPECT_EQ(before.scaler->mins, after.scaler->mins);
}

}  // namespace
}  // namespace streamdist
