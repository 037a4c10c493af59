#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "streamdist/output.hpp"
#include "streamdist/report.hpp"

namespace streamdist {
namespace {

std::vector<AccuracyGrid> fixture_grids() {
  std::ifstream in(std::string(STREAMDIST_FIXTURE_DIR) + "/real_datasets_grids.json");
  return grids_from_json(json::parse(in));
}

TEST(Victories, NormalizationOnFixture) {
  const auto grids = fixture_grids();
  ASSERT_EQ(grids.size(), 5u);
  const auto v = victories_by_normalization(grids);
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v[0].policy, NormalizationPolicy::original);
  EXPECT_EQ(v[0].victories, 3u);
  EXPECT_EQ(v[1].victories, 2u);
  EXPECT_EQ(v[2].victories, 0u);
}

TEST(Victories, DistanceOnFixture) {
  const auto v = victories_by_distance(fixture_grids());
  const std::map<DistanceKind, std::size_t> expected{
      {DistanceKind::euclidean, 0},   {DistanceKind::manhattan, 4},
      {DistanceKind::cosine, 1},      {DistanceKind::chebyshev, 2},
      {DistanceKind::mahalanobis, 1}, {DistanceKind::std_euclidean, 0},
      {DistanceKind::minkowski, 2},   {DistanceKind::canberra, 7}};
  ASSERT_EQ(v.size(), 8u);
  for (const auto& d : v) EXPECT_EQ(d.victories, expected.at(d.kind)) << to_string(d.kind);
}

AccuracyGrid tiny(std::vector<double> cells, std::size_t rows = 2) {
  AccuracyGrid g;
  g.dataset_name = "t";
  for (std::size_t r = 0; r < rows; ++r) g.rows.push_back(kAllDistances[r]);
  g.cols.assign(kAllPolicies.begin(), kAllPolicies.end());
  g.cells = std::move(cells);
  return g;
}

TEST(Victories, TiesCreditEveryWinner) {
  const std::vector<AccuracyGrid> gs{tiny({0.5, 0.5, 0.4, 0.99, 0.7, 0.7, 0.7, 0.99})};
  const auto n = victories_by_normalization(gs);
  EXPECT_EQ(n[0].victories, 1u);
  EXPECT_EQ(n[1].victories, 1u);
  EXPECT_EQ(n[2].victories, 0u);
  const auto d = victories_by_distance(gs);
  EXPECT_EQ(d[0].victories, 0u);  // full column is ignored
  EXPECT_EQ(d[1].victories, 3u);
}

TEST(Victories, FullColumnNeverCounts) {
  const std::vector<AccuracyGrid> gs{tiny({0.1, 0.2, 0.3, 1.0, 0.1, 0.2, 0.3, 1.0})};
  EXPECT_EQ(victories_by_normalization(gs)[2].victories, 1u);
}

TEST(Victories, RejectBadInput) {
  EXPECT_THROW(victories_by_normalization({}), std::invalid_argument);
  const std::vector<AccuracyGrid> bad{tiny({0.1, 0.2, 1.3, 0.4, 0.1, 0.2, 0.3, 0.4})};
  EXPECT_THROW(victories_by_distance(bad), std::invalid_argument);
  const std::vector<AccuracyGrid> short_grid{tiny({0.1, 0.2})};
  EXPECT_THROW(victories_by_normalization(short_grid), std::invalid_argument);
}

TEST(DistanceMeans, FixtureExamples) {
  const auto grids = fixture_grids();
  const auto elec = mean_by_distance(grids[0]);
  EXPECT_EQ(elec[0].kind, DistanceKind::euclidean);
  EXPECT_DOUBLE_EQ(round_half_even(elec[0].mean), 0.713);
  const auto gas = mean_by_distance(grids[4]);
  EXPECT_EQ(gas[2].kind, DistanceKind::cosine);
  EXPECT_DOUBLE_EQ(round_half_even(gas[2].mean), 0.602);
}

TEST(DistanceMeans, ExcludesFullColumn) {
  const auto m = mean_by_distance(tiny({0.3, 0.6, 0.9, 0.0, 0.1, 0.1, 0.1, 1.0}));
  EXPECT_NEAR(m[0].mean, 0.6, 1e-15);
  EXPECT_NEAR(m[1].mean, 0.1, 1e-15);
}

TEST(RoundHalfEven, Examples) {
  EXPECT_DOUBLE_EQ(round_half_even(0.7125), 0.712);
  EXPECT_DOUBLE_EQ(round_half_even(0.7135), 0.714);
  EXPECT_DOUBLE_EQ(round_half_even(0.71251), 0.713);
  EXPECT_DOUBLE_EQ(round_half_even(0.5, 0), 0.0);
  EXPECT_DOUBLE_EQ(round_half_even(1.5, 0), 2.0);
}

TEST(TukeyBox, OneToNine) {
  const std::vector<double> v{9, 1, 8, 2, 7, 3, 6, 4, 5};
  const auto b = tukey_box(v);
  EXPECT_EQ(b.median, 5.0);
  EXPECT_EQ(b.q1, 3.0);
  EXPECT_EQ(b.q3, 7.0);
  EXPECT_EQ(b.whisker_low, 1.0);
  EXPECT_EQ(b.whisker_high, 9.0);
  EXPECT_TRUE(b.outliers.empty());
  EXPECT_EQ(b.count, 9u);
}

TEST(TukeyBox, ConstantChunk) {
  const auto b = tukey_box(std::vector<double>{4, 4, 4, 4});
  EXPECT_EQ(b.median, 4.0);
  EXPECT_EQ(b.q1, 4.0);
  EXPECT_EQ(b.q3, 4.0);
  EXPECT_EQ(b.whisker_low, 4.0);
  EXPECT_EQ(b.whisker_high, 4.0);
  EXPECT_TRUE(b.outliers.empty());
}

TEST(TukeyBox, FarPointIsOutlier) {
  const auto b = tukey_box(std::vector<double>{1, 2, 3, 4, 100});
  EXPECT_EQ(b.outliers, (std::vector<double>{100}));
  EXPECT_EQ(b.whisker_high, 4.0);
  EXPECT_EQ(b.whisker_low, 1.0);
  EXPECT_THROW(tukey_box(std::vector<double>{}), std::invalid_argument);
}

TEST(TukeyBox, PermutationInvariantAndOrdered) {
  std::mt19937_64 rng(3);
  std::lognormal_distribution<double> d(0, 1);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> v(1 + rng() % 200);
    for (double& x : v) x = d(rng);
    const auto a = tukey_box(v);
    std::shuffle(v.begin(), v.end(), rng);
    const auto b = tukey_box(v);
    EXPECT_EQ(a.median, b.median);
    EXPECT_EQ(a.outliers, b.outliers);
    EXPECT_LE(a.whisker_low, a.q1);
    EXPECT_LE(a.q1, a.median);
    EXPECT_LE(a.median, a.q3);
    EXPECT_LE(a.q3, a.whisker_high);
  }
}

Dataset columns(std::size_t n, std::vector<double> scales) {
  Dataset ds;
  ds.feature_count = scales.size();
  std::mt19937_64 rng(n);
  std::normal_distribution<double> g(0, 1);
  for (std::size_t i = 0; i < n; ++i) {
    Instance inst;
    for (double s : scales) inst.features.push_back(s * g(rng));
    ds.instances.push_back(inst);
  }
  return ds;
}

TEST(BoxplotStats, ChunksCoverTheStream) {
  const Dataset ds = columns(1005, {1.0});
  const auto boxes = boxplot_stats(ds, 0, 10);
  ASSERT_EQ(boxes.size(), 10u);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(boxes[i].count, 100u);
  EXPECT_EQ(boxes[9].count, 105u);
  EXPECT_EQ(boxes[9].batch_index, 10u);
  EXPECT_THROW(boxplot_stats(ds, 1, 10), std::invalid_argument);
  EXPECT_THROW(boxplot_stats(ds, 0, 0), std::invalid_argument);
  EXPECT_THROW(boxplot_stats(columns(5, {1.0}), 0, 10), std::invalid_argument);
}

TEST(TopStdFeature, Examples) {
  EXPECT_EQ(top_std_feature(columns(500, {1.0, 30.0, 2.0})), 1u);
  Dataset tie;
  tie.feature_count = 2;
  tie.instances = {{{0, 5}, 0}, {{2, 7}, 0}};
  EXPECT_EQ(top_std_feature(tie), 0u);
}

TEST(TopStdFeature, MatchesBruteForce) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> s(0.1, 10);
  for (int rep = 0; rep < 30; ++rep) {
    const Dataset ds = columns(50 + rep, {s(rng), s(rng), s(rng), s(rng)});
    std::size_t best = 0;
    double best_sd = -1;
    for (std::size_t j = 0; j < 4; ++j) {
      double m = 0;
      for (const auto& x : ds.instances) m += x.features[j];
      m /= ds.size();
      double ss = 0;
      for (const auto& x : ds.instances) ss += (x.features[j] - m) * (x.features[j] - m);
      const double sd = std::sqrt(ss / (ds.size() - 1));
      if (sd > best_sd) best_sd = sd, best = j;
    }
    EXPECT_EQ(top_std_feature(ds), best);
  }
}

}  // namespace
}  // namespace streamdist
