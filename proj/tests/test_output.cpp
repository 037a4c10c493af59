#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "streamdist/output.hpp"

namespace streamdist {
namespace {

RunResult fake_result(std::size_t trials, std::size_t batches) {
  RunResult r;
  r.config.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    TrialResult tr;
    tr.seed = t;
    for (std::size_t b = 0; b < batches; ++b)
      tr.per_batch.push_back({b + 2, 1.0 / 3.0 + 0.01 * static_cast<double>(b + t)});
    r.trials.push_back(tr);
  }
  return r;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

TEST(EmitCsv, OneRowPerScoredBatch) {
  const auto l = lines(emit_csv(fake_result(1, 2)));
  ASSERT_EQ(l.size(), 3u);
  EXPECT_EQ(l[0], "trial,batch_index,accuracy");
  EXPECT_EQ(l[1].substr(0, 4), "0,2,");
  EXPECT_EQ(l[2].substr(0, 4), "0,3,");
}

TEST(EmitCsv, EmptyResultIsHeaderOnly) {
  EXPECT_EQ(emit_csv(fake_result(0, 0)), "trial,batch_index,accuracy\n");
}

TEST(EmitCsv, AccuracyRoundTrips) {
  const auto r = fake_result(2, 3);
  const auto l = lines(emit_csv(r));
  ASSERT_EQ(l.size(), 7u);
  for (std::size_t i = 1; i < l.size(); ++i) {
    const double v = std::stod(l[i].substr(l[i].rfind(',') + 1));
    const auto& expected = r.trials[(i - 1) / 3].per_batch[(i - 1) % 3].accuracy;
    EXPECT_NEAR(v, expected, 1e-12);
  }
}

TEST(EmitJson, RecordFields) {
  RunResult r = fake_result(2, 2);
  r.config.policy = NormalizationPolicy::full_stream;
  r.grand_mean = 0.5;
  const auto j = json::parse(emit_json(r));
  EXPECT_EQ(j.at("schema_version"), kSchemaVersion);
  EXPECT_EQ(j.at("leakage_flag"), true);
  EXPECT_EQ(j.at("config").at("norm"), "full");
  ASSERT_EQ(j.at("trials").size(), 2u);
  EXPECT_EQ(j.at("trials")[1].at("per_batch")[0].at("batch_index"), 2);
}

std::vector<AccuracyGrid> fixture_grids() {
  std::ifstream in(std::string(STREAMDIST_FIXTURE_DIR) + "/real_datasets_grids.json");
  return grids_from_json(json::parse(in));
}

TEST(EmitTables, VictoryLines) {
  const auto out = emit_tables(fixture_grids());
  EXPECT_NE(out.text.find("Number of Victories of Normalization Approaches (Full not included)\n"
                          "Original        3\n"
                          "First Batch     2\n"
                          "Previous Batch  0\n"),
            std::string::npos)
      << out.text;
  EXPECT_NE(out.text.find("Canberra        7"), std::string::npos);
  EXPECT_EQ(out.data.at("grids").size(), 5u);
}

TEST(EmitTables, MeansMatchPrintedValues) {
  const auto out = emit_tables(fixture_grids());
  EXPECT_NE(out.text.find("0.713"), std::string::npos);
}

TEST(EmitTables, SingleCellGrid) {
  AccuracyGrid g;
  g.dataset_name = "one";
  g.rows = {DistanceKind::cosine};
  g.cols = {NormalizationPolicy::original};
  g.cells = {0.8};
  const std::vector<AccuracyGrid> gs{g};
  const auto out = emit_tables(gs);
  EXPECT_NE(out.text.find("Original        1"), std::string::npos);
  EXPECT_NE(out.text.find("0.800"), std::string::npos);
}

TEST(EmitTables, RejectsOutOfRangeCells) {
  AccuracyGrid g;
  g.rows = {DistanceKind::cosine};
  g.cols = {NormalizationPolicy::original};
  g.cells = {1.2};
  const std::vector<AccuracyGrid> gs{g};
  EXPECT_THROW(emit_tables(gs), std::invalid_argument);
}

TEST(GridJson, RoundTrip) {
  for (const auto& g : fixture_grids()) {
    const auto back = grid_from_json(to_json(g));
    EXPECT_EQ(back.dataset_name, g.dataset_name);
    EXPECT_EQ(back.rows, g.rows);
    EXPECT_EQ(back.cols, g.cols);
    EXPECT_EQ(back.cells, g.cells);
  }
  EXPECT_THROW(grid_from_json(json::parse(R"({"rows":["euclid"],"cols":["none"],"cells":[[0.5]]})")),
               std::invalid_argument);
  EXPECT_THROW(grid_from_json(json::parse(R"({"rows":["cosine"],"cols":["none"],"cells":[[0.5,0.1]]})")),
               std::invalid_argument);
}

}  // namespace
}  // namespace streamdist
