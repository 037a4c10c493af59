#pragma once

// Machine-readable output: per-run JSON records, per-batch CSV series,
// accuracy-grid JSON and the aggregation tables as aligned text.

#include <cstdio>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "streamdist/harness.hpp"
#include "streamdist/report.hpp"

namespace streamdist {

inline constexpr int kSchemaVersion = 1;

using json = nlohmann::ordered_json;

inline json to_json(const SeaConfig& c) {
  json schedules = json::array();
  for (const auto& s : c.schedules) {
    json segs = json::array();
    for (const auto& seg : s.segments)
      segs.push_back({{"start", seg.start_instance}, {"end", seg.end_instance},
                      {"multiplier", seg.multiplier}});
    schedules.push_back({{"feature_index", s.feature_index}, {"segments", segs}});
  }
  return {{"generator", "sea"},   {"n_instances", c.n_instances}, {"threshold", c.threshold},
          {"low", c.low},         {"high", c.high},               {"schedules", schedules}};
}

inline json to_json(const RunConfig& c) {
  json source;
  if (const auto* sea = std::get_if<SeaConfig>(&c.source)) {
    source = to_json(*sea);
  } else {
    const auto& ds = std::get<std::shared_ptr<const Dataset>>(c.source);
    source = {{"dataset", ds ? ds->name : ""},
              {"instances", ds ? ds->size() : 0},
              {"features", ds ? ds->feature_count : 0},
              {"classes", ds ? ds->class_count : 0}};
  }
  json spec = {{"distance", to_string(c.spec.kind)}};
  if (c.spec.kind == DistanceKind::minkowski) spec["p"] = c.spec.p;
  return {{"source", source},
          {"batch_size", c.batch_size},
          {"k", c.k},
          {"spec", spec},
          {"norm", to_string(c.policy)},
          {"mode", to_string(c.retrain)},
          {"trials", c.trials},
          {"seed", c.base_seed}};
}

/// Summary record of one run. `leakage_flag` is always present.
inline json output_record(const RunResult& r) {
  json trials = json::array();
  for (const auto& t : r.trials) {
    json series = json::array();
    for (const auto& b : t.per_batch)
      series.push_back({{"batch_index", b.batch_index}, {"accuracy", b.accuracy}});
    trials.push_back({{"seed", t.seed}, {"mean_accuracy", t.mean_accuracy}, {"per_batch", series}});
  }
  return {{"schema_version", kSchemaVersion},
          {"config", to_json(r.config)},
          {"grand_mean", r.grand_mean},
          {"grand_std", r.grand_std},
          {"leakage_flag", r.leakage_flag()},
          {"warnings", r.warnings},
          {"trials", trials}};
}

inline std::string emit_json(const RunResult& r) { return output_record(r).dump(2) + "\n"; }

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// `trial,batch_index,accuracy`, one row per scored batch, trials in order.
inline std::string emit_csv(const RunResult& r) {
  std::string out = "trial,batch_index,accuracy\n";
  for (std::size_t t = 0; t < r.trials.size(); ++t)
    for (const auto& b : r.trials[t].per_batch)
      out += std::to_string(t) + "," + std::to_string(b.batch_index) + "," +
             format_real(b.accuracy) + "\n";
  return out;
}

inline json to_json(const AccuracyGrid& g) {
  json rows = json::array(), cols = json::array(), cells = json::array();
  for (auto k : g.rows) rows.push_back(to_string(k));
  for (auto p : g.cols) cols.push_back(to_string(p));
  for (std::size_t r = 0; r < g.rows.size(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < g.cols.size(); ++c) row.push_back(g.at(r, c));
    cells.push_back(row);
  }
  return {{"dataset", g.dataset_name}, {"rows", rows}, {"cols", cols}, {"cells", cells}};
}

inline AccuracyGrid grid_from_json(const json& j) {
  AccuracyGrid g;
  g.dataset_name = j.value("dataset", std::string{});
  for (const auto& r : j.at("rows")) {
    const auto s = r.get<std::string>();
    auto k = parse_distance_kind(s);
    if (!k) throw std::invalid_argument("unknown distance '" + s + "' in grid");
    g.rows.push_back(*k);
  }
  for (const auto& c : j.at("cols")) {
    const auto s = c.get<std::string>();
    auto p = parse_policy(s);
    if (!p) throw std::invalid_argument("unknown normalization '" + s + "' in grid");
    g.cols.push_back(*p);
  }
  const auto& cells = j.at("cells");
  if (cells.size() != g.rows.size())
    throw std::invalid_argument("grid '" + g.dataset_name + "' has the wrong number of rows");
  for (const auto& row : cells) {
    if (row.size() != g.cols.size())
      throw std::invalid_argument("grid '" + g.dataset_name + "' has a ragged row");
    for (const auto& v : row) g.cells.push_back(v.get<double>());
  }
  g.validate();
  return g;
}

/// Accepts a single grid object, an array of grids, or a sweep record
/// carrying a "grid" member.
inline std::vector<AccuracyGrid> grids_from_json(const json& j) {
  std::vector<AccuracyGrid> out;
  if (j.is_array()) {
    for (const auto& g : j) {
      auto more = grids_from_json(g);
      out.insert(out.end(), more.begin(), more.end());
    }
  } else if (j.contains("grid")) {
    out.push_back(grid_from_json(j.at("grid")));
  } else {
    out.push_back(grid_from_json(j));
  }
  return out;
}

/// Record for a distance x policy sweep on one source.
inline json sweep_record(const SweepGrid& sweep, const std::string& dataset_name) {
  json cells = json::array();
  for (std::size_t r = 0; r < sweep.specs.size(); ++r)
    for (std::size_t c = 0; c < sweep.policies.size(); ++c) {
      const auto& cell = sweep.at(r, c);
      json spec = {{"distance", to_string(sweep.specs[r].kind)}};
      if (sweep.specs[r].kind == DistanceKind::minkowski) spec["p"] = sweep.specs[r].p;
      cells.push_back({{"spec", spec},
                       {"norm", to_string(sweep.policies[c])},
                       {"grand_mean", cell.grand_mean},
                       {"grand_std", cell.grand_std},
                       {"leakage_flag", cell.leakage_flag()}});
    }
  std::vector<std::string> warnings;
  if (!sweep.cells.empty()) warnings = sweep.cells.front().warnings;
  json base = sweep.cells.empty() ? json::object() : to_json(sweep.cells.front().config);
  base.erase("spec");
  base.erase("norm");
  return {{"schema_version", kSchemaVersion},
          {"config", base},
          {"grid", to_json(to_accuracy_grid(sweep, dataset_name))},
          {"warnings", warnings},
          {"cells", cells}};
}

/// `distance,norm,grand_mean,grand_std,leakage_flag` rows.
inline std::string sweep_csv(const SweepGrid& sweep) {
  std::string out = "distance,norm,grand_mean,grand_std,leakage_flag\n";
  for (std::size_t r = 0; r < sweep.specs.size(); ++r)
    for (std::size_t c = 0; c < sweep.policies.size(); ++c) {
      const auto& cell = sweep.at(r, c);
      out += std::string(to_string(sweep.specs[r].kind)) + "," +
             std::string(to_string(sweep.policies[c])) + "," + format_real(cell.grand_mean) + "," +
             format_real(cell.grand_std) + "," + (cell.leakage_flag() ? "true" : "false") + "\n";
    }
  return out;
}

inline std::string boxplot_csv(std::span<const BoxStats> boxes) {
  std::string out = "batch_index,count,median,q1,q3,whisker_low,whisker_high,outliers\n";
  for (const auto& b : boxes) {
    std::string outl;
    for (std::size_t i = 0; i < b.outliers.size(); ++i)
      outl += (i ? ";" : "") + format_real(b.outliers[i]);
    out += std::to_string(b.batch_index) + "," + std::to_string(b.count) + "," +
           format_real(b.median) + "," + format_real(b.q1) + "," + format_real(b.q3) + "," +
           format_real(b.whisker_low) + "," + format_real(b.whisker_high) + "," + outl + "\n";
  }
  return out;
}

inline json boxplot_json(std::span<const BoxStats> boxes, const std::string& dataset,
                         std::size_t feature_index) {
  json rows = json::array();
  for (const auto& b : boxes)
    rows.push_back({{"batch_index", b.batch_index}, {"count", b.count},    {"median", b.median},
                    {"q1", b.q1},                   {"q3", b.q3},          {"whisker_low", b.whisker_low},
                    {"whisker_high", b.whisker_high}, {"outliers", b.outliers}});
  return {{"schema_version", kSchemaVersion},
          {"dataset", dataset},
          {"feature_index", feature_index},
          {"boxes", rows}};
}

struct TablesOutput {
  std::string text;
  json data;
};

namespace detail {

inline std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", round_half_even(v, 3));
  return buf;
}

inline std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

inline std::string lpad(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

}  // namespace detail

/// Accuracy grids, normalization and distance victory counts, and the
/// per-distance averages. Values are rounded half-to-even at 3 decimals for
/// display only.
inline TablesOutput emit_tables(std::span<const AccuracyGrid> grids) {
  for (const auto& g : grids) g.validate();
  TablesOutput out;
  std::ostringstream text;
  json grids_json = json::array();

  for (const auto& g : grids) {
    grids_json.push_back(to_json(g));
    text << "Accuracies: " << g.dataset_name << "\n";
    text << detail::pad("", 12);
    for (auto p : g.cols) text << detail::lpad(std::string(display_name(p)), 16);
    text << "\n";
    for (std::size_t r = 0; r < g.rows.size(); ++r) {
      text << detail::pad(std::string(display_name(g.rows[r])), 12);
      for (std::size_t c = 0; c < g.cols.size(); ++c) text << detail::lpad(detail::fixed3(g.at(r, c)), 16);
      text << "\n";
    }
    text << detail::pad("Average", 12);
    for (std::size_t c = 0; c < g.cols.size(); ++c) {
      double sum = 0.0;
      for (std::size_t r = 0; r < g.rows.size(); ++r) sum += g.at(r, c);
      text << detail::lpad(detail::fixed3(sum / static_cast<double>(g.rows.size())), 16);
    }
    text << "\n\n";
  }
  out.data["schema_version"] = kSchemaVersion;
  out.data["grids"] = grids_json;
  if (grids.empty()) {
    out.text = text.str();
    return out;
  }

  const auto norm = victories_by_normalization(grids);
  text << "Number of Victories of Normalization Approaches (Full not included)\n";
  json norm_json = json::array();
  for (const auto& v : norm) {
    text << detail::pad(std::string(display_name(v.policy)), 16) << v.victories << "\n";
    norm_json.push_back({{"norm", to_string(v.policy)}, {"victories", v.victories}});
  }
  text << "\n";

  const auto dist = victories_by_distance(grids);
  text << "Number of Victories of Each Distance Function\n";
  json dist_json = json::array();
  for (const auto& v : dist) {
    text << detail::pad(std::string(display_name(v.kind)), 16) << v.victories << "\n";
    dist_json.push_back({{"distance", to_string(v.kind)}, {"victories", v.victories}});
  }
  text << "\n";

  // Only grids with at least one realistic column have averages.
  std::vector<const AccuracyGrid*> with_means;
  for (const auto& g : grids)
    for (auto p : kRealisticPolicies)
      if (g.col_index(p)) {
        with_means.push_back(&g);
        break;
      }
  json means_json = json::array();
  if (!with_means.empty()) {
    text << "Accuracy Averages of Each Distance Function (Full not included)\n";
    text << detail::pad("", 12);
    for (const auto* g : with_means) text << detail::lpad(g->dataset_name, 14);
    text << "\n";
    std::vector<std::vector<DistanceMean>> per_grid;
    for (const auto* g : with_means) per_grid.push_back(mean_by_distance(*g));
    for (auto k : kAllDistances) {
      bool any = false;
      std::string line = detail::pad(std::string(display_name(k)), 12);
      json row = {{"distance", to_string(k)}};
      json vals = json::array();
      for (std::size_t gi = 0; gi < with_means.size(); ++gi) {
        std::string cell = "-";
        json v = nullptr;
        for (const auto& m : per_grid[gi])
          if (m.kind == k) {
            cell = detail::fixed3(m.mean);
            v = m.mean;
            any = true;
          }
        line += detail::lpad(cell, 14);
        vals.push_back(v);
      }
      if (!any) continue;
      text << line << "\n";
      row["means"] = vals;
      means_json.push_back(row);
    }
  }

  out.data["victories_by_normalization"] = norm_json;
  out.data["victories_by_distance"] = dist_json;
  json datasets = json::array();
  for (const auto* g : with_means) datasets.push_back(g->dataset_name);
  out.data["mean_by_distance"] = {{"datasets", datasets}, {"rows", means_json}};
  out.text = text.str();
  return out;
}

}  // namespace streamdist
