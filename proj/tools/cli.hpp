#pragma once

// Command-line front end: run | sweep | boxplot | tables.
// Exit codes: 0 success, 1 runtime error, 2 usage error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "streamdist/data.hpp"
#include "streamdist/harness.hpp"
#include "streamdist/io.hpp"
#include "streamdist/output.hpp"
#include "streamdist/report.hpp"

namespace streamdist::cli {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string gen;
  std::string data;
  std::vector<std::string> grid_files;
  std::string label_col;
  bool no_header = false;
  long long batch_size = 1000;
  long long k = 3;
  std::string distance = "euclidean";
  double p = 1.5;
  std::string norm = "none";
  std::string mode = "first-train";
  long long trials = 30;
  long long seed = 0;
  long long instances = 40000;
  std::string vary;
  std::vector<std::string> schedules;
  long long chunks = 10;
  long long feature = -1;
  long long threads = 1;
  std::string out;
  std::string format;
};

/// Parses `feat:start:end:mult`. `feat` is f1..f3 (1-based name) or a 0-based
/// index.
inline ScheduleSegment parse_schedule(const std::string& token, std::size_t& feature) {
  std::vector<std::string> parts;
  std::stringstream ss(token);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  if (parts.size() != 4) throw UsageError("--schedule expects feat:start:end:mult, got '" + token + "'");
  try {
    std::size_t pos = 0;
    if (!parts[0].empty() && (parts[0][0] == 'f' || parts[0][0] == 'F')) {
      const long long one_based = std::stoll(parts[0].substr(1), &pos);
      if (pos + 1 != parts[0].size() || one_based < 1) throw std::invalid_argument("feat");
      feature = static_cast<std::size_t>(one_based - 1);
    } else {
      const long long idx = std::stoll(parts[0], &pos);
      if (pos != parts[0].size() || idx < 0) throw std::invalid_argument("feat");
      feature = static_cast<std::size_t>(idx);
    }
    const long long start = std::stoll(parts[1], &pos);
    if (pos != parts[1].size()) throw std::invalid_argument("start");
    const long long end = std::stoll(parts[2], &pos);
    if (pos != parts[2].size()) throw std::invalid_argument("end");
    const double mult = std::stod(parts[3], &pos);
    if (pos != parts[3].size()) throw std::invalid_argument("mult");
    if (start < 1 || end < start || !(mult > 0.0))
      throw UsageError("--schedule '" + token + "': need 1 <= start <= end and mult > 0");
    return ScheduleSegment{static_cast<std::size_t>(start), static_cast<std::size_t>(end), mult};
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception&) {
    throw UsageError("--schedule: cannot parse '" + token + "'");
  }
}

inline void check_ranges(const Options& o) {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw UsageError(msg);
  };
  need(o.batch_size >= 1, "--batch-size must be >= 1, got " + std::to_string(o.batch_size));
  need(o.k >= 1, "--k must be >= 1, got " + std::to_string(o.k));
  need(o.batch_size >= o.k, "--batch-size must be >= --k");
  need(o.p >= 1.0 && std::isfinite(o.p), "--p must be a real >= 1, got " + std::to_string(o.p));
  need(o.trials >= 1, "--trials must be >= 1, got " + std::to_string(o.trials));
  need(o.seed >= 0, "--seed must be >= 0, got " + std::to_string(o.seed));
  need(o.instances >= 1, "--instances must be >= 1, got " + std::to_string(o.instances));
  need(o.chunks >= 1, "--chunks must be >= 1, got " + std::to_string(o.chunks));
  need(o.threads >= 1, "--threads must be >= 1, got " + std::to_string(o.threads));
}

inline std::optional<ColumnRef> label_column(const Options& o) {
  if (o.label_col.empty()) return std::nullopt;
  const bool numeric = o.label_col.find_first_not_of("0123456789") == std::string::npos;
  if (numeric) return ColumnRef{static_cast<std::size_t>(std::stoull(o.label_col))};
  return ColumnRef{o.label_col};
}

struct Source {
  DataSource source;
  std::string name;
};

inline Source build_source(const Options& o) {
  if (o.gen.empty() == o.data.empty()) throw UsageError("exactly one of --gen sea or --data <path> is required");
  if (!o.gen.empty()) {
    SeaConfig sea;
    sea.n_instances = static_cast<std::size_t>(o.instances);
    std::string name = "sea";
    if (!o.vary.empty()) {
      sea.schedules.push_back(staircase_schedule(o.vary == "f1" ? 0 : 2));
      name += "-vary-" + o.vary;
    }
    for (const auto& tok : o.schedules) {
      std::size_t feature = 0;
      const auto seg = parse_schedule(tok, feature);
      if (feature >= 3) throw UsageError("--schedule '" + tok + "': SEA has features f1..f3");
      auto it = std::find_if(sea.schedules.begin(), sea.schedules.end(),
                             [&](const RangeSchedule& s) { return s.feature_index == feature; });
      if (it == sea.schedules.end()) {
        sea.schedules.push_back(RangeSchedule{feature, {}});
        it = std::prev(sea.schedules.end());
      }
      it->segments.push_back(seg);
      std::sort(it->segments.begin(), it->segments.end(),
                [](const auto& a, const auto& b) { return a.start_instance < b.start_instance; });
    }
    try {
      sea.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return {sea, name};
  }
  if (!o.vary.empty() || !o.schedules.empty())
    throw UsageError("--vary and --schedule apply to --gen sea only");
  if (!std::filesystem::exists(o.data))
    throw std::runtime_error("dataset file not found: '" + o.data + "'");
  Dataset ds = load_dataset(o.data, label_column(o), !o.no_header);
  if (ds.has_missing()) ds = impute_missing(std::move(ds));
  std::string name = ds.name;
  return {std::make_shared<const Dataset>(std::move(ds)), name};
}

inline RunConfig build_config(const Options& o, DataSource source) {
  RunConfig c;
  c.source = std::move(source);
  c.batch_size = static_cast<std::size_t>(o.batch_size);
  c.k = static_cast<std::size_t>(o.k);
  c.spec = DistanceSpec{*parse_distance_kind(o.distance), o.p};
  c.policy = *parse_policy(o.norm);
  c.retrain = *parse_retrain_mode(o.mode);
  c.trials = static_cast<std::size_t>(o.trials);
  c.base_seed = static_cast<std::uint64_t>(o.seed);
  return c;
}

inline void write_output(const Options& o, const std::string& payload, std::ostream& out) {
  if (o.out.empty()) {
    out << payload;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + o.out + "'");
  f << payload;
}

inline void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << "\n";
}

inline int cmd_run(const Options& o, std::ostream& out, std::ostream& err) {
  auto src = build_source(o);
  const RunConfig config = build_config(o, std::move(src.source));
  const RunResult result = run_experiment(config, {static_cast<std::size_t>(o.threads)});
  print_warnings(result.warnings, err);
  write_output(o, o.format == "csv" ? emit_csv(result) : emit_json(result), out);
  return 0;
}

inline int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
  auto src = build_source(o);
  const RunConfig base = build_config(o, std::move(src.source));
  const auto specs = all_distance_specs(o.p);
  const SweepGrid grid = sweep_grid(base, specs, kAllPolicies, {static_cast<std::size_t>(o.threads)});
  if (!grid.cells.empty()) print_warnings(grid.cells.front().warnings, err);
  write_output(o, o.format == "csv" ? sweep_csv(grid) : sweep_record(grid, src.name).dump(2) + "\n",
               out);
  return 0;
}

inline int cmd_boxplot(const Options& o, std::ostream& out, std::ostream&) {
  auto src = build_source(o);
  std::shared_ptr<const Dataset> ds =
      std::holds_alternative<SeaConfig>(src.source)
          ? materialize(RunConfig{src.source}, static_cast<std::uint64_t>(o.seed))
          : std::get<std::shared_ptr<const Dataset>>(src.source);
  std::size_t feature = 0;
  if (o.feature >= 0) {
    feature = static_cast<std::size_t>(o.feature);
    if (feature >= ds->feature_count)
      throw UsageError("--feature " + std::to_string(o.feature) + " out of range (dataset has " +
                       std::to_string(ds->feature_count) + " features)");
  } else {
    feature = top_std_feature(*ds);
  }
  const auto boxes = boxplot_stats(*ds, feature, static_cast<std::size_t>(o.chunks));
  write_output(o, o.format == "json" ? boxplot_json(boxes, ds->name, feature).dump(2) + "\n"
                                     : boxplot_csv(boxes),
               out);
  return 0;
}

inline int cmd_tables(const Options& o, std::ostream& out, std::ostream&) {
  if (o.grid_files.empty()) throw UsageError("tables needs at least one --data <grids.json>");
  std::vector<AccuracyGrid> grids;
  for (const auto& path : o.grid_files) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("grid file not found: '" + path + "'");
    json j;
    try {
      j = json::parse(f);
    } catch (const json::exception& e) {
      throw std::runtime_error("cannot parse '" + path + "': " + e.what());
    }
    auto more = grids_from_json(j);
    grids.insert(grids.end(), more.begin(), more.end());
  }
  const auto tables = emit_tables(grids);
  write_output(o, o.format == "json" ? tables.data.dump(2) + "\n" : tables.text, out);
  return 0;
}

inline void add_source_flags(CLI::App* sub, Options& o) {
  sub->add_option("--gen", o.gen, "Synthetic generator")->check(CLI::IsMember({"sea"}));
  sub->add_option("--data", o.data, "CSV or ARFF dataset path");
  sub->add_option("--label-col", o.label_col, "CSV label column (0-based index or header name)");
  sub->add_flag("--no-header", o.no_header, "CSV file has no header row");
  sub->add_option("--instances", o.instances, "SEA stream length")->capture_default_str();
  sub->add_option("--vary", o.vary, "Staircase range drift preset")->check(CLI::IsMember({"f1", "f3"}));
  sub->add_option("--schedule", o.schedules, "Range drift segment feat:start:end:mult (repeatable)");
  sub->add_option("--seed", o.seed, "Base seed")->capture_default_str();
}

inline void add_run_flags(CLI::App* sub, Options& o) {
  add_source_flags(sub, o);
  sub->add_option("--batch-size", o.batch_size, "Instances per batch")->capture_default_str();
  sub->add_option("--k", o.k, "Neighbours")->capture_default_str();
  sub->add_option("--p", o.p, "Minkowski order (>= 1)")->capture_default_str();
  sub->add_option("--mode", o.mode, "Classifier update mode")
      ->check(CLI::IsMember({"first-train", "retrain"}))
      ->capture_default_str();
  sub->add_option("--trials", o.trials, "Trials (synthetic sources)")->capture_default_str();
  sub->add_option("--threads", o.threads, "Worker threads")->capture_default_str();
  sub->add_option("--out", o.out, "Write output to this path instead of stdout");
}

/// Entry point shared by the binary and the tests.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Distance functions and min-max normalization on batch data streams", "streamdist"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Evaluate one distance / normalization configuration");
  add_run_flags(run, o);
  run->add_option("--distance", o.distance, "Distance function")
      ->check(CLI::IsMember({"euclidean", "manhattan", "chebyshev", "minkowski", "cosine",
                             "mahalanobis", "stdeuclidean", "canberra"}))
      ->capture_default_str();
  run->add_option("--norm", o.norm, "Normalization policy")
      ->check(CLI::IsMember({"none", "first", "previous", "full"}))
      ->capture_default_str();
  run->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));

  auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate all 8 distances x 4 normalization policies");
  add_run_flags(sweep_cmd, o);
  sweep_cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));

  auto* box = app.add_subcommand("boxplot", "Per-chunk box-plot statistics of one feature");
  add_source_flags(box, o);
  box->add_option("--chunks", o.chunks, "Number of contiguous chunks")->capture_default_str();
  box->add_option("--feature", o.feature, "0-based feature index (default: highest std)");
  box->add_option("--out", o.out, "Write output to this path instead of stdout");
  box->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));

  auto* tables = app.add_subcommand("tables", "Aggregation tables from accuracy grids");
  tables->add_option("--data", o.grid_files, "Grid JSON file (repeatable)");
  tables->add_option("--out", o.out, "Write output to this path instead of stdout");
  tables->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"text", "json"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    check_ranges(o);
    if (run->parsed()) return cmd_run(o, out, err);
    if (sweep_cmd->parsed()) return cmd_sweep(o, out, err);
    if (box->parsed()) return cmd_boxplot(o, out, err);
    return cmd_tables(o, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace streamdist::cli
