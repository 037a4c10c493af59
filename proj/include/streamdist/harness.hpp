#pragma once

// Batch-stream evaluation protocol. Batch t is scored by a classifier and
// scaler that only saw batches 1..t-1; labels of batch t are revealed after
// it has been scored. Batch 1 is never scored.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include "streamdist/data.hpp"
#include "streamdist/distance.hpp"
#include "streamdist/knn.hpp"
#include "streamdist/scaling.hpp"

namespace streamdist {

enum class RetrainMode { first_train, previous_batch };

inline std::string_view to_string(RetrainMode m) {
  return m == RetrainMode::first_train ? "first-train" : "retrain";
}

inline std::optional<RetrainMode> parse_retrain_mode(std::string_view s) {
  if (s == "first-train") return RetrainMode::first_train;
  if (s == "retrain") return RetrainMode::previous_batch;
  return std::nullopt;
}

using DataSource = std::variant<SeaConfig, std::shared_ptr<const Dataset>>;

struct RunConfig {
  DataSource source = SeaConfig{};
  std::size_t batch_size = 1000;
  std::size_t k = 3;
  DistanceSpec spec{};
  NormalizationPolicy policy = NormalizationPolicy::original;
  RetrainMode retrain = RetrainMode::first_train;
  std::size_t trials = 30;
  std::uint64_t base_seed = 0;

  bool synthetic() const { return std::holds_alternative<SeaConfig>(source); }

  void validate() const {
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    if (k < 1) throw std::invalid_argument("k must be at least 1");
    if (batch_size < k) throw std::invalid_argument("batch_size must be at least k");
    spec.validate();
    if (const auto* sea = std::get_if<SeaConfig>(&source)) {
      sea->validate();
    } else if (!std::get<std::shared_ptr<const Dataset>>(source)) {
      throw std::invalid_argument("file source has no dataset");
    }
  }
};

struct BatchAccuracy {
  std::size_t batch_index = 0;
  double accuracy = 0.0;

  friend bool operator==(const BatchAccuracy&, const BatchAccuracy&) = default;
};

struct TrialResult {
  std::vector<BatchAccuracy> per_batch;
  double mean_accuracy = 0.0;
  bool leakage_flag = false;
  std::uint64_t seed = 0;

  friend bool operator==(const TrialResult&, const TrialResult&) = default;
};

struct RunResult {
  RunConfig config;
  std::vector<TrialResult> trials;
  double grand_mean = 0.0;
  double grand_std = 0.0;  // sample std of trial means; 0 for one trial
  std::vector<std::string> warnings;

  bool leakage_flag() const { return config.policy == NormalizationPolicy::full_stream; }
};

struct ExecutionOptions {
  std::size_t threads = 1;
};

/// Dataset a trial with this seed consumes. For SEA the stream is
/// regenerated from the seed; file sources ignore it.
inline std::shared_ptr<const Dataset> materialize(const RunConfig& config, std::uint64_t seed) {
  if (const auto* sea = std::get_if<SeaConfig>(&config.source)) {
    SeaConfig c = *sea;
    c.seed = seed;
    return std::make_shared<const Dataset>(generate_sea(c));
  }
  return std::get<std::shared_ptr<const Dataset>>(config.source);
}

namespace detail {

inline void check_stream(const Dataset& ds) {
  for (std::size_t i = 0; i < ds.instances.size(); ++i) {
    const auto& f = ds.instances[i].features;
    if (f.size() != ds.feature_count)
      throw std::runtime_error("dimension drift at instance " + std::to_string(i) + ": " +
                               std::to_string(f.size()) + " features, expected " +
                               std::to_string(ds.feature_count));
    for (double v : f)
      if (!std::isfinite(v))
        throw std::invalid_argument("instance " + std::to_string(i) +
                                    " has a missing or non-finite value; impute first");
  }
}

inline std::vector<Label> labels_of(std::span<const Instance> xs) {
  std::vector<Label> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(x.label);
  return out;
}

}  // namespace detail

/// Runs the protocol over an already materialized stream. When
/// `final_model` is given it receives the classifier that scored the last
/// batch.
inline TrialResult evaluate_stream(const Dataset& dataset, const RunConfig& config,
                                   std::uint64_t seed, KnnModel* final_model = nullptr) {
  config.validate();
  detail::check_stream(dataset);
  const auto batches = batchify(dataset, config.batch_size);
  if (batches.size() < 2)
    throw std::invalid_argument("stream yields " + std::to_string(batches.size()) +
                                " batch(es); at least 2 are required");

  TrialResult result;
  result.seed = seed;
  result.leakage_flag = config.policy == NormalizationPolicy::full_stream;
  result.per_batch.reserve(batches.size() - 1);

  std::optional<KnnModel> model;
  for (std::size_t t = 2; t <= batches.size(); ++t) {
    BatchViews views = prepare_views(config.policy, batches, t);
    if (config.retrain == RetrainMode::previous_batch || !model)
      model.emplace(views.train, config.k, config.spec);
    const auto predicted = model->predict_batch(views.test);
    const auto actual = detail::labels_of(views.test);
    result.per_batch.push_back({t, accuracy(predicted, actual)});
  }

  double sum = 0.0;
  for (const auto& b : result.per_batch) sum += b.accuracy;
  result.mean_accuracy = sum / static_cast<double>(result.per_batch.size());
  if (final_model) *final_model = std::move(*model);
  return result;
}

inline TrialResult run_trial(const RunConfig& config, std::uint64_t seed) {
  config.validate();
  return evaluate_stream(*materialize(config, seed), config, seed);
}

namespace detail {

// Runs fn(i) for i in [0, count) on up to `threads` workers. The first
// exception is rethrown after all workers join.
template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

inline std::size_t effective_trials(const RunConfig& config) {
  return config.synthetic() ? config.trials : 1;
}

inline void finalize(RunResult& r) {
  const auto n = static_cast<double>(r.trials.size());
  double sum = 0.0;
  for (const auto& t : r.trials) sum += t.mean_accuracy;
  r.grand_mean = sum / n;
  double ss = 0.0;
  for (const auto& t : r.trials) ss += (t.mean_accuracy - r.grand_mean) * (t.mean_accuracy - r.grand_mean);
  r.grand_std = r.trials.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  if (!r.config.synthetic() && r.config.trials > 1)
    r.warnings.push_back("file-backed stream is deterministic; " +
                         std::to_string(r.config.trials) +
                         " trials collapse to a single effective trial");
}

// Streams that compare equal here are byte-identical for every seed.
inline bool same_source(const DataSource& a, const DataSource& b) {
  if (a.index() != b.index()) return false;
  if (const auto* sa = std::get_if<SeaConfig>(&a)) {
    SeaConfig x = *sa, y = std::get<SeaConfig>(b);
    x.seed = y.seed = 0;
    return x == y;
  }
  return std::get<1>(a) == std::get<1>(b);
}

}  // namespace detail

/// Runs every config; within a group of configs sharing a source, each seed's
/// stream is generated once and fed to all of them. Results come back in
/// input order and do not depend on the thread count.
inline std::vector<RunResult> sweep(std::span<const RunConfig> configs,
                                    ExecutionOptions options = {}) {
  for (const auto& c : configs) c.validate();
  std::vector<RunResult> results(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    results[i].config = configs[i];
    results[i].trials.resize(detail::effective_trials(configs[i]));
  }

  // A unit is one (source group, seed) stream and the trials that use it.
  struct Slot {
    std::size_t config;
    std::size_t trial;
  };
  struct Unit {
    std::size_t representative;
    std::uint64_t seed;
    std::vector<Slot> slots;
  };
  std::vector<Unit> units;
  std::vector<std::size_t> group_of(configs.size());
  std::vector<std::size_t> group_rep;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    std::size_t g = 0;
    while (g < group_rep.size() && !detail::same_source(configs[group_rep[g]].source, configs[i].source))
      ++g;
    if (g == group_rep.size()) group_rep.push_back(i);
    group_of[i] = g;
  }
  std::map<std::pair<std::size_t, std::uint64_t>, std::size_t> unit_index;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    for (std::size_t t = 0; t < results[i].trials.size(); ++t) {
      const std::uint64_t seed = configs[i].base_seed + t;
      auto [it, inserted] = unit_index.try_emplace({group_of[i], seed}, units.size());
      if (inserted) units.push_back(Unit{group_rep[group_of[i]], seed, {}});
      units[it->second].slots.push_back({i, t});
    }
  }

  detail::parallel_for(units.size(), options.threads, [&](std::size_t u) {
    const Unit& unit = units[u];
    const auto stream = materialize(configs[unit.representative], unit.seed);
    for (const auto& slot : unit.slots)
      results[slot.config].trials[slot.trial] =
          evaluate_stream(*stream, configs[slot.config], unit.seed);
  });

  for (auto& r : results) detail::finalize(r);
  return results;
}

/// Runs `trials` trials with seeds base_seed, base_seed + 1, ...
inline RunResult run_experiment(const RunConfig& config, ExecutionOptions options = {}) {
  return std::move(sweep(std::span<const RunConfig>(&config, 1), options).front());
}

/// Cartesian sweep over distances (rows) and policies (columns).
struct SweepGrid {
  std::vector<DistanceSpec> specs;
  std::vector<NormalizationPolicy> policies;
  std::vector<RunResult> cells;  // row-major

  const RunResult& at(std::size_t row, std::size_t col) const {
    return cells.at(row * policies.size() + col);
  }
};

inline SweepGrid sweep_grid(const RunConfig& base, std::span<const DistanceSpec> specs,
                            std::span<const NormalizationPolicy> policies,
                            ExecutionOptions options = {}) {
  SweepGrid grid;
  grid.specs.assign(specs.begin(), specs.end());
  grid.policies.assign(policies.begin(), policies.end());
  std::vector<RunConfig> configs;
  configs.reserve(specs.size() * policies.size());
  for (const auto& s : specs)
    for (auto p : policies) {
      RunConfig c = base;
      c.spec = s;
      c.policy = p;
      configs.push_back(std::move(c));
    }
  grid.cells = sweep(configs, options);
  return grid;
}

/// All eight kinds, Minkowski at order p.
inline std::vector<DistanceSpec> all_distance_specs(double p = 1.5) {
  std::vector<DistanceSpec> out;
  for (auto k : kAllDistances) out.push_back(DistanceSpec{k, p});
  return out;
}

}  // namespace streamdist
