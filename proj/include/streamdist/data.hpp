#pragma once

// Dataset representation, SEA stream generation with range-drift schedules,
// whole-dataset mean imputation and batching.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace streamdist {

using Label = std::int32_t;

struct Instance {
  std::vector<double> features;
  Label label = 0;

  friend bool operator==(const Instance&, const Instance&) = default;
};

/// Missing cells are stored as quiet NaN until impute_missing() runs.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

struct Dataset {
  std::string name;
  std::size_t feature_count = 0;
  std::size_t class_count = 0;
  std::vector<std::string> class_names;  // indexed by Label
  std::vector<Instance> instances;       // stream arrival order

  std::size_t size() const { return instances.size(); }
  bool empty() const { return instances.empty(); }

  bool has_missing() const {
    for (const auto& inst : instances)
      for (double v : inst.features)
        if (is_missing(v)) return true;
    return false;
  }
};

/// A contiguous slice of a dataset. Does not own the instances; the
/// dataset must outlive it.
struct Batch {
  std::size_t index = 0;  // 1-based
  std::span<const Instance> instances;

  std::size_t size() const { return instances.size(); }
};

struct ScheduleSegment {
  std::size_t start_instance = 0;  // 1-based, inclusive
  std::size_t end_instance = 0;    // inclusive
  double multiplier = 1.0;
};

struct RangeSchedule {
  std::size_t feature_index = 0;
  std::vector<ScheduleSegment> segments;

  void validate() const {
    std::size_t prev_end = 0;
    for (const auto& seg : segments) {
      if (seg.start_instance == 0 || seg.end_instance < seg.start_instance)
        throw std::invalid_argument("schedule segment has an empty or 0-based range");
      if (!(seg.multiplier > 0.0) || !std::isfinite(seg.multiplier))
        throw std::invalid_argument("schedule multiplier must be a positive finite real");
      if (seg.start_instance <= prev_end)
        throw std::invalid_argument("schedule segments must be disjoint and sorted");
      prev_end = seg.end_instance;
    }
  }

  /// Multiplier for the instance at 1-based position `pos` (1 when no
  /// segment covers it).
  double multiplier_at(std::size_t pos) const {
    for (const auto& seg : segments)
      if (pos >= seg.start_instance && pos <= seg.end_instance) return seg.multiplier;
    return 1.0;
  }
};

/// x10 / x100 / x1000 on instances 10,001-20,000 / 20,001-30,000 /
/// 30,001-40,000 of the given feature.
inline RangeSchedule staircase_schedule(std::size_t feature_index) {
  return RangeSchedule{feature_index,
                       {{10001, 20000, 10.0}, {20001, 30000, 100.0}, {30001, 40000, 1000.0}}};
}

struct SeaConfig {
  std::size_t n_instances = 40000;
  std::uint64_t seed = 0;
  double threshold = 8.0;
  double low = 0.0;
  double high = 10.0;
  std::vector<RangeSchedule> schedules;

  void validate() const {
    if (n_instances == 0) throw std::invalid_argument("SEA n_instances must be positive");
    if (!(low < high) || !std::isfinite(low) || !std::isfinite(high))
      throw std::invalid_argument("SEA feature range requires finite low < high");
    for (const auto& s : schedules) {
      if (s.feature_index >= 3)
        throw std::invalid_argument("SEA schedule feature index must be 0, 1 or 2");
      s.validate();
    }
  }

  friend bool operator==(const SeaConfig& a, const SeaConfig& b) {
    auto seg_eq = [](const ScheduleSegment& x, const ScheduleSegment& y) {
      return x.start_instance == y.start_instance && x.end_instance == y.end_instance &&
             x.multiplier == y.multiplier;
    };
    if (a.n_instances != b.n_instances || a.seed != b.seed || a.threshold != b.threshold ||
        a.low != b.low || a.high != b.high || a.schedules.size() != b.schedules.size())
      return false;
    for (std::size_t i = 0; i < a.schedules.size(); ++i) {
      const auto& sa = a.schedules[i];
      const auto& sb = b.schedules[i];
      if (sa.feature_index != sb.feature_index || sa.segments.size() != sb.segments.size())
        return false;
      for (std::size_t j = 0; j < sa.segments.size(); ++j)
        if (!seg_eq(sa.segments[j], sb.segments[j])) return false;
    }
    return true;
  }
};

namespace sea {
inline constexpr Label kPositive = 0;
inline constexpr Label kNegative = 1;
}  // namespace sea

namespace detail {

// Uniform in [0, 1) from the top 53 bits; independent of the standard
// library's distribution implementation.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Label rule of the first SEA concept, evaluated on raw (pre-drift) values.
inline Label sea_label(double f1, double f2, double threshold = 8.0) {
  return (f1 + f2 <= threshold) ? sea::kPositive : sea::kNegative;
}

inline Dataset generate_sea(const SeaConfig& config) {
  config.validate();
  Dataset ds;
  ds.name = "sea";
  ds.feature_count = 3;
  ds.class_count = 2;
  ds.class_names = {"positive", "negative"};
  ds.instances.reserve(config.n_instances);

  std::mt19937_64 rng(config.seed);
  const double width = config.high - config.low;
  for (std::size_t i = 0; i < config.n_instances; ++i) {
    Instance inst;
    inst.features.resize(3);
    for (double& f : inst.features) f = config.low + width * detail::unit_uniform(rng);
    inst.label = sea_label(inst.features[0], inst.features[1], config.threshold);
    ds.instances.push_back(std::move(inst));
  }

  for (const auto& schedule : config.schedules) {
    for (const auto& seg : schedule.segments) {
      const std::size_t last = std::min(seg.end_instance, config.n_instances);
      for (std::size_t pos = seg.start_instance; pos <= last; ++pos)
        ds.instances[pos - 1].features[schedule.feature_index] *= seg.multiplier;
    }
  }
  return ds;
}

/// Replaces every missing cell by the mean of the present values of its
/// feature over the whole dataset (0 for an entirely missing feature).
inline Dataset impute_missing(Dataset dataset) {
  const std::size_t n = dataset.feature_count;
  std::vector<double> sums(n, 0.0);
  std::vector<std::size_t> counts(n, 0);
  for (const auto& inst : dataset.instances) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!is_missing(inst.features[j])) {
        sums[j] += inst.features[j];
        ++counts[j];
      }
    }
  }
  std::vector<double> means(n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    if (counts[j] > 0) means[j] = sums[j] / static_cast<double>(counts[j]);

  for (auto& inst : dataset.instances)
    for (std::size_t j = 0; j < n; ++j)
      if (is_missing(inst.features[j])) inst.features[j] = means[j];
  return dataset;
}

inline std::vector<Batch> batchify(std::span<const Instance> instances, std::size_t batch_size) {
  if (batch_size == 0) throw std::invalid_argument("batch_size must be at least 1");
  if (instances.empty()) throw std::invalid_argument("cannot batch an empty dataset");
  std::vector<Batch> batches;
  batches.reserve((instances.size() + batch_size - 1) / batch_size);
  for (std::size_t start = 0, idx = 1; start < instances.size(); start += batch_size, ++idx) {
    const std::size_t len = std::min(batch_size, instances.size() - start);
    batches.push_back(Batch{idx, instances.subspan(start, len)});
  }
  return batches;
}

inline std::vector<Batch> batchify(const Dataset& dataset, std::size_t batch_size) {
  return batchify(std::span<const Instance>(dataset.instances), batch_size);
}

}  // namespace streamdist
