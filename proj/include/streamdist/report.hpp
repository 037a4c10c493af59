#pragma once

// Aggregation over accuracy grids (victory counts, per-distance averages)
// and per-chunk Tukey box-plot statistics of a feature.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "streamdist/data.hpp"
#include "streamdist/distance.hpp"
#include "streamdist/harness.hpp"
#include "streamdist/scaling.hpp"

namespace streamdist {

/// Grand-mean accuracies of one dataset: distances down, policies across.
struct AccuracyGrid {
  std::string dataset_name;
  std::vector<DistanceKind> rows;
  std::vector<NormalizationPolicy> cols;
  std::vector<double> cells;  // row-major

  double at(std::size_t r, std::size_t c) const { return cells.at(r * cols.size() + c); }

  std::optional<std::size_t> col_index(NormalizationPolicy p) const {
    for (std::size_t c = 0; c < cols.size(); ++c)
      if (cols[c] == p) return c;
    return std::nullopt;
  }

  void validate() const {
    if (rows.empty() || cols.empty()) throw std::invalid_argument("accuracy grid has no cells");
    if (cells.size() != rows.size() * cols.size())
      throw std::invalid_argument("accuracy grid '" + dataset_name + "' has " +
                                  std::to_string(cells.size()) + " cells, expected " +
                                  std::to_string(rows.size() * cols.size()));
    for (double v : cells)
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument("accuracy grid '" + dataset_name + "' has a cell outside [0,1]: " +
                                    std::to_string(v));
  }
};

inline AccuracyGrid to_accuracy_grid(const SweepGrid& sweep, std::string dataset_name) {
  AccuracyGrid g;
  g.dataset_name = std::move(dataset_name);
  for (const auto& s : sweep.specs) g.rows.push_back(s.kind);
  g.cols = sweep.policies;
  for (const auto& cell : sweep.cells) g.cells.push_back(cell.grand_mean);
  return g;
}

/// Policies that take part in victory counting (full stream excluded).
inline constexpr std::array<NormalizationPolicy, 3> kRealisticPolicies = {
    NormalizationPolicy::original, NormalizationPolicy::first_batch,
    NormalizationPolicy::previous_batch};

struct PolicyCount {
  NormalizationPolicy policy;
  std::size_t victories = 0;
};

struct DistanceCount {
  DistanceKind kind;
  std::size_t victories = 0;
};

/// Per grid, the realistic column with the highest average over distances
/// wins; exact ties credit every tied column.
inline std::vector<PolicyCount> victories_by_normalization(std::span<const AccuracyGrid> grids) {
  if (grids.empty()) throw std::invalid_argument("victories_by_normalization: no grids");
  std::vector<PolicyCount> out;
  for (auto p : kRealisticPolicies) out.push_back({p, 0});
  for (const auto& g : grids) {
    g.validate();
    std::vector<std::pair<std::size_t, double>> avgs;  // (slot in out, average)
    for (std::size_t slot = 0; slot < out.size(); ++slot) {
      const auto c = g.col_index(out[slot].policy);
      if (!c) continue;
      double sum = 0.0;
      for (std::size_t r = 0; r < g.rows.size(); ++r) sum += g.at(r, *c);
      avgs.emplace_back(slot, sum / static_cast<double>(g.rows.size()));
    }
    if (avgs.empty()) continue;
    double best = avgs.front().second;
    for (const auto& a : avgs) best = std::max(best, a.second);
    for (const auto& a : avgs)
      if (a.second == best) ++out[a.first].victories;
  }
  return out;
}

/// Every realistic (grid, policy) column awards a victory to each distance
/// attaining the column maximum.
inline std::vector<DistanceCount> victories_by_distance(std::span<const AccuracyGrid> grids) {
  if (grids.empty()) throw std::invalid_argument("victories_by_distance: no grids");
  std::vector<DistanceCount> out;
  for (auto k : kAllDistances) {
    const bool present = std::any_of(grids.begin(), grids.end(), [&](const AccuracyGrid& g) {
      return std::find(g.rows.begin(), g.rows.end(), k) != g.rows.end();
    });
    if (present) out.push_back({k, 0});
  }
  auto slot_of = [&](DistanceKind k) -> DistanceCount& {
    return *std::find_if(out.begin(), out.end(), [&](const DistanceCount& d) { return d.kind == k; });
  };
  for (const auto& g : grids) {
    g.validate();
    for (auto p : kRealisticPolicies) {
      const auto c = g.col_index(p);
      if (!c) continue;
      double best = g.at(0, *c);
      for (std::size_t r = 0; r < g.rows.size(); ++r) best = std::max(best, g.at(r, *c));
      for (std::size_t r = 0; r < g.rows.size(); ++r)
        if (g.at(r, *c) == best) ++slot_of(g.rows[r]).victories;
    }
  }
  return out;
}

struct DistanceMean {
  DistanceKind kind;
  double mean = 0.0;
};

/// Per distance, unrounded mean over the realistic columns present.
inline std::vector<DistanceMean> mean_by_distance(const AccuracyGrid& grid) {
  grid.validate();
  std::vector<std::size_t> cols;
  for (auto p : kRealisticPolicies)
    if (auto c = grid.col_index(p)) cols.push_back(*c);
  if (cols.empty()) throw std::invalid_argument("mean_by_distance: grid has no realistic columns");
  std::vector<DistanceMean> out;
  for (std::size_t r = 0; r < grid.rows.size(); ++r) {
    double sum = 0.0;
    for (auto c : cols) sum += grid.at(r, c);
    out.push_back({grid.rows[r], sum / static_cast<double>(cols.size())});
  }
  return out;
}

/// Rounds to `decimals` places, ties to even. A value within 1e-9 (in units
/// of the last place) of a half is treated as an exact tie, so decimal
/// inputs such as 0.7125 round as written.
inline double round_half_even(double x, int decimals = 3) {
  const double scale = std::pow(10.0, decimals);
  const double y = x * scale;
  const double lo = std::floor(y);
  const double frac = y - lo;
  double r;
  if (std::abs(frac - 0.5) < 1e-9)
    r = std::fmod(lo, 2.0) == 0.0 ? lo : lo + 1.0;
  else
    r = frac < 0.5 ? lo : lo + 1.0;
  return r / scale;
}

struct BoxStats {
  std::size_t batch_index = 0;  // 1-based chunk position
  std::size_t count = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double whisker_low = 0.0;
  double whisker_high = 0.0;
  std::vector<double> outliers;  // ascending
};

/// Quantile by linear interpolation between order statistics of sorted data
/// (position (n-1)q).
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty data");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Tukey summary: whiskers at the most extreme points within 1.5 IQR of the
/// quartiles, everything beyond reported as an outlier.
inline BoxStats tukey_box(std::span<const double> values, std::size_t batch_index = 1) {
  if (values.empty()) throw std::invalid_argument("box statistics of an empty chunk");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  BoxStats b;
  b.batch_index = batch_index;
  b.count = v.size();
  b.q1 = quantile_sorted(v, 0.25);
  b.median = quantile_sorted(v, 0.5);
  b.q3 = quantile_sorted(v, 0.75);
  const double iqr = b.q3 - b.q1;
  const double lo_fence = b.q1 - 1.5 * iqr;
  const double hi_fence = b.q3 + 1.5 * iqr;
  b.whisker_low = b.q1;
  b.whisker_high = b.q3;
  bool have_low = false;
  for (double x : v) {
    if (x < lo_fence || x > hi_fence) {
      b.outliers.push_back(x);
      continue;
    }
    if (!have_low) {
      b.whisker_low = x;
      have_low = true;
    }
    b.whisker_high = x;
  }
  return b;
}

/// Splits the stream into n_chunks contiguous chunks of size/n_chunks
/// instances (the last one takes the remainder) and summarizes one feature
/// per chunk.
inline std::vector<BoxStats> boxplot_stats(const Dataset& dataset, std::size_t feature_index,
                                           std::size_t n_chunks) {
  if (dataset.empty()) throw std::invalid_argument("boxplot_stats: empty dataset");
  if (n_chunks == 0) throw std::invalid_argument("boxplot_stats: n_chunks must be at least 1");
  if (feature_index >= dataset.feature_count)
    throw std::invalid_argument("boxplot_stats: feature index " + std::to_string(feature_index) +
                                " out of range");
  if (dataset.size() < n_chunks)
    throw std::invalid_argument("boxplot_stats: " + std::to_string(dataset.size()) +
                                " instances cannot fill " + std::to_string(n_chunks) + " chunks");
  const std::size_t chunk = dataset.size() / n_chunks;
  std::vector<BoxStats> out;
  out.reserve(n_chunks);
  std::vector<double> values;
  for (std::size_t c = 0; c < n_chunks; ++c) {
    const std::size_t begin = c * chunk;
    const std::size_t end = (c + 1 == n_chunks) ? dataset.size() : begin + chunk;
    values.clear();
    for (std::size_t i = begin; i < end; ++i) {
      const double x = dataset.instances[i].features[feature_index];
      if (!is_missing(x)) values.push_back(x);
    }
    out.push_back(tukey_box(values, c + 1));
  }
  return out;
}

/// Index of the feature with the largest sample standard deviation over the
/// whole dataset; ties go to the lowest index.
inline std::size_t top_std_feature(const Dataset& dataset) {
  if (dataset.empty()) throw std::invalid_argument("top_std_feature: empty dataset");
  std::size_t best = 0;
  double best_var = -1.0;
  for (std::size_t j = 0; j < dataset.feature_count; ++j) {
    double mean = 0.0;
    std::size_t n = 0;
    for (const auto& inst : dataset.instances)
      if (!is_missing(inst.features[j])) {
        mean += inst.features[j];
        ++n;
      }
    double var = 0.0;
    if (n > 1) {
      mean /= static_cast<double>(n);
      double ss = 0.0;
      for (const auto& inst : dataset.instances)
        if (!is_missing(inst.features[j])) ss += (inst.features[j] - mean) * (inst.features[j] - mean);
      var = ss / static_cast<double>(n - 1);
    }
    if (var > best_var) {
      best_var = var;
      best = j;
    }
  }
  return best;
}

}  // namespace streamdist
