#pragma once

// Min-max scaler and the four normalization policies for a batch stream.

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "streamdist/data.hpp"

namespace streamdist {

enum class NormalizationPolicy { original, first_batch, previous_batch, full_stream };

inline constexpr std::array<NormalizationPolicy, 4> kAllPolicies = {
    NormalizationPolicy::original, NormalizationPolicy::first_batch,
    NormalizationPolicy::previous_batch, NormalizationPolicy::full_stream};

/// CLI token: none | first | previous | full.
inline std::string_view to_string(NormalizationPolicy p) {
  switch (p) {
    case NormalizationPolicy::original: return "none";
    case NormalizationPolicy::first_batch: return "first";
    case NormalizationPolicy::previous_batch: return "previous";
    case NormalizationPolicy::full_stream: return "full";
  }
  return "unknown";
}

inline std::string_view display_name(NormalizationPolicy p) {
  switch (p) {
    case NormalizationPolicy::original: return "Original";
    case NormalizationPolicy::first_batch: return "First Batch";
    case NormalizationPolicy::previous_batch: return "Previous Batch";
    case NormalizationPolicy::full_stream: return "Full";
  }
  return "unknown";
}

inline std::optional<NormalizationPolicy> parse_policy(std::string_view s) {
  for (auto p : kAllPolicies)
    if (s == to_string(p)) return p;
  return std::nullopt;
}

struct ScalerProvenance {
  enum class Source { first_batch, previous_batch, full_stream, explicit_instances };
  Source source = Source::explicit_instances;
  std::size_t batch_index = 0;  // meaningful for first_batch / previous_batch
};

struct ScalerModel {
  std::vector<double> mins;
  std::vector<double> maxs;
  ScalerProvenance fitted_on;

  std::size_t dimension() const { return mins.size(); }

  double scale(std::size_t j, double v) const {
    const double range = maxs[j] - mins[j];
    if (range == 0.0) return 0.0;
    return (v - mins[j]) / range;
  }
};

inline ScalerModel fit_minmax(std::span<const Instance> instances) {
  if (instances.empty()) throw std::invalid_argument("fit_minmax: empty input");
  const std::size_t n = instances.front().features.size();
  ScalerModel m;
  m.mins = instances.front().features;
  m.maxs = instances.front().features;
  for (const auto& inst : instances) {
    if (inst.features.size() != n)
      throw std::invalid_argument("fit_minmax: inconsistent feature count");
    for (std::size_t j = 0; j < n; ++j) {
      m.mins[j] = std::min(m.mins[j], inst.features[j]);
      m.maxs[j] = std::max(m.maxs[j], inst.features[j]);
    }
  }
  return m;
}

/// Affine per-feature map, no clamping. Constant features map to 0.
inline std::vector<double> transform(const ScalerModel& model, std::span<const double> x) {
  if (x.size() != model.dimension())
    throw std::invalid_argument("transform: expected " + std::to_string(model.dimension()) +
                                " features, got " + std::to_string(x.size()));
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = model.scale(j, x[j]);
  return out;
}

inline std::vector<Instance> transform(const ScalerModel& model,
                                       std::span<const Instance> instances) {
  std::vector<Instance> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) out.push_back(Instance{transform(model, inst.features), inst.label});
  return out;
}

struct BatchViews {
  std::vector<Instance> train;  // normalized batch t-1
  std::vector<Instance> test;   // normalized batch t
  std::optional<ScalerModel> scaler;
  bool leakage = false;
};

namespace detail {

inline ScalerModel fit_full_stream(std::span<const Batch> batches) {
  ScalerModel m = fit_minmax(batches.front().instances);
  for (const auto& b : batches.subspan(1)) {
    const ScalerModel part = fit_minmax(b.instances);
    if (part.dimension() != m.dimension())
      throw std::invalid_argument("fit_minmax: inconsistent feature count");
    for (std::size_t j = 0; j < m.dimension(); ++j) {
      m.mins[j] = std::min(m.mins[j], part.mins[j]);
      m.maxs[j] = std::max(m.maxs[j], part.maxs[j]);
    }
  }
  m.fitted_on = {ScalerProvenance::Source::full_stream, 0};
  return m;
}

}  // namespace detail

/// Scaler a policy uses when scoring batch t (1-based); nullopt for
/// Original.
inline std::optional<ScalerModel> scaler_for_step(NormalizationPolicy policy,
                                                  std::span<const Batch> batches, std::size_t t) {
  if (t < 2 || t > batches.size())
    throw std::out_of_range("step " + std::to_string(t) + " outside 2.." +
                            std::to_string(batches.size()));
  switch (policy) {
    case NormalizationPolicy::original: return std::nullopt;
    case NormalizationPolicy::first_batch: {
      ScalerModel m = fit_minmax(batches[0].instances);
      m.fitted_on = {ScalerProvenance::Source::first_batch, 1};
      return m;
    }
    case NormalizationPolicy::previous_batch: {
      ScalerModel m = fit_minmax(batches[t - 2].instances);
      m.fitted_on = {ScalerProvenance::Source::previous_batch, t - 1};
      return m;
    }
    case NormalizationPolicy::full_stream: return detail::fit_full_stream(batches);
  }
  return std::nullopt;
}

/// Training view (batch t-1) and test view (batch t) under a policy.
inline BatchViews prepare_views(NormalizationPolicy policy, std::span<const Batch> batches,
                                std::size_t t) {
  BatchViews views;
  views.scaler = scaler_for_step(policy, batches, t);
  views.leakage = policy == NormalizationPolicy::full_stream;
  const auto& prev = batches[t - 2].instances;
  const auto& cur = batches[t - 1].instances;
  if (views.scaler) {
    views.train = transform(*views.scaler, prev);
    views.test = transform(*views.scaler, cur);
  } else {
    views.train.assign(prev.begin(), prev.end());
    views.test.assign(cur.begin(), cur.end());
  }
  return views;
}

}  // namespace streamdist
