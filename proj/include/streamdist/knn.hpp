#pragma once

// k-NN classifier by linear scan with a pluggable distance.

#include <algorithm>
#include <cstddef>
#include <iterator>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "streamdist/data.hpp"
#include "streamdist/distance.hpp"

namespace streamdist {

class KnnModel {
 public:
  KnnModel() = default;

  /// Stores the training set and fits the distance statistics on it.
  KnnModel(std::span<const Instance> training, std::size_t k, const DistanceSpec& spec)
      : k_(k), spec_(spec) {
    if (k == 0) throw std::invalid_argument("k must be at least 1");
    if (training.size() < k)
      throw std::invalid_argument("training set of " + std::to_string(training.size()) +
                                  " instances is smaller than k=" + std::to_string(k));
    dim_ = training.front().features.size();
    points_.reserve(training.size() * dim_);
    labels_.reserve(training.size());
    for (const auto& inst : training) {
      if (inst.features.size() != dim_)
        throw std::invalid_argument("training instances have inconsistent feature counts");
      points_.insert(points_.end(), inst.features.begin(), inst.features.end());
      labels_.push_back(inst.label);
    }
    dist_ = fit_distance_model(spec, training);
  }

  std::size_t k() const { return k_; }
  std::size_t size() const { return labels_.size(); }
  std::size_t dimension() const { return dim_; }
  const DistanceSpec& spec() const { return spec_; }
  const DistanceModel& distance_model() const { return dist_; }

  std::span<const double> point(std::size_t i) const {
    return std::span<const double>(points_).subspan(i * dim_, dim_);
  }
  Label label(std::size_t i) const { return labels_[i]; }

  /// Indices of the k nearest training points, nearest first. Equal
  /// distances are ordered by training index.
  std::vector<std::size_t> neighbors(std::span<const double> x) const {
    check_query(x);
    struct Cand {
      double key;
      std::size_t idx;
    };
    std::vector<Cand> best;
    best.reserve(k_ + 1);
    const double* q = x.data();
    dist_.with_key([&](auto key_of) {
      for (std::size_t i = 0; i < labels_.size(); ++i) {
        const double key = key_of(q, points_.data() + i * dim_, dim_);
        // Scan order is index order, so an equal key never displaces.
        if (best.size() == k_ && !(key < best.back().key)) continue;
        auto pos = best.end();
        while (pos != best.begin() && key < std::prev(pos)->key) --pos;
        best.insert(pos, Cand{key, i});
        if (best.size() > k_) best.pop_back();
      }
    });
    std::vector<std::size_t> out;
    out.reserve(best.size());
    for (const auto& c : best) out.push_back(c.idx);
    return out;
  }

  /// Majority vote among the k nearest; a vote tie goes to the tied label
  /// whose member is nearest.
  Label predict(std::span<const double> x) const {
    const auto nn = neighbors(x);
    std::size_t best_count = 0;
    for (std::size_t a = 0; a < nn.size(); ++a) {
      std::size_t c = 0;
      for (std::size_t b = 0; b < nn.size(); ++b) c += labels_[nn[b]] == labels_[nn[a]];
      best_count = std::max(best_count, c);
    }
    for (std::size_t a = 0; a < nn.size(); ++a) {
      std::size_t c = 0;
      for (std::size_t b = 0; b < nn.size(); ++b) c += labels_[nn[b]] == labels_[nn[a]];
      if (c == best_count) return labels_[nn[a]];
    }
    return labels_[nn.front()];
  }

  std::vector<Label> predict_batch(std::span<const Instance> batch) const {
    std::vector<Label> out;
    out.reserve(batch.size());
    for (const auto& inst : batch) out.push_back(predict(inst.features));
    return out;
  }

  friend bool operator==(const KnnModel& a, const KnnModel& b) {
    return a.k_ == b.k_ && a.spec_ == b.spec_ && a.dim_ == b.dim_ && a.points_ == b.points_ &&
           a.labels_ == b.labels_ && a.dist_.inv_covariance() == b.dist_.inv_covariance() &&
           a.dist_.variances() == b.dist_.variances();
  }

 private:
  void check_query(std::span<const double> x) const {
    if (x.size() != dim_)
      throw std::invalid_argument("query has " + std::to_string(x.size()) +
                                  " features, model expects " + std::to_string(dim_));
  }

  std::size_t k_ = 3;
  DistanceSpec spec_{};
  std::size_t dim_ = 0;
  std::vector<double> points_;  // row-major, one row per training instance
  std::vector<Label> labels_;
  DistanceModel dist_;
};

inline KnnModel fit(std::span<const Instance> training, std::size_t k, const DistanceSpec& spec) {
  return KnnModel(training, k, spec);
}

inline Label predict(const KnnModel& model, std::span<const double> x) {
  return model.predict(x);
}

inline std::vector<Label> predict_batch(const KnnModel& model, std::span<const Instance> batch) {
  return model.predict_batch(batch);
}

/// Fraction of exact matches; an empty pair of lists scores 0.
inline double accuracy(std::span<const Label> predicted, std::span<const Label> actual) {
  if (predicted.size() != actual.size())
    throw std::invalid_argument("accuracy: prediction and label counts differ");
  if (predicted.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == actual[i];
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

}  // namespace streamdist
