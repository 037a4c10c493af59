#pragma once

// The eight distance kernels and the fitted statistics (inverse covariance,
// per-feature variance) that Mahalanobis and Standardized Euclidean need.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "streamdist/data.hpp"

namespace streamdist {

enum class DistanceKind {
  euclidean,
  manhattan,
  cosine,
  chebyshev,
  mahalanobis,
  std_euclidean,
  minkowski,
  canberra,
};

/// Row order used by every accuracy table.
inline constexpr std::array<DistanceKind, 8> kAllDistances = {
    DistanceKind::euclidean,   DistanceKind::manhattan,     DistanceKind::cosine,
    DistanceKind::chebyshev,   DistanceKind::mahalanobis,   DistanceKind::std_euclidean,
    DistanceKind::minkowski,   DistanceKind::canberra,
};

inline std::string_view to_string(DistanceKind k) {
  switch (k) {
    case DistanceKind::euclidean: return "euclidean";
    case DistanceKind::manhattan: return "manhattan";
    case DistanceKind::cosine: return "cosine";
    case DistanceKind::chebyshev: return "chebyshev";
    case DistanceKind::mahalanobis: return "mahalanobis";
    case DistanceKind::std_euclidean: return "stdeuclidean";
    case DistanceKind::minkowski: return "minkowski";
    case DistanceKind::canberra: return "canberra";
  }
  return "unknown";
}

inline std::string_view display_name(DistanceKind k) {
  switch (k) {
    case DistanceKind::euclidean: return "Euclidean";
    case DistanceKind::manhattan: return "Manhattan";
    case DistanceKind::cosine: return "Cosine";
    case DistanceKind::chebyshev: return "Chebyshev";
    case DistanceKind::mahalanobis: return "Mahalanobis";
    case DistanceKind::std_euclidean: return "Std. Eucl.";
    case DistanceKind::minkowski: return "Minkowski";
    case DistanceKind::canberra: return "Canberra";
  }
  return "unknown";
}

inline std::optional<DistanceKind> parse_distance_kind(std::string_view s) {
  for (auto k : kAllDistances)
    if (s == to_string(k)) return k;
  return std::nullopt;
}

struct DistanceSpec {
  DistanceKind kind = DistanceKind::euclidean;
  double p = 1.5;  // Minkowski order

  void validate() const {
    if (kind == DistanceKind::minkowski && !(p >= 1.0 && std::isfinite(p)))
      throw std::invalid_argument("Minkowski order p must be a finite real >= 1");
  }

  friend bool operator==(const DistanceSpec&, const DistanceSpec&) = default;
};

inline constexpr double kVarianceFloor = 1e-12;

namespace detail {

inline void check_lengths(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw std::invalid_argument("distance: vector lengths differ (" + std::to_string(x.size()) +
                                " vs " + std::to_string(y.size()) + ")");
}

inline double sq_euclidean(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

inline double manhattan(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::abs(x[i] - y[i]);
  return s;
}

inline double chebyshev(const double* x, const double* y, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

// |d|^p with exact fast paths for the orders used in practice.
inline double abs_pow(double a, double p) {
  if (p == 1.0) return a;
  if (p == 2.0) return a * a;
  if (p == 1.5) return a * std::sqrt(a);
  return std::pow(a, p);
}

inline double minkowski_sum(const double* x, const double* y, std::size_t n, double p) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += abs_pow(std::abs(x[i] - y[i]), p);
  return s;
}

inline double minkowski(const double* x, const double* y, std::size_t n, double p) {
  if (p == 1.0) return manhattan(x, y, n);
  if (p == 2.0) return std::sqrt(sq_euclidean(x, y, n));
  // Factor out the largest difference so large p neither overflows nor
  // underflows.
  const double m = chebyshev(x, y, n);
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += abs_pow(std::abs(x[i] - y[i]) / m, p);
  return m * std::pow(s, 1.0 / p);
}

inline double cosine(const double* x, const double* y, std::size_t n) {
  double dot = 0.0, xx = 0.0, yy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dot += x[i] * y[i];
    xx += x[i] * x[i];
    yy += y[i] * y[i];
  }
  if (xx == 0.0 || yy == 0.0) return 1.0;
  const double sim = std::clamp(dot / (std::sqrt(xx) * std::sqrt(yy)), -1.0, 1.0);
  return 1.0 - sim;
}

inline double canberra(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double den = std::abs(x[i]) + std::abs(y[i]);
    if (den > 0.0) s += std::abs(x[i] - y[i]) / den;
  }
  return s;
}

// (x-y)^T A (x-y) for symmetric row-major A; clamped at zero.
inline double quad_form(const double* x, const double* y, std::size_t n, const double* a) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double di = x[i] - y[i];
    const double* row = a + i * n;
    double cross = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) cross += row[j] * (x[j] - y[j]);
    s += di * (row[i] * di + 2.0 * cross);
  }
  return std::max(s, 0.0);
}

inline double weighted_sq(const double* x, const double* y, std::size_t n, const double* var) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - y[i];
    s += d * d / var[i];
  }
  return s;
}

}  // namespace detail

inline double euclidean(std::span<const double> x, std::span<const double> y) {
  detail::check_lengths(x, y);
  return std::sqrt(detail::sq_euclidean(x.data(), y.data(), x.size()));
}

inline double manhattan(std::span<const double> x, std::span<const double> y) {
  detail::check_lengths(x, y);
  return detail::manhattan(x.data(), y.data(), x.size());
}

inline double chebyshev(std::span<const double> x, std::span<const double> y) {
  detail::check_lengths(x, y);
  return detail::chebyshev(x.data(), y.data(), x.size());
}

inline double minkowski(std::span<const double> x, std::span<const double> y, double p) {
  detail::check_lengths(x, y);
  if (!(p >= 1.0)) throw std::invalid_argument("Minkowski order p must be >= 1");
  return detail::minkowski(x.data(), y.data(), x.size(), p);
}

/// 1 - cosine similarity, in [0, 2]. A zero-norm operand yields 1.
inline double cosine_distance(std::span<const double> x, std::span<const double> y) {
  detail::check_lengths(x, y);
  return detail::cosine(x.data(), y.data(), x.size());
}

/// Terms with |x_i| + |y_i| = 0 contribute 0.
inline double canberra(std::span<const double> x, std::span<const double> y) {
  detail::check_lengths(x, y);
  return detail::canberra(x.data(), y.data(), x.size());
}

/// Fitted state for one distance kind. Stateless kinds carry only kind and p.
class DistanceModel {
 public:
  DistanceModel() = default;

  static DistanceModel stateless(const DistanceSpec& spec) {
    spec.validate();
    if (spec.kind == DistanceKind::mahalanobis || spec.kind == DistanceKind::std_euclidean)
      throw std::invalid_argument(std::string(to_string(spec.kind)) +
                                  " needs fitted statistics; use fit_distance_model");
    DistanceModel m;
    m.spec_ = spec;
    return m;
  }

  /// `inv_covariance` is row-major n x n and must be symmetric.
  static DistanceModel mahalanobis(std::vector<double> inv_covariance, std::size_t n) {
    if (inv_covariance.size() != n * n)
      throw std::invalid_argument("inverse covariance must be n x n");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double a = inv_covariance[i * n + j];
        const double b = inv_covariance[j * n + i];
        if (std::abs(a - b) > 1e-9 * std::max({1.0, std::abs(a), std::abs(b)}))
          throw std::invalid_argument("inverse covariance is not symmetric");
      }
    DistanceModel m;
    m.spec_.kind = DistanceKind::mahalanobis;
    m.dim_ = n;
    m.inv_cov_ = std::move(inv_covariance);
    return m;
  }

  static DistanceModel standardized(std::vector<double> variances) {
    DistanceModel m;
    m.spec_.kind = DistanceKind::std_euclidean;
    m.dim_ = variances.size();
    for (double& v : variances) v = std::max(v, kVarianceFloor);
    m.variances_ = std::move(variances);
    return m;
  }

  DistanceKind kind() const { return spec_.kind; }
  const DistanceSpec& spec() const { return spec_; }
  /// Dimension the statistics were fitted for; 0 for stateless kinds.
  std::size_t dimension() const { return dim_; }
  const std::vector<double>& inv_covariance() const { return inv_cov_; }
  const std::vector<double>& variances() const { return variances_; }
  /// True when the regularized covariance still failed to factor and the
  /// identity was substituted.
  bool identity_fallback() const { return identity_fallback_; }

  double operator()(std::span<const double> x, std::span<const double> y) const {
    detail::check_lengths(x, y);
    if (dim_ != 0 && x.size() != dim_)
      throw std::invalid_argument("distance: vector length " + std::to_string(x.size()) +
                                  " does not match fitted dimension " + std::to_string(dim_));
    if (spec_.kind == DistanceKind::minkowski)
      return detail::minkowski(x.data(), y.data(), x.size(), spec_.p);
    return key_to_distance(rank_key(x.data(), y.data(), x.size()));
  }

  /// Monotone surrogate of the distance, cheaper to evaluate. Ordering of
  /// keys matches ordering of distances. No length checks.
  double rank_key(const double* x, const double* y, std::size_t n) const {
    switch (spec_.kind) {
      case DistanceKind::euclidean: return detail::sq_euclidean(x, y, n);
      case DistanceKind::manhattan: return detail::manhattan(x, y, n);
      case DistanceKind::chebyshev: return detail::chebyshev(x, y, n);
      case DistanceKind::minkowski:
        return spec_.p <= kMaxRawPowerOrder ? detail::minkowski_sum(x, y, n, spec_.p)
                                            : detail::minkowski(x, y, n, spec_.p);
      case DistanceKind::cosine: return detail::cosine(x, y, n);
      case DistanceKind::mahalanobis: return detail::quad_form(x, y, n, inv_cov_.data());
      case DistanceKind::std_euclidean: return detail::weighted_sq(x, y, n, variances_.data());
      case DistanceKind::canberra: return detail::canberra(x, y, n);
    }
    return 0.0;
  }

  /// Calls `f(key_fn)` with a callable equivalent to rank_key for this
  /// kind, so hot loops dispatch once instead of per pair.
  template <class F>
  void with_key(F&& f) const {
    switch (spec_.kind) {
      case DistanceKind::euclidean:
        f([](const double* x, const double* y, std::size_t n) {
          return detail::sq_euclidean(x, y, n);
        });
        return;
      case DistanceKind::manhattan:
        f([](const double* x, const double* y, std::size_t n) {
          return detail::manhattan(x, y, n);
        });
        return;
      case DistanceKind::chebyshev:
        f([](const double* x, const double* y, std::size_t n) {
          return detail::chebyshev(x, y, n);
        });
        return;
      case DistanceKind::cosine:
        f([](const double* x, const double* y, std::size_t n) { return detail::cosine(x, y, n); });
        return;
      case DistanceKind::canberra:
        f([](const double* x, const double* y, std::size_t n) {
          return detail::canberra(x, y, n);
        });
        return;
      case DistanceKind::mahalanobis:
        f([a = inv_cov_.data()](const double* x, const double* y, std::size_t n) {
          return detail::quad_form(x, y, n, a);
        });
        return;
      case DistanceKind::std_euclidean:
        f([v = variances_.data()](const double* x, const double* y, std::size_t n) {
          return detail::weighted_sq(x, y, n, v);
        });
        return;
      case DistanceKind::minkowski:
        if (spec_.p == 1.5) {
          f([](const double* x, const double* y, std::size_t n) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
              const double a = std::abs(x[i] - y[i]);
              s += a * std::sqrt(a);
            }
            return s;
          });
        } else {
          f([this](const double* x, const double* y, std::size_t n) { return rank_key(x, y, n); });
        }
        return;
    }
  }

  double key_to_distance(double key) const {
    switch (spec_.kind) {
      case DistanceKind::euclidean:
      case DistanceKind::mahalanobis:
      case DistanceKind::std_euclidean: return std::sqrt(key);
      case DistanceKind::minkowski:
        if (spec_.p == 1.0 || spec_.p > kMaxRawPowerOrder) return key;
        if (spec_.p == 2.0) return std::sqrt(key);
        return std::pow(key, 1.0 / spec_.p);
      default: return key;
    }
  }

 private:
  friend DistanceModel fit_distance_model(const DistanceSpec&, std::span<const Instance>);

  // Above this order |d|^p sums risk overflow, so keys are true distances.
  static constexpr double kMaxRawPowerOrder = 8.0;

  DistanceSpec spec_{};
  std::size_t dim_ = 0;
  std::vector<double> inv_cov_;
  std::vector<double> variances_;
  bool identity_fallback_ = false;
};

inline double mahalanobis(std::span<const double> x, std::span<const double> y,
                          const DistanceModel& model) {
  if (model.kind() != DistanceKind::mahalanobis)
    throw std::invalid_argument("mahalanobis: model is not a Mahalanobis model");
  return model(x, y);
}

inline double standardized_euclidean(std::span<const double> x, std::span<const double> y,
                                     const DistanceModel& model) {
  if (model.kind() != DistanceKind::std_euclidean)
    throw std::invalid_argument("standardized_euclidean: model is not a StdEuclidean model");
  return model(x, y);
}

/// Sample covariance (N-1) of the training features; identity when N = 1.
inline Eigen::MatrixXd sample_covariance(std::span<const Instance> training) {
  const std::size_t n = training.front().features.size();
  const std::size_t count = training.size();
  if (count < 2) return Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd data(count, n);
  for (std::size_t r = 0; r < count; ++r)
    for (std::size_t c = 0; c < n; ++c) data(r, c) = training[r].features[c];
  const Eigen::RowVectorXd mean = data.colwise().mean();
  const Eigen::MatrixXd centered = data.rowwise() - mean;
  return (centered.transpose() * centered) / static_cast<double>(count - 1);
}

inline DistanceModel fit_distance_model(const DistanceSpec& spec,
                                        std::span<const Instance> training) {
  spec.validate();
  if (training.empty()) throw std::invalid_argument("fit_distance_model: empty training set");
  const std::size_t n = training.front().features.size();
  for (const auto& inst : training)
    if (inst.features.size() != n)
      throw std::invalid_argument("fit_distance_model: inconsistent feature count");

  switch (spec.kind) {
    case DistanceKind::mahalanobis: {
      DistanceModel m;
      m.spec_ = spec;
      m.dim_ = n;
      if (training.size() < 2) {
        Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
        m.inv_cov_.assign(eye.data(), eye.data() + n * n);
        return m;
      }
      Eigen::MatrixXd cov = sample_covariance(training);
      const double trace = cov.trace();
      const double eps = trace > 0.0 ? 1e-6 * trace / static_cast<double>(n) : 1e-6;
      cov.diagonal().array() += eps;
      Eigen::LLT<Eigen::MatrixXd> llt(cov);
      Eigen::MatrixXd inv;
      if (llt.info() == Eigen::Success) {
        inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
        inv = 0.5 * (inv + inv.transpose()).eval();
      }
      if (llt.info() != Eigen::Success || !inv.allFinite()) {
        inv = Eigen::MatrixXd::Identity(n, n);
        m.identity_fallback_ = true;
      }
      // Eigen is column-major; the matrix is symmetric so layout is moot.
      m.inv_cov_.assign(inv.data(), inv.data() + n * n);
      return m;
    }
    case DistanceKind::std_euclidean: {
      std::vector<double> var(n, 1.0);
      if (training.size() >= 2) {
        const auto count = static_cast<double>(training.size());
        for (std::size_t j = 0; j < n; ++j) {
          double mean = 0.0;
          for (const auto& inst : training) mean += inst.features[j];
          mean /= count;
          double ss = 0.0;
          for (const auto& inst : training) {
            const double d = inst.features[j] - mean;
            ss += d * d;
          }
          var[j] = ss / (count - 1.0);
        }
      }
      DistanceModel m = DistanceModel::standardized(std::move(var));
      m.spec_ = spec;
      return m;
    }
    default: return DistanceModel::stateless(spec);
  }
}

/// Single dispatch point: stateless kinds only.
inline double distance(const DistanceSpec& spec, std::span<const double> x,
                       std::span<const double> y) {
  return DistanceModel::stateless(spec)(x, y);
}

inline double distance(const DistanceModel& model, std::span<const double> x,
                       std::span<const double> y) {
  return model(x, y);
}

}  // namespace streamdist
