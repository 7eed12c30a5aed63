#pragma once

#include <Eigen/Dense>
#include <limits>

#include "msprobit/random.hpp"

namespace msprobit {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Open interval (lower, upper) on the extended real line.
class Interval {
 public:
  /// Throws ValidationError unless lower < upper and neither is NaN.
  Interval(double lower, double upper);

  static Interval whole() { return {-kInf, kInf}; }

  double lower() const { return lower_; }
  double upper() const { return upper_; }
  bool contains(double x) const { return lower_ < x && x < upper_; }

 private:
  double lower_;
  double upper_;
};

/// Standard normal CDF. Throws ValidationError for non-finite x.
double std_normal_cdf(double x);

/// Inverse of std_normal_cdf. Throws ValidationError unless 0 < p < 1.
double std_normal_quantile(double p);

/// log Phi(x) for any x including +/-inf, accurate deep into the lower tail.
double log_normal_cdf(double x);

/// log(Phi(b) - Phi(a)) for a < b on the extended real line. Evaluated on
/// whichever tail keeps both CDF terms small, so it does not cancel or
/// underflow for intervals far from the origin.
double log_normal_interval_mass(double a, double b);

/// Draw from N(mean, variance) restricted to `bounds`.
///
/// Uses the inverse CDF when the interval holds at least 1e-10 of the mass
/// and exponential-proposal rejection in the tail otherwise. The result is
/// strictly inside the bounds. Throws NumericalError naming the bounds when
/// the interval mass is below 1e-300.
double sample_truncated_normal(double mean, double variance, const Interval& bounds,
                               RandomStream& rng);

/// Draw from N(precision^{-1} * precision_times_mean, precision^{-1}) using one
/// Cholesky factorization. Throws NumericalError when `precision` is not SPD.
Eigen::VectorXd sample_mvn_from_precision(const Eigen::VectorXd& precision_times_mean,
                                          const Eigen::MatrixXd& precision,
                                          RandomStream& rng);

/// Cached factorization for repeated draws with a fixed precision matrix.
class PrecisionNormal {
 public:
  explicit PrecisionNormal(const Eigen::MatrixXd& precision);

  Eigen::Index dim() const { return factor_.rows(); }
  Eigen::VectorXd mean(const Eigen::VectorXd& precision_times_mean) const;
  Eigen::VectorXd sample(const Eigen::VectorXd& precision_times_mean,
                         RandomStream& rng) const;

 private:
  Eigen::LLT<Eigen::MatrixXd> factor_;
};

}  // namespace msprobit
