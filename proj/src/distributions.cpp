#include "msprobit/distributions.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "msprobit/errors.hpp"

namespace msprobit {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
const double kLogMinMass = std::log(1e-300);
const double kLogInverseCdfMass = std::log(1e-10);

// Phi on the extended real line, no argument checks.
double cdf_ext(double x) {
  if (x == -kInf) return 0.0;
  if (x == kInf) return 1.0;
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

// log(1 - exp(d)) for d <= 0.
double log1mexp(double d) {
  if (d > -std::numbers::ln2) return std::log(-std::expm1(d));
  return std::log1p(-std::exp(d));
}

std::string describe(double lo, double hi) {
  std::ostringstream os;
  os.precision(17);
  os << "(" << lo << ", " << hi << ")";
  return os.str();
}

// Standard truncated normal on (a, b) with negligible mass: a >= 0 after the
// caller's reflection, so the exponential proposal sits on the lower edge.
double sample_tail(double a, double b, RandomStream& rng) {
  if (a < 0.0) {
    // Narrow interval straddling zero; the density is nearly flat on it.
    for (;;) {
      const double z = a + rng.uniform() * (b - a);
      if (z <= a || z >= b) continue;
      if (std::log(rng.uniform()) < -0.5 * z * z) return z;
    }
  }
  const double rate = 0.5 * (a + std::sqrt(a * a + 4.0));
  const double width = b - a;
  const double peak = std::min(rate, b);
  const double truncation = std::isinf(width) ? 1.0 : -std::expm1(-rate * width);
  for (;;) {
    const double e = -std::log1p(-rng.uniform() * truncation) / rate;
    const double z = a + e;
    if (z <= a || z >= b) continue;
    const double log_accept =
        -0.5 * ((z - rate) * (z - rate) - (peak - rate) * (peak - rate));
    if (std::log(rng.uniform()) < log_accept) return z;
  }
}

double sample_inverse_cdf(double a, double b, RandomStream& rng) {
  for (;;) {
    const double pa = cdf_ext(a);
    const double pb = cdf_ext(b);
    const double u = pa + rng.uniform() * (pb - pa);
    if (u <= 0.0 || u >= 1.0) continue;
    const double z = std_normal_quantile(u);
    if (a < z && z < b) return z;
  }
}

}  // namespace

Interval::Interval(double lower, double upper) : lower_(lower), upper_(upper) {
  if (std::isnan(lower) || std::isnan(upper) || !(lower < upper)) {
    throw ValidationError("invalid interval " + describe(lower, upper) +
                          ": lower bound must be strictly below upper bound");
  }
}

double std_normal_cdf(double x) {
  if (!std::isfinite(x)) {
    throw ValidationError("std_normal_cdf: argument must be finite");
  }
  if (x >= 40.0) return 1.0;
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ValidationError("std_normal_quantile: probability must lie in (0, 1)");
  }
  if (p > 0.5) {
    return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * (1.0 - p));
  }
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double log_normal_cdf(double x) {
  if (std::isnan(x)) return x;
  if (x == -kInf) return -kInf;
  if (x == kInf) return 0.0;
  if (x > 5.0) return std::log1p(-0.5 * std::erfc(x * kInvSqrt2));
  if (x > -20.0) return std::log(0.5 * std::erfc(-x * kInvSqrt2));
  // Asymptotic expansion of the Mills ratio.
  const double inv_x2 = 1.0 / (x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 30; ++k) {
    term *= -(2.0 * k - 1.0) * inv_x2;
    sum += term;
    if (std::abs(term) < 1e-17 * sum) break;
  }
  return -0.5 * x * x - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) +
         std::log(sum);
}

double log_normal_interval_mass(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::numeric_limits<double>::quiet_NaN();
  if (!(a < b)) return -kInf;
  if (a >= 0.0) return log_normal_interval_mass(-b, -a);
  // From here a < 0.
  if (b > 0.0) {
    // Both excluded tails hold at most half the mass each.
    return std::log1p(-(cdf_ext(a) + cdf_ext(-b)));
  }
  const double log_b = log_normal_cdf(b);
  if (a == -kInf) return log_b;
  return log_b + log1mexp(log_normal_cdf(a) - log_b);
}

double sample_truncated_normal(double mean, double variance, const Interval& bounds,
                               RandomStream& rng) {
  if (!std::isfinite(mean)) {
    throw NumericalError("sample_truncated_normal: non-finite mean");
  }
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw ValidationError("sample_truncated_normal: variance must be positive and finite");
  }
  const double sd = std::sqrt(variance);
  double a = (bounds.lower() - mean) / sd;
  double b = (bounds.upper() - mean) / sd;
  const double log_mass = log_normal_interval_mass(a, b);
  if (!(log_mass >= kLogMinMass)) {
    std::ostringstream os;
    os.precision(17);
    os << "truncated normal with mean " << mean << " and sd " << sd
       << " has negligible mass on " << describe(bounds.lower(), bounds.upper())
       << " (log mass " << log_mass << ")";
    throw NumericalError(os.str());
  }

  // Reflect so the sampled interval sits on the accurate (lower) side for the
  // inverse CDF, or on the positive side for the tail sampler.
  bool reflect = false;
  const bool use_inverse_cdf = log_mass >= kLogInverseCdfMass;
  if (use_inverse_cdf ? a >= 0.0 : b <= 0.0) {
    reflect = true;
    std::swap(a, b);
    a = -a;
    b = -b;
  }

  for (int attempt = 0; attempt < 1000; ++attempt) {
    double z = use_inverse_cdf ? sample_inverse_cdf(a, b, rng) : sample_tail(a, b, rng);
    if (reflect) z = -z;
    const double x = mean + sd * z;
    if (bounds.contains(x)) return x;
  }
  // Interval narrower than the rounding of mean + sd * z.
  return std::isfinite(bounds.lower())
             ? std::nextafter(bounds.lower(), bounds.upper())
             : std::nextafter(bounds.upper(), bounds.lower());
}

PrecisionNormal::PrecisionNormal(const Eigen::MatrixXd& precision) {
  if (precision.rows() != precision.cols()) {
    throw NumericalError("precision matrix is not square");
  }
  if (!precision.isApprox(precision.transpose(), 1e-10) && precision.size() > 0) {
    throw NumericalError("precision matrix is not symmetric");
  }
  factor_.compute(precision);
  if (factor_.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(precision, Eigen::EigenvaluesOnly);
    std::ostringstream os;
    os << "Cholesky factorization failed: precision matrix is not positive definite";
    if (eig.info() == Eigen::Success) {
      const double lo = eig.eigenvalues().minCoeff();
      const double hi = eig.eigenvalues().maxCoeff();
      os << " (eigenvalues in [" << lo << ", " << hi << "], condition number "
         << (lo > 0.0 ? hi / lo : kInf) << ")";
    }
    throw NumericalError(os.str());
  }
}

Eigen::VectorXd PrecisionNormal::mean(const Eigen::VectorXd& precision_times_mean) const {
  return factor_.solve(precision_times_mean);
}

Eigen::VectorXd PrecisionNormal::sample(const Eigen::VectorXd& precision_times_mean,
                                        RandomStream& rng) const {
  if (precision_times_mean.size() != dim()) {
    throw ValidationError("sample_mvn_from_precision: dimension mismatch");
  }
  Eigen::VectorXd z(dim());
  for (Eigen::Index k = 0; k < dim(); ++k) z[k] = rng.normal();
  // Cov(L^{-T} z) = (L L^T)^{-1}.
  return mean(precision_times_mean) + factor_.matrixU().solve(z);
}

Eigen::VectorXd sample_mvn_from_precision(const Eigen::VectorXd& precision_times_mean,
                                          const Eigen::MatrixXd& precision,
                                          RandomStream& rng) {
  return PrecisionNormal(precision).sample(precision_times_mean, rng);
}

}  // namespace msprobit
