#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "msprobit/model.hpp"
#include "msprobit/random.hpp"
#include "msprobit/sampler.hpp"

namespace msprobit {

/// Ground truth and data from one simulation. Per-scale vectors are indexed
/// by scale id - 1.
struct SimTruth {
  Eigen::VectorXd beta_true;
  std::vector<std::vector<double>> gammas_true;
  std::vector<Eigen::VectorXd> y_star_true;
  std::vector<Eigen::MatrixXd> features;
  std::vector<std::vector<int>> labels;

  int num_scales() const { return static_cast<int>(gammas_true.size()); }
  /// All scales stacked in scale order, tagged with scale ids 1..S.
  Dataset pooled() const;
};

/// Labels for y* = X beta + N(0, 1) against `gamma`; y* is written to
/// `y_star` when given.
std::vector<int> simulate_labels(const Eigen::MatrixXd& features, const Eigen::VectorXd& beta,
                                 const std::vector<double>& gamma, RandomStream& rng,
                                 Eigen::VectorXd* y_star = nullptr);

inline constexpr double kSimThresholdVariance = 5.0;
inline constexpr int kSimMaxRedraws = 10000;

/// Synthetic multi-scale data. beta ~ N_p(0, I) once; per scale, X has iid
/// N(0, 1) entries, thresholds are iid N(0, 5) sorted ascending, and
/// thresholds and labels are redrawn until every class has at least
/// `min_per_class` observations. Throws ValidationError after 10^4 consecutive
/// rejected redraws.
SimTruth simulate_dataset(int num_scales, int n, int p, const std::vector<int>& num_thresholds,
                          int min_per_class, RandomStream& rng);

/// sqrt(mean((estimate - truth)^2)). Throws ValidationError on length mismatch.
double rmse(std::span<const double> estimate, std::span<const double> truth);
double rmse(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth);

/// Replicated comparison of single-scale fits against one multi-scale fit.
struct ExperimentSpec {
  int replications = 500;
  int n = 400;
  int p = 48;
  std::vector<int> num_thresholds{1, 3, 3};
  int min_per_class = 1;
  double prior_precision = 1.0;
  std::vector<double> proposal_sd;
  int burn_in = 50000;
  int thinning = 100;
  int stored_draws = 500;
  int chains = 1;
  std::uint64_t seed = 1;

  int num_scales() const { return static_cast<int>(num_thresholds.size()); }
  void validate() const;
};

inline const std::string kModelSingle = "single";
inline const std::string kModelMulti = "multi";
inline const std::string kMetricBetaRmse = "beta_rmse";
inline const std::string kMetricGammaRmse = "gamma_rmse";

/// Posterior mean of a per-draw RMSE for one (replication, model, scale).
struct RmseSummaryRow {
  int replication;
  std::string model;
  int scale;
  std::string metric;
  double value;
};

struct RmseDrawRow {
  int replication;
  std::string model;
  int scale;
  std::string metric;
  long draw;
  double value;
};

struct RmseRatioRow {
  int replication;
  int scale;
  std::string metric;
  double mean_multi;
  double mean_single;
  double ratio;  // mean_multi / mean_single
};

struct FailureRow {
  int replication;
  std::string message;
};

/// Rows are ordered by replication, then scale, then model (single before
/// multi), then metric (beta before gamma).
struct ExperimentReport {
  std::vector<RmseSummaryRow> summary;
  std::vector<RmseDrawRow> draws;
  std::vector<RmseRatioRow> ratios;
  std::vector<FailureRow> failures;
};

/// Per-draw RMSE against the truth. `draw_scale` picks which threshold vector
/// of each draw is compared.
std::vector<double> beta_rmse_per_draw(const DrawSet& draws, const Eigen::VectorXd& truth);
std::vector<double> gamma_rmse_per_draw(const DrawSet& draws, int draw_scale,
                                        const std::vector<double>& truth);

/// For each replication: simulate, fit one single-scale model per scale and
/// one multi-scale model, and record per-draw RMSEs. Replications run
/// concurrently; failed replications are listed in `failures` and skipped.
ExperimentReport run_experiment(const ExperimentSpec& spec);

}  // namespace msprobit
