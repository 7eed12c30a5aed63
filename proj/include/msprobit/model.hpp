#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msprobit/distributions.hpp"
#include "msprobit/errors.hpp"

namespace msprobit {

/// One ordinal annotation scale. Scale ids and class labels are 1-based.
class ScaleSpec {
 public:
  /// Throws ValidationError when num_classes < 2 or scale_id < 1.
  ScaleSpec(int scale_id, int num_classes);

  int scale_id() const { return scale_id_; }
  int num_classes() const { return num_classes_; }
  int num_thresholds() const { return num_classes_ - 1; }

  friend bool operator==(const ScaleSpec&, const ScaleSpec&) = default;

 private:
  int scale_id_;
  int num_classes_;
};

/// Observations pooled across scales. Row i has label labels[i] on scale
/// scale_ids[i]; scales[s - 1] describes scale id s.
struct Dataset {
  Eigen::MatrixXd features;
  std::vector<int> labels;
  std::vector<int> scale_ids;
  std::vector<ScaleSpec> scales;

  Eigen::Index num_rows() const { return features.rows(); }
  Eigen::Index num_features() const { return features.cols(); }
  int num_scales() const { return static_cast<int>(scales.size()); }
  const ScaleSpec& scale(int scale_id) const { return scales.at(scale_id - 1); }

  /// Row indices observed on `scale_id`, ascending.
  std::vector<Eigen::Index> rows_on_scale(int scale_id) const;
  /// Rows in the given order; keeps every declared scale.
  Dataset subset(const std::vector<Eigen::Index>& rows) const;
  /// Rows of one scale, renumbered as the only scale (id 1).
  Dataset single_scale(int scale_id) const;
};

/// Thrown by validate_dataset; carries every violation found.
class DatasetValidationError : public ValidationError {
 public:
  explicit DatasetValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

struct DatasetChecks {
  /// Accept feature columns that are zero on every row.
  bool allow_zero_columns = false;
};

/// Returns `raw` unchanged when every dataset invariant holds, otherwise throws
/// DatasetValidationError listing all violations with row indices (0-based
/// data rows).
Dataset validate_dataset(Dataset raw, const DatasetChecks& checks = {});

/// One posterior draw: shared coefficients plus one increasing threshold vector
/// per scale.
struct ParamDraw {
  Eigen::VectorXd beta;
  std::vector<std::vector<double>> gammas;

  friend bool operator==(const ParamDraw&, const ParamDraw&) = default;
};

/// True when every threshold vector is strictly increasing and finite.
bool thresholds_ordered(const std::vector<double>& gamma);
/// Throws NumericalError when any scale's thresholds are not strictly increasing.
void check_thresholds(const ParamDraw& draw);

/// (gamma_{label-1}, gamma_label) with gamma_0 = -inf and gamma_C = +inf.
Interval label_interval(const std::vector<double>& gamma, int label);
/// Class whose interval contains y_star (upper bound inclusive).
int label_for_latent(const std::vector<double>& gamma, double y_star);

struct LatentState {
  Eigen::VectorXd y_star;
};

/// Normal prior on beta, stored by precision.
struct Prior {
  Eigen::VectorXd mu0;
  Eigen::MatrixXd lambda0;

  static Prior isotropic(Eigen::Index p, double precision, double mean = 0.0);
  /// Throws ValidationError unless lambda0 is symmetric positive definite.
  void validate() const;
};

struct ChainConfig {
  Prior prior;
  /// MH proposal standard deviation per scale.
  std::vector<double> proposal_sd;
  int burn_in = 50000;
  int thinning = 100;
  int stored_draws = 500;
  std::uint64_t seed = 0;
  std::optional<Eigen::VectorXd> init_beta;
  std::optional<std::vector<std::vector<double>>> init_gammas;
  /// Variance of the iid normal prior on each threshold (restricted to the
  /// ordered region). Zero means the flat prior on the ordered region.
  double gamma_prior_variance = 0.0;

  long total_sweeps() const {
    return static_cast<long>(burn_in) + static_cast<long>(thinning) * stored_draws;
  }
  /// Throws ValidationError when the config does not fit `dataset`.
  void validate(const Dataset& dataset) const;
};

/// Starting point: beta = prior mean, thresholds at normal quantiles of the
/// cumulative class frequencies. Throws ValidationError for a scale with an
/// empty class.
ParamDraw default_init(const Dataset& dataset, const Prior& prior);

/// num_classes - 1 thresholds evenly spaced on [-1, 1].
std::vector<double> evenly_spaced_thresholds(int num_classes);

}  // namespace msprobit

namespace msprobit {

/// Per-column centering and scaling estimated from a chosen set of rows.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  /// Mean and sample sd of each column over `rows` only. Columns with zero
  /// spread keep scale 1.
  static Standardizer fit(const Eigen::MatrixXd& features,
                          const std::vector<Eigen::Index>& rows);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& features) const;
};

}  // namespace msprobit
