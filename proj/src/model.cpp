#include "msprobit/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace msprobit {

ScaleSpec::ScaleSpec(int scale_id, int num_classes)
    : scale_id_(scale_id), num_classes_(num_classes) {
  if (scale_id < 1) {
    throw ValidationError("scale id must be >= 1, got " + std::to_string(scale_id));
  }
  if (num_classes < 2) {
    throw ValidationError("scale " + std::to_string(scale_id) +
                          " must have at least 2 classes, got " +
                          std::to_string(num_classes));
  }
}

std::vector<Eigen::Index> Dataset::rows_on_scale(int scale_id) const {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < scale_ids.size(); ++i) {
    if (scale_ids[i] == scale_id) rows.push_back(static_cast<Eigen::Index>(i));
  }
  return rows;
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& rows) const {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), num_features());
  out.labels.reserve(rows.size());
  out.scale_ids.reserve(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto i = rows[k];
    out.features.row(static_cast<Eigen::Index>(k)) = features.row(i);
    out.labels.push_back(labels.at(static_cast<std::size_t>(i)));
    out.scale_ids.push_back(scale_ids.at(static_cast<std::size_t>(i)));
  }
  out.scales = scales;
  return out;
}

Dataset Dataset::single_scale(int scale_id) const {
  Dataset out = subset(rows_on_scale(scale_id));
  std::fill(out.scale_ids.begin(), out.scale_ids.end(), 1);
  out.scales = {ScaleSpec(1, scale(scale_id).num_classes())};
  return out;
}

namespace {

std::string join_violations(const std::vector<std::string>& v) {
  std::ostringstream os;
  os << "dataset failed validation (" << v.size() << " problem"
     << (v.size() == 1 ? "" : "s") << ")";
  for (const auto& line : v) os << "\n  " << line;
  return os.str();
}

}  // namespace

DatasetValidationError::DatasetValidationError(std::vector<std::string> violations)
    : ValidationError(join_violations(violations)), violations_(std::move(violations)) {}

Dataset validate_dataset(Dataset raw, const DatasetChecks& checks) {
  std::vector<std::string> problems;
  const auto n = static_cast<std::size_t>(raw.num_rows());
  if (raw.labels.size() != n || raw.scale_ids.size() != n) {
    std::ostringstream os;
    os << "dimension mismatch: " << n << " feature rows, " << raw.labels.size()
       << " labels, " << raw.scale_ids.size() << " scale ids";
    throw DatasetValidationError({os.str()});
  }
  for (std::size_t s = 0; s < raw.scales.size(); ++s) {
    if (raw.scales[s].scale_id() != static_cast<int>(s) + 1) {
      problems.push_back("scale declarations must be numbered 1.." +
                         std::to_string(raw.scales.size()) + " in order; position " +
                         std::to_string(s + 1) + " declares id " +
                         std::to_string(raw.scales[s].scale_id()));
    }
  }
  if (raw.scales.empty()) problems.emplace_back("no scales declared");
  if (n == 0) problems.emplace_back("dataset has no rows");
  if (raw.num_features() == 0) problems.emplace_back("dataset has no feature columns");

  for (std::size_t i = 0; i < n; ++i) {
    const int s = raw.scale_ids[i];
    if (s < 1 || s > raw.num_scales()) {
      problems.push_back("row " + std::to_string(i) + ": unknown scale id " +
                         std::to_string(s));
      continue;
    }
    const int c = raw.scales[static_cast<std::size_t>(s - 1)].num_classes();
    const int y = raw.labels[i];
    if (y < 1 || y > c) {
      problems.push_back("row " + std::to_string(i) + ": label " + std::to_string(y) +
                         " outside 1.." + std::to_string(c) + " on scale " +
                         std::to_string(s));
    }
  }
  if (!raw.features.allFinite()) {
    for (Eigen::Index i = 0; i < raw.num_rows(); ++i) {
      if (!raw.features.row(i).allFinite()) {
        problems.push_back("row " + std::to_string(i) + ": non-finite feature value");
      }
    }
  }
  if (!checks.allow_zero_columns && n > 0) {
    for (Eigen::Index k = 0; k < raw.num_features(); ++k) {
      if ((raw.features.col(k).array() == 0.0).all()) {
        problems.push_back("feature column " + std::to_string(k + 1) +
                           " is zero on every row (pass allow_zero_columns to keep it)");
      }
    }
  }
  if (!problems.empty()) throw DatasetValidationError(std::move(problems));
  return raw;
}

bool thresholds_ordered(const std::vector<double>& gamma) {
  for (std::size_t c = 0; c < gamma.size(); ++c) {
    if (!std::isfinite(gamma[c])) return false;
    if (c > 0 && !(gamma[c - 1] < gamma[c])) return false;
  }
  return true;
}

void check_thresholds(const ParamDraw& draw) {
  for (std::size_t s = 0; s < draw.gammas.size(); ++s) {
    if (!thresholds_ordered(draw.gammas[s])) {
      std::ostringstream os;
      os.precision(17);
      os << "thresholds for scale " << s + 1 << " are not strictly increasing:";
      for (double g : draw.gammas[s]) os << ' ' << g;
      throw NumericalError(os.str());
    }
  }
}

Interval label_interval(const std::vector<double>& gamma, int label) {
  const auto c = static_cast<std::size_t>(label);
  const double lo = c >= 2 ? gamma[c - 2] : -kInf;
  const double hi = c <= gamma.size() ? gamma[c - 1] : kInf;
  return {lo, hi};
}

int label_for_latent(const std::vector<double>& gamma, double y_star) {
  // Number of thresholds strictly below y_star.
  const auto it = std::lower_bound(gamma.begin(), gamma.end(), y_star);
  return static_cast<int>(it - gamma.begin()) + 1;
}

Prior Prior::isotropic(Eigen::Index p, double precision, double mean) {
  if (!(precision > 0.0) || !std::isfinite(precision)) {
    throw ValidationError("prior precision must be positive and finite");
  }
  return {Eigen::VectorXd::Constant(p, mean),
          precision * Eigen::MatrixXd::Identity(p, p)};
}

void Prior::validate() const {
  if (lambda0.rows() != lambda0.cols() || lambda0.rows() != mu0.size()) {
    throw ValidationError("prior mean and precision dimensions disagree");
  }
  if (!mu0.allFinite() || !lambda0.allFinite()) {
    throw ValidationError("prior has non-finite entries");
  }
  if (!lambda0.isApprox(lambda0.transpose(), 1e-12) && lambda0.size() > 0) {
    throw ValidationError("prior precision is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(lambda0);
  if (llt.info() != Eigen::Success) {
    throw ValidationError("prior precision is not positive definite");
  }
}

void ChainConfig::validate(const Dataset& dataset) const {
  prior.validate();
  if (prior.mu0.size() != dataset.num_features()) {
    throw ValidationError("prior dimension " + std::to_string(prior.mu0.size()) +
                          " does not match " + std::to_string(dataset.num_features()) +
                          " features");
  }
  if (static_cast<int>(proposal_sd.size()) != dataset.num_scales()) {
    throw ValidationError("need one proposal sd per scale: got " +
                          std::to_string(proposal_sd.size()) + " for " +
                          std::to_string(dataset.num_scales()) + " scales");
  }
  for (double sd : proposal_sd) {
    if (!(sd > 0.0) || !std::isfinite(sd)) {
      throw ValidationError("proposal sds must be positive and finite");
    }
  }
  if (burn_in < 0) throw ValidationError("burn_in must be >= 0");
  if (thinning < 1) throw ValidationError("thinning must be >= 1");
  if (stored_draws < 1) throw ValidationError("stored_draws must be >= 1");
  if (gamma_prior_variance < 0.0 || !std::isfinite(gamma_prior_variance)) {
    throw ValidationError("gamma_prior_variance must be >= 0");
  }
  if (init_beta && init_beta->size() != dataset.num_features()) {
    throw ValidationError("init_beta has the wrong length");
  }
  if (init_gammas) {
    if (static_cast<int>(init_gammas->size()) != dataset.num_scales()) {
      throw ValidationError("init_gammas needs one vector per scale");
    }
    for (int s = 1; s <= dataset.num_scales(); ++s) {
      const auto& g = (*init_gammas)[static_cast<std::size_t>(s - 1)];
      if (static_cast<int>(g.size()) != dataset.scale(s).num_thresholds()) {
        throw ValidationError("init_gammas for scale " + std::to_string(s) +
                              " has the wrong length");
      }
      if (!thresholds_ordered(g)) {
        throw ValidationError("init_gammas for scale " + std::to_string(s) +
                              " is not strictly increasing");
      }
    }
  }
}

ParamDraw default_init(const Dataset& dataset, const Prior& prior) {
  ParamDraw init;
  init.beta = prior.mu0;
  for (const auto& scale : dataset.scales) {
    std::vector<long> counts(static_cast<std::size_t>(scale.num_classes()), 0);
    long total = 0;
    for (std::size_t i = 0; i < dataset.labels.size(); ++i) {
      if (dataset.scale_ids[i] != scale.scale_id()) continue;
      ++counts[static_cast<std::size_t>(dataset.labels[i] - 1)];
      ++total;
    }
    for (std::size_t c = 0; c < counts.size(); ++c) {
      if (counts[c] == 0) {
        throw ValidationError(
            "cannot initialise thresholds for scale " + std::to_string(scale.scale_id()) +
            ": class " + std::to_string(c + 1) +
            " has no observations (use evenly spaced thresholds on [-1, 1] instead)");
      }
    }
    std::vector<double> gamma;
    long cumulative = 0;
    for (int c = 0; c < scale.num_thresholds(); ++c) {
      cumulative += counts[static_cast<std::size_t>(c)];
      double g = std_normal_quantile(static_cast<double>(cumulative) /
                                     static_cast<double>(total));
      if (!gamma.empty() && g <= gamma.back()) g = gamma.back() + 1e-3;
      gamma.push_back(g);
    }
    init.gammas.push_back(std::move(gamma));
  }
  return init;
}

std::vector<double> evenly_spaced_thresholds(int num_classes) {
  const int k = num_classes - 1;
  if (k < 1) throw ValidationError("need at least 2 classes");
  if (k == 1) return {0.0};
  std::vector<double> out(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) out[static_cast<std::size_t>(c)] = -1.0 + 2.0 * c / (k - 1);
  return out;
}

}  // namespace msprobit

namespace msprobit {

Standardizer Standardizer::fit(const Eigen::MatrixXd& features,
                               const std::vector<Eigen::Index>& rows) {
  if (rows.size() < 2) throw ValidationError("standardization needs at least 2 rows");
  const auto p = features.cols();
  Standardizer out{Eigen::RowVectorXd::Zero(p), Eigen::RowVectorXd::Ones(p)};
  for (auto i : rows) out.mean += features.row(i);
  out.mean /= static_cast<double>(rows.size());
  Eigen::RowVectorXd ss = Eigen::RowVectorXd::Zero(p);
  for (auto i : rows) ss += (features.row(i) - out.mean).array().square().matrix();
  for (Eigen::Index k = 0; k < p; ++k) {
    const double sd = std::sqrt(ss[k] / static_cast<double>(rows.size() - 1));
    if (sd > 0.0) out.scale[k] = sd;
  }
  return out;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& features) const {
  return ((features.rowwise() - mean).array().rowwise() / scale.array()).matrix();
}

}  // namespace msprobit
