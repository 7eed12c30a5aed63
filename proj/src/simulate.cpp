#include "msprobit/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "msprobit/errors.hpp"
#include "parallel.hpp"

namespace msprobit {

Dataset SimTruth::pooled() const {
  Eigen::Index rows = 0;
  for (const auto& x : features) rows += x.rows();
  Dataset out;
  out.features.resize(rows, beta_true.size());
  Eigen::Index offset = 0;
  for (int s = 1; s <= num_scales(); ++s) {
    const auto idx = static_cast<std::size_t>(s - 1);
    const auto& x = features[idx];
    out.features.middleRows(offset, x.rows()) = x;
    offset += x.rows();
    out.labels.insert(out.labels.end(), labels[idx].begin(), labels[idx].end());
    out.scale_ids.insert(out.scale_ids.end(), labels[idx].size(), s);
    out.scales.emplace_back(s, static_cast<int>(gammas_true[idx].size()) + 1);
  }
  return out;
}

std::vector<int> simulate_labels(const Eigen::MatrixXd& features, const Eigen::VectorXd& beta,
                                 const std::vector<double>& gamma, RandomStream& rng,
                                 Eigen::VectorXd* y_star) {
  const Eigen::VectorXd eta = features * beta;
  std::vector<int> labels(static_cast<std::size_t>(eta.size()));
  if (y_star) y_star->resize(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double latent = eta[i] + rng.normal();
    labels[static_cast<std::size_t>(i)] = label_for_latent(gamma, latent);
    if (y_star) (*y_star)[i] = latent;
  }
  return labels;
}

SimTruth simulate_dataset(int num_scales, int n, int p, const std::vector<int>& num_thresholds,
                          int min_per_class, RandomStream& rng) {
  if (num_scales < 1 || static_cast<int>(num_thresholds.size()) != num_scales) {
    throw ValidationError("simulate_dataset: need one threshold count per scale");
  }
  if (p < 1 || min_per_class < 1) {
    throw ValidationError("simulate_dataset: p and min_per_class must be >= 1");
  }
  const int max_classes = *std::max_element(num_thresholds.begin(), num_thresholds.end()) + 1;
  if (*std::min_element(num_thresholds.begin(), num_thresholds.end()) < 1) {
    throw ValidationError("simulate_dataset: every scale needs at least one threshold");
  }
  if (static_cast<long>(n) < static_cast<long>(min_per_class) * max_classes) {
    throw ValidationError("simulate_dataset: n = " + std::to_string(n) +
                          " cannot hold " + std::to_string(min_per_class) +
                          " observations for each of " + std::to_string(max_classes) +
                          " classes");
  }

  SimTruth truth;
  truth.beta_true.resize(p);
  for (int k = 0; k < p; ++k) truth.beta_true[k] = rng.normal();

  const double threshold_sd = std::sqrt(kSimThresholdVariance);
  for (int s = 0; s < num_scales; ++s) {
    Eigen::MatrixXd x(n, p);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < p; ++k) x(i, k) = rng.normal();
    }
    const int k_thresholds = num_thresholds[static_cast<std::size_t>(s)];
    std::vector<double> gamma(static_cast<std::size_t>(k_thresholds));
    std::vector<int> labels;
    Eigen::VectorXd y_star;
    bool ok = false;
    for (int attempt = 0; attempt < kSimMaxRedraws && !ok; ++attempt) {
      for (auto& g : gamma) g = threshold_sd * rng.normal();
      std::sort(gamma.begin(), gamma.end());
      if (std::adjacent_find(gamma.begin(), gamma.end()) != gamma.end()) continue;
      labels = simulate_labels(x, truth.beta_true, gamma, rng, &y_star);
      std::vector<int> counts(static_cast<std::size_t>(k_thresholds) + 1, 0);
      for (int y : labels) ++counts[static_cast<std::size_t>(y - 1)];
      ok = std::all_of(counts.begin(), counts.end(),
                       [&](int c) { return c >= min_per_class; });
    }
    if (!ok) {
      throw ValidationError("simulate_dataset: scale " + std::to_string(s + 1) + " failed to get " +
                            std::to_string(min_per_class) + " observations per class in " +
                            std::to_string(kSimMaxRedraws) +
                            " threshold draws; use a larger n or fewer classes");
    }
    truth.features.push_back(std::move(x));
    truth.gammas_true.push_back(gamma);
    truth.labels.push_back(std::move(labels));
    truth.y_star_true.push_back(std::move(y_star));
  }
  return truth;
}

double rmse(std::span<const double> estimate, std::span<const double> truth) {
  if (estimate.size() != truth.size()) {
    throw ValidationError("rmse: length mismatch (" + std::to_string(estimate.size()) +
                          " vs " + std::to_string(truth.size()) + ")");
  }
  if (estimate.empty()) throw ValidationError("rmse: empty vectors");
  double ss = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const double d = estimate[i] - truth[i];
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(estimate.size()));
}

double rmse(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth) {
  return rmse(std::span<const double>(estimate.data(), static_cast<std::size_t>(estimate.size())),
              std::span<const double>(truth.data(), static_cast<std::size_t>(truth.size())));
}

std::vector<double> beta_rmse_per_draw(const DrawSet& draws, const Eigen::VectorXd& truth) {
  std::vector<double> out;
  out.reserve(draws.size());
  for (const auto& d : draws.draws) out.push_back(rmse(d.beta, truth));
  return out;
}

std::vector<double> gamma_rmse_per_draw(const DrawSet& draws, int draw_scale,
                                        const std::vector<double>& truth) {
  std::vector<double> out;
  out.reserve(draws.size());
  for (const auto& d : draws.draws) {
    out.push_back(rmse(d.gammas.at(static_cast<std::size_t>(draw_scale - 1)), truth));
  }
  return out;
}

void ExperimentSpec::validate() const {
  if (replications < 1) throw ValidationError("replications must be >= 1");
  if (num_thresholds.empty()) throw ValidationError("num_thresholds must list every scale");
  if (static_cast<int>(proposal_sd.size()) != num_scales()) {
    throw ValidationError("proposal_sd needs one entry per scale");
  }
  if (chains < 1) throw ValidationError("chains must be >= 1");
  if (!(prior_precision > 0.0)) throw ValidationError("prior_precision must be positive");
}

namespace {

struct ReplicationResult {
  std::vector<RmseSummaryRow> summary;
  std::vector<RmseDrawRow> draws;
  std::vector<RmseRatioRow> ratios;
};

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

ReplicationResult run_replication(const ExperimentSpec& spec, int replication) {
  const RandomStream rep = RandomStream(spec.seed).split(static_cast<std::uint64_t>(replication));
  RandomStream sim_rng = rep.split(0);
  const SimTruth truth =
      simulate_dataset(spec.num_scales(), spec.n, spec.p, spec.num_thresholds,
                       spec.min_per_class, sim_rng);
  const Dataset pooled = truth.pooled();

  ChainConfig config;
  config.prior = Prior::isotropic(spec.p, spec.prior_precision);
  config.burn_in = spec.burn_in;
  config.thinning = spec.thinning;
  config.stored_draws = spec.stored_draws;

  ChainConfig multi_config = config;
  multi_config.proposal_sd = spec.proposal_sd;
  multi_config.seed = rep.split(1).seed();
  const DrawSet multi = run_chains(pooled, multi_config, spec.chains);

  ReplicationResult out;
  for (int s = 1; s <= spec.num_scales(); ++s) {
    const auto idx = static_cast<std::size_t>(s - 1);
    ChainConfig single_config = config;
    single_config.proposal_sd = {spec.proposal_sd[idx]};
    single_config.seed = rep.split(1 + static_cast<std::uint64_t>(s)).seed();
    const DrawSet single = run_chains(pooled.single_scale(s), single_config, spec.chains);

    double means[2][2] = {};
    const std::pair<const std::string*, const DrawSet*> models[2] = {{&kModelSingle, &single},
                                                                    {&kModelMulti, &multi}};
    for (int m = 0; m < 2; ++m) {
      const auto& [name, draws] = models[m];
      const int draw_scale = m == 0 ? 1 : s;
      const std::vector<double> per_metric[2] = {
          beta_rmse_per_draw(*draws, truth.beta_true),
          gamma_rmse_per_draw(*draws, draw_scale, truth.gammas_true[idx])};
      const std::string* metric_names[2] = {&kMetricBetaRmse, &kMetricGammaRmse};
      for (int k = 0; k < 2; ++k) {
        means[m][k] = mean_of(per_metric[k]);
        out.summary.push_back({replication, *name, s, *metric_names[k], means[m][k]});
        for (std::size_t d = 0; d < per_metric[k].size(); ++d) {
          out.draws.push_back({replication, *name, s, *metric_names[k],
                               static_cast<long>(d) + 1, per_metric[k][d]});
        }
      }
    }
    out.ratios.push_back({replication, s, kMetricBetaRmse, means[1][0], means[0][0],
                          means[1][0] / means[0][0]});
    out.ratios.push_back({replication, s, kMetricGammaRmse, means[1][1], means[0][1],
                          means[1][1] / means[0][1]});
  }
  return out;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<ReplicationResult> results(static_cast<std::size_t>(spec.replications));
  const auto errors = detail::parallel_for(results.size(), [&](std::size_t r) {
    results[r] = run_replication(spec, static_cast<int>(r) + 1);
  });

  ExperimentReport report;
  for (std::size_t r = 0; r < results.size(); ++r) {
    if (errors[r]) {
      std::string message;
      try {
        std::rethrow_exception(errors[r]);
      } catch (const std::exception& e) {
        message = e.what();
      } catch (...) {
        message = "unknown error";
      }
      report.failures.push_back({static_cast<int>(r) + 1, message});
      continue;
    }
    auto& res = results[r];
    report.summary.insert(report.summary.end(), res.summary.begin(), res.summary.end());
    report.draws.insert(report.draws.end(), res.draws.begin(), res.draws.end());
    report.ratios.insert(report.ratios.end(), res.ratios.begin(), res.ratios.end());
  }
  return report;
}

}  // namespace msprobit
