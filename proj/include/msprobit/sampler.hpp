#pragma once

#include <Eigen/Dense>
#include <vector>

#include "msprobit/distributions.hpp"
#include "msprobit/model.hpp"
#include "msprobit/random.hpp"

namespace msprobit {

/// Stored posterior draws from one or more chains.
struct DrawSet {
  std::vector<ParamDraw> draws;
  std::vector<int> chain_ids;
  std::vector<long> iterations;
  /// Per-scale MH bookkeeping summed over all sweeps of all chains.
  std::vector<long> accepted;
  std::vector<long> proposed;

  std::size_t size() const { return draws.size(); }
  bool empty() const { return draws.empty(); }
  /// accepted / proposed per scale.
  std::vector<double> accept_rate() const;
  /// Appends `other`, which must have the same shape.
  void append(const DrawSet& other);
};

/// beta | y*: Normal with precision Lambda0 + X'X and mean
/// (Lambda0 + X'X)^{-1} (Lambda0 mu0 + X'y*).
Eigen::VectorXd draw_beta(const LatentState& latent, const Dataset& dataset,
                          const Prior& prior, RandomStream& rng);

/// y*_i | beta, gamma ~ TN(x_i'beta, 1) on the interval of label y_i on scale
/// s_i. Throws NumericalError naming the observation on mass underflow.
LatentState draw_latents(const ParamDraw& params, const Dataset& dataset,
                         RandomStream& rng);

/// Sequential truncated-normal proposal: gamma'_c ~ TN(gamma_c, sd^2) on
/// (gamma'_{c-1}, gamma_{c+1}).
std::vector<double> propose_gammas(const std::vector<double>& current, double proposal_sd,
                                   RandomStream& rng);

/// Log MH acceptance ratio for moving one scale's thresholds from `current` to
/// `proposed`, with y* integrated out. `labels` and `linear_predictor` cover
/// the observations of that scale. Includes the truncated-proposal correction
/// and, when gamma_prior_variance > 0, the normal prior ratio. Returns -inf
/// when the reverse move is impossible.
double gamma_log_acceptance(const std::vector<double>& current,
                            const std::vector<double>& proposed, double proposal_sd,
                            const std::vector<int>& labels,
                            const Eigen::VectorXd& linear_predictor,
                            double gamma_prior_variance = 0.0);

struct GammaUpdate {
  std::vector<double> gamma;
  bool accepted = false;
};

/// One blocked Metropolis-Hastings update of a scale's thresholds given beta.
GammaUpdate mh_update_gammas(const ScaleSpec& scale, const std::vector<double>& current,
                             const Dataset& dataset, const Eigen::VectorXd& beta,
                             double proposal_sd, RandomStream& rng,
                             double gamma_prior_variance = 0.0);

/// Sampler state for one chain. Each sweep updates, in order: every scale's
/// thresholds (MH), every latent value, then beta.
class GibbsChain {
 public:
  /// Takes its own copy of the dataset. Throws ValidationError on a config
  /// mismatch.
  GibbsChain(Dataset dataset, const ChainConfig& config, RandomStream rng);

  void sweep();

  const ParamDraw& state() const { return state_; }
  const LatentState& latent() const { return latent_; }
  const Dataset& dataset() const { return dataset_; }
  long sweeps_done() const { return sweeps_; }
  const std::vector<long>& accepted() const { return accepted_; }
  const std::vector<long>& proposed() const { return proposed_; }

  void set_proposal_sd(std::vector<double> sd);
  const std::vector<double>& proposal_sd() const { return proposal_sd_; }
  /// Replace the observed labels (same scales). Used by joint-distribution
  /// tests that resimulate data between sweeps.
  void set_labels(std::vector<int> labels);
  void set_state(ParamDraw state);

 private:
  Dataset dataset_;
  Prior prior_;
  double gamma_prior_variance_;
  std::vector<double> proposal_sd_;
  RandomStream rng_;
  PrecisionNormal beta_conditional_;
  Eigen::VectorXd prior_shift_;  // Lambda0 * mu0
  std::vector<std::vector<Eigen::Index>> scale_rows_;
  ParamDraw state_;
  LatentState latent_;
  std::vector<long> accepted_;
  std::vector<long> proposed_;
  long sweeps_ = 0;
};

/// Runs burn_in + thinning * stored_draws sweeps and keeps every thinning-th
/// post-burn-in state. Chain id 1, seeded from config.seed.
DrawSet run_chain(const Dataset& dataset, const ChainConfig& config);

/// Chain c (1-based) uses stream RandomStream(config.seed).split(c); results
/// are concatenated in chain order. Chains run concurrently.
DrawSet run_chains(const Dataset& dataset, const ChainConfig& config, int num_chains);

struct ProposalTuning {
  std::vector<double> proposal_sd;
  /// Realized acceptance rate per window, per scale.
  std::vector<std::vector<double>> rate_trajectory;
};

inline constexpr int kTuningWindow = 200;
inline constexpr int kTuningMaxWindows = 20;

/// Pilot-run tuner: per 200-sweep window, scales the proposal sd up when the
/// acceptance rate is above target + 0.05 and down when below target - 0.05
/// (factor 2, square-rooted whenever the direction reverses) until every
/// scale is within tolerance. Throws NumericalError with the rate trajectory
/// after 20 windows without convergence.
ProposalTuning tune_proposal(const Dataset& dataset, const ChainConfig& config,
                             double target_rate = 0.234);

}  // namespace msprobit
