#include "msprobit/sampler.hpp"

#include <cmath>
#include <sstream>

#include "parallel.hpp"

namespace msprobit {

namespace {

std::string dump_vector(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ']';
  return os.str();
}

std::string dump_vector(const Eigen::VectorXd& v) {
  return dump_vector(std::vector<double>(v.data(), v.data() + v.size()));
}

double threshold_or(const std::vector<double>& g, std::ptrdiff_t c, double fallback) {
  if (c < 0 || c >= static_cast<std::ptrdiff_t>(g.size())) return fallback;
  return g[static_cast<std::size_t>(c)];
}

double log_label_mass(const std::vector<double>& gamma, int label, double eta) {
  const auto c = static_cast<std::ptrdiff_t>(label);
  return log_normal_interval_mass(threshold_or(gamma, c - 2, -kInf) - eta,
                                  threshold_or(gamma, c - 1, kInf) - eta);
}

GammaUpdate mh_step(int scale_id, const std::vector<double>& current,
                    const std::vector<int>& labels, const Eigen::VectorXd& eta,
                    double proposal_sd, double gamma_prior_variance, RandomStream& rng) {
  GammaUpdate out;
  std::vector<double> proposed = propose_gammas(current, proposal_sd, rng);
  const double log_ratio = gamma_log_acceptance(current, proposed, proposal_sd, labels, eta,
                                                gamma_prior_variance);
  const double log_u = std::log(rng.uniform());
  if (std::isnan(log_ratio)) {
    std::ostringstream os;
    os << "MH threshold update on scale " << scale_id
       << " hit a zero-probability current state (log acceptance ratio is NaN)"
       << "\n  current thresholds:  " << dump_vector(current)
       << "\n  proposed thresholds: " << dump_vector(proposed)
       << "\n  proposal sd: " << proposal_sd
       << "\n  linear predictor range: [" << (eta.size() ? eta.minCoeff() : 0.0) << ", "
       << (eta.size() ? eta.maxCoeff() : 0.0) << "] over " << eta.size() << " observations";
    throw NumericalError(os.str());
  }
  if (log_u < log_ratio) {
    out.gamma = std::move(proposed);
    out.accepted = true;
  } else {
    out.gamma = current;
  }
  return out;
}

Eigen::MatrixXd posterior_precision(const Dataset& dataset, const ChainConfig& config) {
  config.validate(dataset);
  return config.prior.lambda0 + dataset.features.transpose() * dataset.features;
}

}  // namespace

std::vector<double> DrawSet::accept_rate() const {
  std::vector<double> rate(accepted.size(), 0.0);
  for (std::size_t s = 0; s < accepted.size(); ++s) {
    if (proposed[s] > 0) {
      rate[s] = static_cast<double>(accepted[s]) / static_cast<double>(proposed[s]);
    }
  }
  return rate;
}

void DrawSet::append(const DrawSet& other) {
  if (!draws.empty() && !other.draws.empty()) {
    const auto& a = draws.front();
    const auto& b = other.draws.front();
    bool same = a.beta.size() == b.beta.size() && a.gammas.size() == b.gammas.size();
    for (std::size_t s = 0; same && s < a.gammas.size(); ++s) {
      same = a.gammas[s].size() == b.gammas[s].size();
    }
    if (!same) throw ValidationError("cannot combine draw sets of different shapes");
  }
  draws.insert(draws.end(), other.draws.begin(), other.draws.end());
  chain_ids.insert(chain_ids.end(), other.chain_ids.begin(), other.chain_ids.end());
  iterations.insert(iterations.end(), other.iterations.begin(), other.iterations.end());
  if (accepted.empty()) {
    accepted = other.accepted;
    proposed = other.proposed;
  } else {
    for (std::size_t s = 0; s < accepted.size() && s < other.accepted.size(); ++s) {
      accepted[s] += other.accepted[s];
      proposed[s] += other.proposed[s];
    }
  }
}

Eigen::VectorXd draw_beta(const LatentState& latent, const Dataset& dataset,
                          const Prior& prior, RandomStream& rng) {
  const auto& x = dataset.features;
  if (latent.y_star.size() != x.rows()) {
    throw ValidationError("draw_beta: latent vector length does not match the data");
  }
  const Eigen::MatrixXd precision = prior.lambda0 + x.transpose() * x;
  const Eigen::VectorXd shift = prior.lambda0 * prior.mu0 + x.transpose() * latent.y_star;
  return sample_mvn_from_precision(shift, precision, rng);
}

LatentState draw_latents(const ParamDraw& params, const Dataset& dataset,
                         RandomStream& rng) {
  const Eigen::VectorXd eta = dataset.features * params.beta;
  LatentState out{Eigen::VectorXd(eta.size())};
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const auto row = static_cast<std::size_t>(i);
    const int s = dataset.scale_ids[row];
    const int y = dataset.labels[row];
    try {
      out.y_star[i] = sample_truncated_normal(
          eta[i], 1.0, label_interval(params.gammas[static_cast<std::size_t>(s - 1)], y), rng);
    } catch (const NumericalError& e) {
      throw NumericalError("latent draw for observation " + std::to_string(i) + " (scale " +
                           std::to_string(s) + ", label " + std::to_string(y) +
                           "): " + e.what());
    }
  }
  return out;
}

std::vector<double> propose_gammas(const std::vector<double>& current, double proposal_sd,
                                   RandomStream& rng) {
  const auto k = static_cast<std::ptrdiff_t>(current.size());
  std::vector<double> proposed(current.size());
  const double variance = proposal_sd * proposal_sd;
  for (std::ptrdiff_t c = 0; c < k; ++c) {
    const double lower = c > 0 ? proposed[static_cast<std::size_t>(c - 1)] : -kInf;
    const double upper = threshold_or(current, c + 1, kInf);
    proposed[static_cast<std::size_t>(c)] = sample_truncated_normal(
        current[static_cast<std::size_t>(c)], variance, Interval(lower, upper), rng);
  }
  return proposed;
}

double gamma_log_acceptance(const std::vector<double>& current,
                            const std::vector<double>& proposed, double proposal_sd,
                            const std::vector<int>& labels,
                            const Eigen::VectorXd& linear_predictor,
                            double gamma_prior_variance) {
  const auto k = static_cast<std::ptrdiff_t>(current.size());
  // The reverse proposal draws gamma_c below gamma'_{c+1}; outside that
  // support the move cannot be reversed.
  for (std::ptrdiff_t c = 0; c + 1 < k; ++c) {
    if (!(current[static_cast<std::size_t>(c)] < proposed[static_cast<std::size_t>(c + 1)])) {
      return -kInf;
    }
  }

  double log_ratio = 0.0;
  bool proposed_impossible = false;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double eta = linear_predictor[static_cast<Eigen::Index>(i)];
    const double now = log_label_mass(current, labels[i], eta);
    if (!std::isfinite(now)) return std::numeric_limits<double>::quiet_NaN();
    const double next = log_label_mass(proposed, labels[i], eta);
    if (next == -kInf) proposed_impossible = true;
    log_ratio += next - now;
  }
  if (proposed_impossible) return -kInf;

  for (std::ptrdiff_t c = 0; c < k; ++c) {
    const double g = current[static_cast<std::size_t>(c)];
    const double g_new = proposed[static_cast<std::size_t>(c)];
    const double forward = log_normal_interval_mass(
        (threshold_or(proposed, c - 1, -kInf) - g) / proposal_sd,
        (threshold_or(current, c + 1, kInf) - g) / proposal_sd);
    const double reverse = log_normal_interval_mass(
        (threshold_or(current, c - 1, -kInf) - g_new) / proposal_sd,
        (threshold_or(proposed, c + 1, kInf) - g_new) / proposal_sd);
    log_ratio += forward - reverse;
  }

  if (gamma_prior_variance > 0.0) {
    double sq_now = 0.0;
    double sq_new = 0.0;
    for (std::ptrdiff_t c = 0; c < k; ++c) {
      sq_now += current[static_cast<std::size_t>(c)] * current[static_cast<std::size_t>(c)];
      sq_new += proposed[static_cast<std::size_t>(c)] * proposed[static_cast<std::size_t>(c)];
    }
    log_ratio -= 0.5 * (sq_new - sq_now) / gamma_prior_variance;
  }
  return log_ratio;
}

GammaUpdate mh_update_gammas(const ScaleSpec& scale, const std::vector<double>& current,
                             const Dataset& dataset, const Eigen::VectorXd& beta,
                             double proposal_sd, RandomStream& rng,
                             double gamma_prior_variance) {
  if (!thresholds_ordered(current) ||
      static_cast<int>(current.size()) != scale.num_thresholds()) {
    throw ValidationError("mh_update_gammas: current thresholds must be strictly increasing "
                          "with one entry per threshold");
  }
  const auto rows = dataset.rows_on_scale(scale.scale_id());
  std::vector<int> labels;
  Eigen::VectorXd eta(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    labels.push_back(dataset.labels[static_cast<std::size_t>(rows[k])]);
    eta[static_cast<Eigen::Index>(k)] = dataset.features.row(rows[k]).dot(beta);
  }
  return mh_step(scale.scale_id(), current, labels, eta, proposal_sd, gamma_prior_variance,
                 rng);
}

GibbsChain::GibbsChain(Dataset dataset, const ChainConfig& config, RandomStream rng)
    : dataset_(validate_dataset(std::move(dataset), {.allow_zero_columns = true})),
      prior_(config.prior),
      gamma_prior_variance_(config.gamma_prior_variance),
      proposal_sd_(config.proposal_sd),
      rng_(rng),
      beta_conditional_(posterior_precision(dataset_, config)),
      prior_shift_(config.prior.lambda0 * config.prior.mu0) {
  for (int s = 1; s <= dataset_.num_scales(); ++s) {
    scale_rows_.push_back(dataset_.rows_on_scale(s));
  }
  if (config.init_beta || config.init_gammas) {
    state_.beta = config.init_beta.value_or(prior_.mu0);
    state_.gammas =
        config.init_gammas ? *config.init_gammas : default_init(dataset_, prior_).gammas;
  } else {
    state_ = default_init(dataset_, prior_);
  }
  latent_.y_star = Eigen::VectorXd::Zero(dataset_.num_rows());
  accepted_.assign(static_cast<std::size_t>(dataset_.num_scales()), 0);
  proposed_.assign(static_cast<std::size_t>(dataset_.num_scales()), 0);
}

void GibbsChain::set_proposal_sd(std::vector<double> sd) {
  if (sd.size() != proposal_sd_.size()) {
    throw ValidationError("set_proposal_sd: one sd per scale required");
  }
  proposal_sd_ = std::move(sd);
}

void GibbsChain::set_labels(std::vector<int> labels) {
  Dataset next = dataset_;
  next.labels = std::move(labels);
  dataset_ = validate_dataset(std::move(next), {.allow_zero_columns = true});
}

void GibbsChain::set_state(ParamDraw state) {
  check_thresholds(state);
  state_ = std::move(state);
}

void GibbsChain::sweep() {
  const Eigen::VectorXd eta = dataset_.features * state_.beta;

  for (std::size_t s = 0; s < scale_rows_.size(); ++s) {
    const auto& rows = scale_rows_[s];
    std::vector<int> labels(rows.size());
    Eigen::VectorXd eta_s(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      labels[k] = dataset_.labels[static_cast<std::size_t>(rows[k])];
      eta_s[static_cast<Eigen::Index>(k)] = eta[rows[k]];
    }
    GammaUpdate update = mh_step(static_cast<int>(s) + 1, state_.gammas[s], labels, eta_s,
                                 proposal_sd_[s], gamma_prior_variance_, rng_);
    ++proposed_[s];
    if (update.accepted) {
      ++accepted_[s];
      state_.gammas[s] = std::move(update.gamma);
    }
  }

  latent_ = draw_latents(state_, dataset_, rng_);
  const Eigen::VectorXd shift =
      prior_shift_ + dataset_.features.transpose() * latent_.y_star;
  state_.beta = beta_conditional_.sample(shift, rng_);
  ++sweeps_;

  if (!state_.beta.allFinite()) {
    throw NumericalError("non-finite coefficient draw: " + dump_vector(state_.beta));
  }
#ifndef NDEBUG
  check_thresholds(state_);
#endif
}

namespace {

DrawSet run_one_chain(const Dataset& dataset, const ChainConfig& config, int chain_id) {
  GibbsChain chain(dataset, config,
                   RandomStream(config.seed).split(static_cast<std::uint64_t>(chain_id)));
  DrawSet out;
  out.draws.reserve(static_cast<std::size_t>(config.stored_draws));
  const long total = config.total_sweeps();
  for (long m = 1; m <= total; ++m) {
    try {
      chain.sweep();
    } catch (const NumericalError& e) {
      throw NumericalError("chain " + std::to_string(chain_id) + ", sweep " +
                           std::to_string(m) + ": " + e.what());
    }
    if (m > config.burn_in && (m - config.burn_in) % config.thinning == 0) {
      check_thresholds(chain.state());
      out.draws.push_back(chain.state());
      out.chain_ids.push_back(chain_id);
      out.iterations.push_back(m);
    }
  }
  out.accepted = chain.accepted();
  out.proposed = chain.proposed();
  return out;
}

}  // namespace

DrawSet run_chain(const Dataset& dataset, const ChainConfig& config) {
  return run_one_chain(dataset, config, 1);
}

DrawSet run_chains(const Dataset& dataset, const ChainConfig& config, int num_chains) {
  if (num_chains < 1) throw ValidationError("num_chains must be >= 1");
  config.validate(dataset);
  std::vector<DrawSet> parts(static_cast<std::size_t>(num_chains));
  const auto errors = detail::parallel_for(parts.size(), [&](std::size_t c) {
    parts[c] = run_one_chain(dataset, config, static_cast<int>(c) + 1);
  });
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  DrawSet out;
  for (const auto& part : parts) out.append(part);
  return out;
}

ProposalTuning tune_proposal(const Dataset& dataset, const ChainConfig& config,
                             double target_rate) {
  if (!(target_rate > 0.0 && target_rate < 1.0)) {
    throw ValidationError("target acceptance rate must lie in (0, 1)");
  }
  constexpr double kTolerance = 0.05;
  GibbsChain chain(dataset, config, RandomStream(config.seed).split(0));
  const auto num_scales = static_cast<std::size_t>(dataset.num_scales());
  ProposalTuning out;
  out.proposal_sd = config.proposal_sd;
  out.rate_trajectory.assign(num_scales, {});
  std::vector<bool> done(num_scales, false);
  std::vector<double> factor(num_scales, 2.0);
  std::vector<int> last_direction(num_scales, 0);

  for (int window = 0; window < kTuningMaxWindows; ++window) {
    const auto acc0 = chain.accepted();
    const auto prop0 = chain.proposed();
    for (int m = 0; m < kTuningWindow; ++m) chain.sweep();
    for (std::size_t s = 0; s < num_scales; ++s) {
      const double rate = static_cast<double>(chain.accepted()[s] - acc0[s]) /
                          static_cast<double>(chain.proposed()[s] - prop0[s]);
      out.rate_trajectory[s].push_back(rate);
      if (done[s]) continue;
      if (std::abs(rate - target_rate) <= kTolerance) {
        done[s] = true;
        continue;
      }
      const int direction = rate > target_rate ? 1 : -1;
      if (last_direction[s] != 0 && direction != last_direction[s]) {
        factor[s] = std::sqrt(factor[s]);
      }
      last_direction[s] = direction;
      out.proposal_sd[s] *= direction > 0 ? factor[s] : 1.0 / factor[s];
    }
    chain.set_proposal_sd(out.proposal_sd);
    if (std::all_of(done.begin(), done.end(), [](bool d) { return d; })) return out;
  }

  std::ostringstream os;
  os << "proposal tuning did not reach acceptance " << target_rate << " +/- " << kTolerance
     << " within " << kTuningMaxWindows << " windows of " << kTuningWindow << " sweeps";
  for (std::size_t s = 0; s < num_scales; ++s) {
    if (done[s]) continue;
    os << "\n  scale " << s + 1 << " rates:";
    for (double r : out.rate_trajectory[s]) os << ' ' << r;
  }
  throw NumericalError(os.str());
}

}  // namespace msprobit
