#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "msprobit/evaluate.hpp"
#include "msprobit/model.hpp"
#include "msprobit/simulate.hpp"

namespace msprobit {

/// Every setting a CLI command can read from a YAML config file. Schema and
/// defaults are listed in docs/config-schema.md.
struct RunConfig {
  std::string preset;
  // simulation
  std::vector<int> thresholds{1, 3, 3};
  int n = 400;
  int p = 48;
  int min_per_class = 1;
  // chain
  double prior_precision = 1.0;
  double prior_mean = 0.0;
  /// Proposal sd per scale; one value is broadcast. Empty means tune.
  std::vector<double> proposal_sd;
  int burn_in = 50000;
  int thinning = 100;
  int stored_draws = 500;
  int chains = 1;
  double gamma_prior_variance = 0.0;
  std::string init = "quantile";  // quantile | even
  bool tune = false;
  double target_rate = 0.234;
  // experiment / evaluate
  int replications = 500;
  double split_fraction = 2.0 / 3.0;
  int num_splits = 500;
  bool standardize = false;
  bool allow_zero_columns = false;
  std::uint64_t seed = 1;
};

inline constexpr double kDefaultProposalSd = 0.5;

/// experiment1, experiment2 (paper settings) and their -desk variants.
/// Throws ValidationError for an unknown name.
RunConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

/// Applies the keys of a YAML mapping on top of `base`; a `preset` key
/// resets the base first. Unknown keys and bad values throw ValidationError
/// naming the line.
RunConfig parse_config(const std::string& yaml_text, const std::string& source,
                       RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// Chain settings for `dataset`. Proposal sds are broadcast or defaulted,
/// then tuned when `tune` is set or none were given.
ChainConfig make_chain_config(const RunConfig& config, const Dataset& dataset);
ExperimentSpec make_experiment_spec(const RunConfig& config);
SplitSpec make_split_spec(const RunConfig& config);

}  // namespace msprobit
