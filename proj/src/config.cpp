#include "msprobit/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <functional>
#include <map>

#include "msprobit/io.hpp"
#include "msprobit/sampler.hpp"

namespace msprobit {

namespace {

RunConfig paper_preset(int n, int replications, double prior_precision,
                       std::vector<double> variances) {
  RunConfig c;
  c.thresholds = {1, 3, 3};
  c.n = n;
  c.p = 48;
  c.replications = replications;
  c.prior_precision = prior_precision;
  c.burn_in = 50000;
  c.thinning = 100;
  c.stored_draws = 500;
  // Tables give proposal variances; we store sds.
  for (double v : variances) c.proposal_sd.push_back(std::sqrt(v));
  return c;
}

std::string where(const std::string& source, const YAML::Node& node) {
  return source + " line " + std::to_string(node.Mark().line + 1);
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& key, const std::string& source) {
  if (!node.IsScalar()) throw ValidationError(where(source, node) + ": " + key + " must be a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ValidationError(where(source, node) + ": invalid value '" + node.Scalar() + "' for " +
                          key);
  }
}

template <typename T>
std::vector<T> list(const YAML::Node& node, const std::string& key, const std::string& source) {
  std::vector<T> out;
  if (node.IsScalar()) {
    out.push_back(scalar<T>(node, key, source));
    return out;
  }
  if (!node.IsSequence()) throw ValidationError(where(source, node) + ": " + key + " must be a list");
  for (const auto& item : node) out.push_back(scalar<T>(item, key, source));
  return out;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"experiment1", "experiment2", "experiment1-desk", "experiment2-desk"};
}

RunConfig preset_config(const std::string& name) {
  RunConfig c;
  if (name == "experiment1") {
    c = paper_preset(400, 500, 1.0, {1.0, 0.3, 0.3});
  } else if (name == "experiment2") {
    c = paper_preset(40, 500, 0.1, {5.0, 1.9, 1.9});
  } else if (name == "experiment1-desk") {
    c = paper_preset(120, 20, 1.0, {1.0, 0.3, 0.3});
    c.p = 8;
    c.burn_in = 2000;
    c.thinning = 5;
    c.stored_draws = 400;
  } else if (name == "experiment2-desk") {
    c = paper_preset(40, 20, 0.1, {5.0, 1.9, 1.9});
    c.burn_in = 5000;
    c.thinning = 10;
    c.stored_draws = 500;
  } else {
    std::string known;
    for (const auto& p : preset_names()) known += (known.empty() ? "" : ", ") + p;
    throw ValidationError("unknown preset '" + name + "' (known: " + known + ")");
  }
  c.preset = name;
  return c;
}

RunConfig parse_config(const std::string& yaml_text, const std::string& source, RunConfig base) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ValidationError(source + " line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (root.IsNull()) return base;
  if (!root.IsMap()) throw ValidationError(source + ": top level must be a key: value mapping");

  RunConfig c = base;
  if (const auto node = root["preset"]) c = preset_config(scalar<std::string>(node, "preset", source));

  using Setter = std::function<void(const YAML::Node&, const std::string&)>;
  auto set_int = [&](int& field) -> Setter {
    return [&field, &source](const YAML::Node& n, const std::string& k) {
      field = scalar<int>(n, k, source);
    };
  };
  auto set_double = [&](double& field) -> Setter {
    return [&field, &source](const YAML::Node& n, const std::string& k) {
      field = scalar<double>(n, k, source);
    };
  };
  auto set_bool = [&](bool& field) -> Setter {
    return [&field, &source](const YAML::Node& n, const std::string& k) {
      field = scalar<bool>(n, k, source);
    };
  };
  const std::map<std::string, Setter> setters = {
      {"preset", [](const YAML::Node&, const std::string&) {}},
      {"thresholds",
       [&](const YAML::Node& n, const std::string& k) { c.thresholds = list<int>(n, k, source); }},
      {"n", set_int(c.n)},
      {"p", set_int(c.p)},
      {"min_per_class", set_int(c.min_per_class)},
      {"prior_precision", set_double(c.prior_precision)},
      {"prior_mean", set_double(c.prior_mean)},
      {"proposal_sd",
       [&](const YAML::Node& n, const std::string& k) { c.proposal_sd = list<double>(n, k, source); }},
      {"burn_in", set_int(c.burn_in)},
      {"thinning", set_int(c.thinning)},
      {"stored_draws", set_int(c.stored_draws)},
      {"chains", set_int(c.chains)},
      {"gamma_prior_variance", set_double(c.gamma_prior_variance)},
      {"init",
       [&](const YAML::Node& n, const std::string& k) {
         c.init = scalar<std::string>(n, k, source);
         if (c.init != "quantile" && c.init != "even") {
           throw ValidationError(where(source, n) + ": init must be 'quantile' or 'even'");
         }
       }},
      {"tune", set_bool(c.tune)},
      {"target_rate", set_double(c.target_rate)},
      {"replications", set_int(c.replications)},
      {"split_fraction", set_double(c.split_fraction)},
      {"num_splits", set_int(c.num_splits)},
      {"standardize", set_bool(c.standardize)},
      {"allow_zero_columns", set_bool(c.allow_zero_columns)},
      {"seed",
       [&](const YAML::Node& n, const std::string& k) {
         c.seed = scalar<std::uint64_t>(n, k, source);
       }},
  };

  for (const auto& entry : root) {
    const auto key = entry.first.as<std::string>();
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw ValidationError(where(source, entry.first) + ": unknown key '" + key + "'");
    }
    it->second(entry.second, key);
  }

  auto positive = [&](int v, const char* key) {
    if (v < 1) throw ValidationError(source + ": " + std::string(key) + " must be positive");
  };
  positive(c.n, "n");
  positive(c.p, "p");
  positive(c.thinning, "thinning");
  positive(c.stored_draws, "stored_draws");
  positive(c.chains, "chains");
  positive(c.replications, "replications");
  positive(c.num_splits, "num_splits");
  if (c.burn_in < 0) throw ValidationError(source + ": burn_in must be >= 0");
  if (!(c.prior_precision > 0)) throw ValidationError(source + ": prior_precision must be > 0");
  if (!(c.split_fraction > 0 && c.split_fraction < 1)) {
    throw ValidationError(source + ": split_fraction must lie in (0, 1)");
  }
  if (!(c.target_rate > 0 && c.target_rate < 1)) {
    throw ValidationError(source + ": target_rate must lie in (0, 1)");
  }
  for (double sd : c.proposal_sd) {
    if (!(sd > 0) || !std::isfinite(sd)) throw ValidationError(source + ": proposal_sd must be > 0");
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  return parse_config(read_file(path), path.string(), std::move(base));
}

namespace {

std::vector<double> proposal_for(const RunConfig& config, int num_scales) {
  if (config.proposal_sd.empty()) return std::vector<double>(num_scales, kDefaultProposalSd);
  if (config.proposal_sd.size() == 1) return std::vector<double>(num_scales, config.proposal_sd[0]);
  if (static_cast<int>(config.proposal_sd.size()) < num_scales) {
    throw ValidationError("proposal_sd lists " + std::to_string(config.proposal_sd.size()) +
                          " values but there are " + std::to_string(num_scales) + " scales");
  }
  return {config.proposal_sd.begin(), config.proposal_sd.begin() + num_scales};
}

}  // namespace

ChainConfig make_chain_config(const RunConfig& config, const Dataset& dataset) {
  ChainConfig chain;
  chain.prior = Prior::isotropic(dataset.num_features(), config.prior_precision, config.prior_mean);
  chain.proposal_sd = proposal_for(config, dataset.num_scales());
  chain.burn_in = config.burn_in;
  chain.thinning = config.thinning;
  chain.stored_draws = config.stored_draws;
  chain.seed = config.seed;
  chain.gamma_prior_variance = config.gamma_prior_variance;
  if (config.init == "even") {
    std::vector<std::vector<double>> gammas;
    for (const auto& s : dataset.scales) gammas.push_back(evenly_spaced_thresholds(s.num_classes()));
    chain.init_gammas = std::move(gammas);
  }
  if (config.tune || config.proposal_sd.empty()) {
    chain.proposal_sd = tune_proposal(dataset, chain, config.target_rate).proposal_sd;
  }
  return chain;
}

ExperimentSpec make_experiment_spec(const RunConfig& config) {
  ExperimentSpec spec;
  spec.replications = config.replications;
  spec.n = config.n;
  spec.p = config.p;
  spec.num_thresholds = config.thresholds;
  spec.min_per_class = config.min_per_class;
  spec.prior_precision = config.prior_precision;
  spec.proposal_sd = proposal_for(config, static_cast<int>(config.thresholds.size()));
  spec.burn_in = config.burn_in;
  spec.thinning = config.thinning;
  spec.stored_draws = config.stored_draws;
  spec.chains = config.chains;
  spec.seed = config.seed;
  return spec;
}

SplitSpec make_split_spec(const RunConfig& config) {
  SplitSpec spec;
  spec.train_fraction = config.split_fraction;
  spec.num_splits = config.num_splits;
  spec.chains = config.chains;
  spec.standardize = config.standardize;
  spec.seed = config.seed;
  return spec;
}

}  // namespace msprobit
