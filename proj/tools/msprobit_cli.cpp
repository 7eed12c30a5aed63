// msprobit: simulate, fit, predict, evaluate, experiment, summarize.
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "msprobit/config.hpp"
#include "msprobit/diagnostics.hpp"
#include "msprobit/evaluate.hpp"
#include "msprobit/io.hpp"
#include "msprobit/random.hpp"
#include "msprobit/sampler.hpp"
#include "msprobit/simulate.hpp"

namespace fs = std::filesystem;
using namespace msprobit;

namespace {

struct CommonFlags {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<int> chains;
  std::string out = ".";
  bool standardize = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "YAML config file")->check(CLI::ExistingFile);
  cmd->add_option("--preset", f.preset, "experiment1 | experiment2 | experiment1-desk | experiment2-desk");
  cmd->add_option("--seed", f.seed, "Random seed (overrides the config)");
  cmd->add_option("--chains", f.chains, "Number of chains (overrides the config)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_flag("--standardize", f.standardize, "Standardize features");
}

// Preset first, then the config file, then command-line overrides.
RunConfig resolve(const CommonFlags& f) {
  RunConfig c = f.preset.empty() ? RunConfig{} : preset_config(f.preset);
  if (!f.config.empty()) c = load_config(f.config, c);
  if (f.seed) c.seed = *f.seed;
  if (f.chains) c.chains = *f.chains;
  if (f.standardize) c.standardize = true;
  return c;
}

std::string standardizer_csv(const Standardizer& st) {
  std::string out = "feature,mean,scale\n";
  for (Eigen::Index k = 0; k < st.mean.size(); ++k) {
    out += "f" + std::to_string(k + 1) + "," + format_double(st.mean[k]) + "," +
           format_double(st.scale[k]) + "\n";
  }
  return out;
}

Standardizer read_standardizer(const fs::path& path, Eigen::Index p) {
  const CsvTable t = parse_csv(read_file(path), path.string());
  if (static_cast<Eigen::Index>(t.rows.size()) != p || t.header.size() != 3) {
    throw ValidationError(path.string() + ": expected feature,mean,scale rows for " +
                          std::to_string(p) + " features");
  }
  Standardizer st;
  st.mean.resize(p);
  st.scale.resize(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    const auto& row = t.rows[static_cast<std::size_t>(k)];
    st.mean[k] = parse_double(row[1], path.string());
    st.scale[k] = parse_double(row[2], path.string());
  }
  return st;
}

int cmd_simulate(const CommonFlags& f) {
  const RunConfig c = resolve(f);
  RandomStream rng(c.seed);
  const SimTruth truth = simulate_dataset(static_cast<int>(c.thresholds.size()), c.n, c.p,
                                          c.thresholds, c.min_per_class, rng);
  const fs::path out(f.out);
  write_dataset(out / "data.csv", truth.pooled());
  write_file_atomic(out / "truth.csv", truth_csv(truth));
  std::cout << "wrote " << (out / "data.csv").string() << ", "
            << sidecar_path(out / "data.csv").string() << ", " << (out / "truth.csv").string()
            << "\n";
  return 0;
}

int cmd_fit(const CommonFlags& f, const std::string& data_path) {
  const RunConfig c = resolve(f);
  Dataset data = read_dataset(data_path, {c.allow_zero_columns});
  const fs::path out(f.out);
  if (c.standardize) {
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(data.num_rows()));
    for (Eigen::Index i = 0; i < data.num_rows(); ++i) rows[static_cast<std::size_t>(i)] = i;
    const Standardizer st = Standardizer::fit(data.features, rows);
    data.features = st.apply(data.features);
    write_file_atomic(out / "standardizer.csv", standardizer_csv(st));
  }
  const auto start = std::chrono::steady_clock::now();
  const ChainConfig chain = make_chain_config(c, data);
  const DrawSet draws = run_chains(data, chain, c.chains);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  write_draws(out / "draws.csv", draws);
  write_file_atomic(out / "fit_summary.csv", summary_csv(summarize_draws(draws)));
  write_file_atomic(out / "acceptance.csv", acceptance_csv(draws));

  const auto rates = draws.accept_rate();
  std::cout << "chains: " << c.chains << ", stored draws: " << draws.size() << "\n";
  for (std::size_t s = 0; s < rates.size(); ++s) {
    std::cout << "scale " << s + 1 << ": proposal sd " << chain.proposal_sd[s]
              << ", acceptance " << rates[s] << "\n";
  }
  std::printf("wall-clock: %.2f s\n", seconds);
  return 0;
}

int cmd_predict(const CommonFlags& f, const std::string& draws_path, const std::string& data_path,
                int scale, const std::string& standardizer_path) {
  const RunConfig c = resolve(f);
  const DrawSet draws = read_draws(draws_path);
  Dataset data = read_dataset(data_path, {c.allow_zero_columns});
  if (!standardizer_path.empty()) {
    data.features = read_standardizer(standardizer_path, data.num_features()).apply(data.features);
  }
  const auto preds = predict_rows(draws, data, scale);
  write_file_atomic(fs::path(f.out) / "predictions.csv", predictions_csv(data, preds));
  std::cout << "predicted " << preds.size() << " rows onto scale " << scale << "\n";
  return 0;
}

int cmd_evaluate(const CommonFlags& f, const std::string& data_path) {
  const RunConfig c = resolve(f);
  const Dataset data = read_dataset(data_path, {c.allow_zero_columns});
  const SplitSpec spec = make_split_spec(c);
  ChainConfig chain = make_chain_config(c, data);
  const SplitReport report = evaluate_splits(data, spec, chain);
  const fs::path out(f.out);
  write_file_atomic(out / "metrics_long.csv", split_long_csv(report));
  write_file_atomic(out / "metrics_diff.csv", split_diff_csv(report));
  const std::size_t shown = std::min<std::size_t>(report.warnings.size(), 5);
  for (std::size_t k = 0; k < shown; ++k) std::cerr << "warning: " << report.warnings[k] << "\n";
  if (report.warnings.size() > shown) {
    std::cerr << "warning: " << report.warnings.size() - shown << " more like the above\n";
  }
  std::cout << "splits: " << spec.num_splits << ", metric rows: " << report.rows.size()
            << ", difference rows: " << report.diffs.size() << "\n";
  return 0;
}

int cmd_experiment(const CommonFlags& f) {
  const RunConfig c = resolve(f);
  const ExperimentSpec spec = make_experiment_spec(c);
  const auto start = std::chrono::steady_clock::now();
  const ExperimentReport report = run_experiment(spec);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const fs::path out(f.out);
  write_file_atomic(out / "rmse_replications.csv", experiment_summary_csv(report));
  write_file_atomic(out / "rmse_draws.csv", experiment_draws_csv(report));
  write_file_atomic(out / "rmse_ratios.csv", experiment_ratios_csv(report));
  write_file_atomic(out / "failures.csv", failures_csv(report));
  std::cout << "replications: " << spec.replications << ", failed: " << report.failures.size()
            << "\n";
  std::printf("wall-clock: %.2f s\n", seconds);
  return report.failures.size() == static_cast<std::size_t>(spec.replications) ? 2 : 0;
}

int cmd_summarize(const CommonFlags& f, const std::string& draws_path) {
  const DrawSet draws = read_draws(draws_path);
  const auto summary = summarize_draws(draws);
  const std::string text = summary_csv(summary);
  write_file_atomic(fs::path(f.out) / "fit_summary.csv", text);
  std::cout << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-Scale Probit: Bayesian ordinal regression over several label scales"};
  app.require_subcommand(1);

  CommonFlags sim_f, fit_f, pred_f, eval_f, exp_f, sum_f;
  std::string fit_data, pred_draws, pred_data, pred_std, eval_data, sum_draws;
  int pred_scale = 1;

  auto* sim = app.add_subcommand("simulate", "Simulate a multi-scale dataset and its truth");
  add_common(sim, sim_f);

  auto* fit = app.add_subcommand("fit", "Run the Gibbs sampler on a dataset");
  add_common(fit, fit_f);
  fit->add_option("--data", fit_data, "Dataset CSV")->required()->check(CLI::ExistingFile);

  auto* pred = app.add_subcommand("predict", "Posterior class probabilities on a target scale");
  add_common(pred, pred_f);
  pred->add_option("--draws", pred_draws, "Draws CSV")->required()->check(CLI::ExistingFile);
  pred->add_option("--data", pred_data, "Dataset CSV")->required()->check(CLI::ExistingFile);
  pred->add_option("--scale", pred_scale, "Target scale id")->required();
  pred->add_option("--standardizer", pred_std, "standardizer.csv written by fit --standardize")
      ->check(CLI::ExistingFile);

  auto* eval = app.add_subcommand("evaluate", "Repeated train/test split evaluation");
  add_common(eval, eval_f);
  eval->add_option("--data", eval_data, "Dataset CSV")->required()->check(CLI::ExistingFile);

  auto* exp = app.add_subcommand("experiment", "Replicated single- vs multi-scale RMSE study");
  add_common(exp, exp_f);

  auto* sum = app.add_subcommand("summarize", "Posterior summaries of a draws file");
  add_common(sum, sum_f);
  sum->add_option("--draws", sum_draws, "Draws CSV")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*sim) return cmd_simulate(sim_f);
    if (*fit) return cmd_fit(fit_f, fit_data);
    if (*pred) return cmd_predict(pred_f, pred_draws, pred_data, pred_scale, pred_std);
    if (*eval) return cmd_evaluate(eval_f, eval_data);
    if (*exp) return cmd_experiment(exp_f);
    if (*sum) return cmd_summarize(sum_f, sum_draws);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
