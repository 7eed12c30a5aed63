#include "msprobit/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "msprobit/metrics.hpp"
#include "msprobit/sampler.hpp"
#include "parallel.hpp"

namespace msprobit {

std::vector<std::string> split_metric_names(int num_classes) {
  std::vector<std::string> base{"f1_macro", "tau_b", "harmonic"};
  for (int c = 1; c <= num_classes; ++c) base.push_back("f1_class_" + std::to_string(c));
  std::vector<std::string> out;
  for (const char* sample : {"in", "out"}) {
    for (const auto& m : base) out.push_back(m + "_" + sample);
  }
  return out;
}

std::vector<Eigen::Index> draw_training_rows(const Dataset& dataset, double train_fraction,
                                             RandomStream& rng) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("split fraction must lie in (0, 1)");
  }
  std::vector<Eigen::Index> train;
  for (int s = 1; s <= dataset.num_scales(); ++s) {
    const auto rows = dataset.rows_on_scale(s);
    const auto n_s = static_cast<long>(rows.size());
    const long n_train = std::clamp(std::lround(train_fraction * static_cast<double>(n_s)),
                                    1L, std::max(1L, n_s - 1));
    const int num_classes = dataset.scale(s).num_classes();
    std::vector<Eigen::Index> chosen;
    int starved = 0;
    for (int attempt = 0; attempt < kMaxResplits; ++attempt) {
      std::vector<Eigen::Index> perm = rows;
      for (std::size_t i = perm.size(); i > 1; --i) {
        std::swap(perm[i - 1], perm[rng.below(i)]);
      }
      perm.resize(static_cast<std::size_t>(n_train));
      std::vector<int> counts(static_cast<std::size_t>(num_classes), 0);
      for (auto i : perm) ++counts[static_cast<std::size_t>(dataset.labels[static_cast<std::size_t>(i)] - 1)];
      const auto missing = std::find(counts.begin(), counts.end(), 0);
      if (missing == counts.end()) {
        chosen = std::move(perm);
        break;
      }
      starved = static_cast<int>(missing - counts.begin()) + 1;
    }
    if (chosen.empty()) {
      throw ValidationError("could not draw a training split holding every class: scale " +
                            std::to_string(s) + " class " + std::to_string(starved) +
                            " was missing after " + std::to_string(kMaxResplits) +
                            " attempts");
    }
    train.insert(train.end(), chosen.begin(), chosen.end());
  }
  std::sort(train.begin(), train.end());
  return train;
}

namespace {

struct ScoredSample {
  // [metric][draw]
  std::vector<std::vector<double>> values;
  long degenerate_classes = 0;
};

// Scores every draw on the rows `rows` of `data`, whose labels live on a scale
// with `num_classes` classes; `draw_scale` picks the thresholds in each draw.
ScoredSample score_draws(const DrawSet& draws, int draw_scale, const Eigen::MatrixXd& features,
                         const std::vector<int>& labels, int num_classes) {
  const std::size_t num_metrics = 3 + static_cast<std::size_t>(num_classes);
  ScoredSample out;
  out.values.assign(num_metrics, std::vector<double>(draws.size()));
  std::vector<double> actual(labels.begin(), labels.end());
  std::vector<int> predicted(labels.size());
  for (std::size_t d = 0; d < draws.size(); ++d) {
    const auto& draw = draws.draws[d];
    const Eigen::VectorXd eta = features * draw.beta;
    const auto& gamma = draw.gammas[static_cast<std::size_t>(draw_scale - 1)];
    for (std::size_t i = 0; i < labels.size(); ++i) {
      predicted[i] = argmax_class(class_probs_from_predictor(gamma, eta[static_cast<Eigen::Index>(i)]));
    }
    const F1Result f1 = f1_scores(predicted, labels, num_classes);
    double tau = std::numeric_limits<double>::quiet_NaN();
    if (labels.size() >= 2) {
      try {
        tau = kendall_tau_b(std::span<const double>(eta.data(), labels.size()), actual);
      } catch (const ValidationError&) {
        // All scores or all labels tied: tau-b is undefined for this draw.
      }
    }
    out.values[0][d] = f1.macro;
    out.values[1][d] = tau;
    out.values[2][d] = std::isnan(tau) ? tau : combined_score(f1.macro, tau);
    for (int c = 0; c < num_classes; ++c) {
      out.values[3 + static_cast<std::size_t>(c)][d] = f1.per_class[static_cast<std::size_t>(c)];
      if (f1.degenerate[static_cast<std::size_t>(c)]) ++out.degenerate_classes;
    }
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

SplitReport evaluate_one_split(const Dataset& dataset, const SplitSpec& spec,
                               const ChainConfig& chain, int split) {
  const RandomStream stream = RandomStream(spec.seed).split(static_cast<std::uint64_t>(split));
  RandomStream split_rng = stream.split(0);
  const auto train_rows = draw_training_rows(dataset, spec.train_fraction, split_rng);

  Dataset data = dataset;
  if (spec.standardize) {
    data.features = Standardizer::fit(dataset.features, train_rows).apply(dataset.features);
  }
  std::vector<bool> is_train(static_cast<std::size_t>(data.num_rows()), false);
  for (auto i : train_rows) is_train[static_cast<std::size_t>(i)] = true;

  const Dataset train = data.subset(train_rows);
  ChainConfig multi_config = chain;
  multi_config.seed = stream.split(1).seed();
  const DrawSet multi = run_chains(train, multi_config, spec.chains);

  SplitReport out;
  for (int s = 1; s <= data.num_scales(); ++s) {
    const int num_classes = data.scale(s).num_classes();
    ChainConfig single_config = chain;
    single_config.proposal_sd = {chain.proposal_sd.at(static_cast<std::size_t>(s - 1))};
    single_config.seed = stream.split(1 + static_cast<std::uint64_t>(s)).seed();
    const DrawSet single = run_chains(train.single_scale(s), single_config, spec.chains);

    // [sample][model] -> scores; sample 0 = in, 1 = out.
    ScoredSample scored[2][2];
    for (int sample = 0; sample < 2; ++sample) {
      std::vector<Eigen::Index> rows;
      for (auto i : data.rows_on_scale(s)) {
        if (is_train[static_cast<std::size_t>(i)] == (sample == 0)) rows.push_back(i);
      }
      const Dataset part = data.subset(rows);
      scored[sample][0] = score_draws(single, 1, part.features, part.labels, num_classes);
      scored[sample][1] = score_draws(multi, s, part.features, part.labels, num_classes);
      for (int m = 0; m < 2; ++m) {
        if (scored[sample][m].degenerate_classes > 0) {
          out.warnings.push_back(
              "split " + std::to_string(split) + ", " + (m == 0 ? "single" : "multi") +
              " model, scale " + std::to_string(s) + ", " + (sample == 0 ? "in" : "out") +
              "-sample: " + std::to_string(scored[sample][m].degenerate_classes) +
              " class-draw F1 values used the empty-class convention (F1 = 0)");
        }
      }
    }

    const auto names = split_metric_names(num_classes);
    const std::size_t per_sample = names.size() / 2;
    for (int m = 0; m < 2; ++m) {
      for (std::size_t k = 0; k < names.size(); ++k) {
        const auto& values = scored[k / per_sample][m].values[k % per_sample];
        for (std::size_t d = 0; d < values.size(); ++d) {
          out.rows.push_back({split, m == 0 ? "single" : "multi", s, names[k],
                              static_cast<long>(d) + 1, values[d]});
        }
      }
    }
    for (std::size_t k = 0; k < names.size(); ++k) {
      const double mean_single = mean_of(scored[k / per_sample][0].values[k % per_sample]);
      const double mean_multi = mean_of(scored[k / per_sample][1].values[k % per_sample]);
      out.diffs.push_back({split, s, names[k], mean_multi, mean_single, mean_multi - mean_single});
    }
  }
  return out;
}

}  // namespace

SplitReport evaluate_splits(const Dataset& dataset, const SplitSpec& spec,
                            const ChainConfig& chain) {
  if (spec.num_splits < 1) throw ValidationError("num_splits must be >= 1");
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw ValidationError("split fraction must lie in (0, 1)");
  }
  chain.validate(dataset);
  std::vector<SplitReport> parts(static_cast<std::size_t>(spec.num_splits));
  const auto errors = detail::parallel_for(parts.size(), [&](std::size_t k) {
    parts[k] = evaluate_one_split(dataset, spec, chain, static_cast<int>(k) + 1);
  });
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  SplitReport out;
  for (auto& part : parts) {
    out.rows.insert(out.rows.end(), part.rows.begin(), part.rows.end());
    out.diffs.insert(out.diffs.end(), part.diffs.begin(), part.diffs.end());
    out.warnings.insert(out.warnings.end(), part.warnings.begin(), part.warnings.end());
  }
  return out;
}

}  // namespace msprobit
