#include "msprobit/diagnostics.hpp"

#include <cmath>
#include <map>
#include <numeric>

#include "msprobit/errors.hpp"

namespace msprobit {

double batch_means_mcse(std::span<const double> series, int num_batches) {
  const auto n = static_cast<long>(series.size());
  if (num_batches < 2 || n < 2L * num_batches) {
    throw ValidationError("batch_means_mcse: series too short for the batch count");
  }
  const long batch = n / num_batches;
  std::vector<double> means(static_cast<std::size_t>(num_batches));
  for (int b = 0; b < num_batches; ++b) {
    const auto first = series.begin() + b * batch;
    means[static_cast<std::size_t>(b)] = std::accumulate(first, first + batch, 0.0) / batch;
  }
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / num_batches;
  double ss = 0.0;
  for (double m : means) ss += (m - grand) * (m - grand);
  const double batch_var = ss / (num_batches - 1);
  return std::sqrt(batch_var / num_batches);
}

std::vector<double> parameter_trace(const DrawSet& draws, int scale, int index) {
  std::vector<double> out;
  out.reserve(draws.size());
  for (const auto& d : draws.draws) {
    out.push_back(scale == 0
                      ? d.beta[index - 1]
                      : d.gammas.at(static_cast<std::size_t>(scale - 1))
                            .at(static_cast<std::size_t>(index - 1)));
  }
  return out;
}

namespace {

ParameterSummary summarize_trace(std::string name, int scale, int index,
                                 const std::vector<double>& trace,
                                 const std::vector<int>& chain_ids) {
  ParameterSummary s{std::move(name), scale, index};
  const double n = static_cast<double>(trace.size());
  s.mean = std::accumulate(trace.begin(), trace.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : trace) ss += (v - s.mean) * (v - s.mean);
  s.sd = trace.size() > 1 ? std::sqrt(ss / (n - 1)) : 0.0;

  std::map<int, std::vector<double>> by_chain;
  for (std::size_t i = 0; i < trace.size(); ++i) by_chain[chain_ids[i]].push_back(trace[i]);
  double var_of_mean = 0.0;
  bool ok = true;
  for (const auto& [id, values] : by_chain) {
    if (values.size() < 40) {
      ok = false;
      break;
    }
    const double m = batch_means_mcse(values);
    const double w = static_cast<double>(values.size()) / n;
    var_of_mean += w * w * m * m;
  }
  s.mcse = ok ? std::sqrt(var_of_mean) : std::numeric_limits<double>::quiet_NaN();
  return s;
}

}  // namespace

std::vector<ParameterSummary> summarize_draws(const DrawSet& draws) {
  if (draws.empty()) throw ValidationError("summarize_draws: no draws");
  std::vector<ParameterSummary> out;
  const auto& first = draws.draws.front();
  for (Eigen::Index k = 1; k <= first.beta.size(); ++k) {
    out.push_back(summarize_trace("beta_" + std::to_string(k), 0, static_cast<int>(k),
                                  parameter_trace(draws, 0, static_cast<int>(k)),
                                  draws.chain_ids));
  }
  for (std::size_t s = 1; s <= first.gammas.size(); ++s) {
    for (std::size_t c = 1; c <= first.gammas[s - 1].size(); ++c) {
      const int si = static_cast<int>(s);
      const int ci = static_cast<int>(c);
      out.push_back(summarize_trace(
          "gamma_" + std::to_string(s) + "_" + std::to_string(c), si, ci,
          parameter_trace(draws, si, ci), draws.chain_ids));
    }
  }
  return out;
}

}  // namespace msprobit
