#pragma once

#include <span>
#include <string>
#include <vector>

#include "msprobit/sampler.hpp"

namespace msprobit {

/// Monte Carlo standard error of the mean of an autocorrelated series by
/// non-overlapping batch means. Needs at least 2 * num_batches values.
double batch_means_mcse(std::span<const double> series, int num_batches = 20);

struct ParameterSummary {
  std::string name;  // beta_k or gamma_s_c
  int scale = 0;     // 0 for coefficients
  int index = 0;     // 1-based
  double mean = 0.0;
  double sd = 0.0;
  double mcse = 0.0;
};

/// Marginal posterior summaries: coefficients first, then thresholds in
/// (scale, threshold) order. MCSE is pooled over chains.
std::vector<ParameterSummary> summarize_draws(const DrawSet& draws);

/// Values of one parameter across draws; scale 0 selects beta.
std::vector<double> parameter_trace(const DrawSet& draws, int scale, int index);

}  // namespace msprobit
