#include "msprobit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "msprobit/errors.hpp"

namespace msprobit {

ConfusionMatrix::ConfusionMatrix(int num_classes)
    : num_classes_(num_classes),
      counts_(static_cast<std::size_t>(num_classes) * static_cast<std::size_t>(num_classes), 0) {
  if (num_classes < 1) throw ValidationError("confusion matrix needs at least one class");
}

void ConfusionMatrix::add(int actual, int predicted) {
  if (actual < 1 || actual > num_classes_ || predicted < 1 || predicted > num_classes_) {
    throw ValidationError("label outside 1.." + std::to_string(num_classes_));
  }
  ++counts_[static_cast<std::size_t>((actual - 1) * num_classes_ + (predicted - 1))];
  ++total_;
}

long ConfusionMatrix::count(int actual, int predicted) const {
  return counts_.at(static_cast<std::size_t>((actual - 1) * num_classes_ + (predicted - 1)));
}

long ConfusionMatrix::row_sum(int actual) const {
  long sum = 0;
  for (int c = 1; c <= num_classes_; ++c) sum += count(actual, c);
  return sum;
}

long ConfusionMatrix::col_sum(int predicted) const {
  long sum = 0;
  for (int c = 1; c <= num_classes_; ++c) sum += count(c, predicted);
  return sum;
}

std::vector<double> class_probs_from_predictor(const std::vector<double>& gamma,
                                               double linear_predictor) {
  std::vector<double> probs(gamma.size() + 1);
  for (std::size_t c = 0; c < probs.size(); ++c) {
    const double lo = c == 0 ? -kInf : gamma[c - 1];
    const double hi = c == gamma.size() ? kInf : gamma[c];
    probs[c] = std::exp(log_normal_interval_mass(lo - linear_predictor, hi - linear_predictor));
  }
  return probs;
}

std::vector<double> predict_class_probs(const ParamDraw& draw,
                                        const Eigen::Ref<const Eigen::VectorXd>& x,
                                        const ScaleSpec& scale) {
  if (x.size() != draw.beta.size()) {
    throw ValidationError("predict_class_probs: feature vector has length " +
                          std::to_string(x.size()) + ", expected " +
                          std::to_string(draw.beta.size()));
  }
  if (scale.scale_id() > static_cast<int>(draw.gammas.size()) ||
      static_cast<int>(draw.gammas[static_cast<std::size_t>(scale.scale_id() - 1)].size()) !=
          scale.num_thresholds()) {
    throw ValidationError("predict_class_probs: draw does not cover scale " +
                          std::to_string(scale.scale_id()));
  }
  return class_probs_from_predictor(draw.gammas[static_cast<std::size_t>(scale.scale_id() - 1)],
                                    x.dot(draw.beta));
}

int argmax_class(const std::vector<double>& probs) {
  // max_element keeps the first maximum.
  return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin()) + 1;
}

int classify(const ParamDraw& draw, const Eigen::Ref<const Eigen::VectorXd>& x,
             const ScaleSpec& scale) {
  return argmax_class(predict_class_probs(draw, x, scale));
}

F1Result f1_scores(std::span<const int> predicted, std::span<const int> actual,
                   int num_classes) {
  if (predicted.empty() || actual.empty()) throw ValidationError("f1_scores: empty input");
  if (predicted.size() != actual.size()) {
    throw ValidationError("f1_scores: predicted and actual lengths differ");
  }
  F1Result out{{}, {}, 0.0, ConfusionMatrix(num_classes)};
  for (std::size_t i = 0; i < actual.size(); ++i) out.confusion.add(actual[i], predicted[i]);
  for (int c = 1; c <= num_classes; ++c) {
    const long tp = out.confusion.count(c, c);
    const long fp = out.confusion.col_sum(c) - tp;
    const long fn = out.confusion.row_sum(c) - tp;
    const bool degenerate = tp + fp == 0 || tp + fn == 0;
    double f = 0.0;
    if (!degenerate && tp > 0) {
      const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
      const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
      f = 2.0 * precision * recall / (precision + recall);
    }
    out.per_class.push_back(f);
    out.degenerate.push_back(degenerate);
  }
  out.macro = std::accumulate(out.per_class.begin(), out.per_class.end(), 0.0) / num_classes;
  return out;
}

namespace {

// Sorts v ascending and returns the number of strict inversions.
std::int64_t sort_count_inversions(std::vector<double>& v, std::vector<double>& buffer,
                                   std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = sort_count_inversions(v, buffer, lo, mid) +
                       sort_count_inversions(v, buffer, mid, hi);
  std::size_t i = lo;
  std::size_t j = mid;
  std::size_t k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      buffer[k++] = v[j++];
      swaps += static_cast<std::int64_t>(mid - i);
    } else {
      buffer[k++] = v[i++];
    }
  }
  while (i < mid) buffer[k++] = v[i++];
  while (j < hi) buffer[k++] = v[j++];
  std::copy(buffer.begin() + static_cast<std::ptrdiff_t>(lo),
            buffer.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

// Sum of t(t-1)/2 over runs of equal adjacent elements.
template <typename It, typename Eq>
std::int64_t tied_pairs(It first, It last, Eq eq) {
  std::int64_t pairs = 0;
  while (first != last) {
    It run = first;
    std::int64_t t = 0;
    while (run != last && eq(*run, *first)) {
      ++run;
      ++t;
    }
    pairs += t * (t - 1) / 2;
    first = run;
  }
  return pairs;
}

}  // namespace

double kendall_tau_b(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  if (n != b.size()) throw ValidationError("kendall_tau_b: lengths differ");
  if (n < 2) throw ValidationError("kendall_tau_b: need at least 2 observations");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) {
      throw ValidationError("kendall_tau_b: non-finite value");
    }
  }

  std::vector<std::pair<double, double>> pairs(n);
  for (std::size_t i = 0; i < n; ++i) pairs[i] = {a[i], b[i]};
  std::sort(pairs.begin(), pairs.end());

  const auto n0 = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  const std::int64_t n1 = tied_pairs(pairs.begin(), pairs.end(),
                                     [](const auto& x, const auto& y) { return x.first == y.first; });
  const std::int64_t n3 = tied_pairs(pairs.begin(), pairs.end(),
                                     [](const auto& x, const auto& y) { return x == y; });

  std::vector<double> second(n);
  for (std::size_t i = 0; i < n; ++i) second[i] = pairs[i].second;
  std::vector<double> buffer(n);
  const std::int64_t discordant = sort_count_inversions(second, buffer, 0, n);
  const std::int64_t n2 = tied_pairs(second.begin(), second.end(), std::equal_to<>{});

  if (n0 == n1 || n0 == n2) {
    throw ValidationError("kendall_tau_b: undefined because every value in one input is tied");
  }
  const std::int64_t concordant_minus_discordant = n0 - n1 - n2 + n3 - 2 * discordant;
  return static_cast<double>(concordant_minus_discordant) /
         std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
}

std::vector<double> rank_scores_per_draw(const DrawSet& draws,
                                         const Eigen::Ref<const Eigen::VectorXd>& x) {
  std::vector<double> out;
  out.reserve(draws.size());
  for (const auto& d : draws.draws) {
    if (d.beta.size() != x.size()) throw ValidationError("rank_score: length mismatch");
    out.push_back(x.dot(d.beta));
  }
  return out;
}

double rank_score(const DrawSet& draws, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (draws.empty()) throw ValidationError("rank_score: no draws");
  const auto scores = rank_scores_per_draw(draws, x);
  return std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
}

double harmonic_mean(double a, double b) {
  if (a < 0.0 || b < 0.0 || std::isnan(a) || std::isnan(b)) {
    throw ValidationError("harmonic_mean: inputs must be non-negative");
  }
  if (a + b == 0.0) return 0.0;
  return 2.0 * a * b / (a + b);
}

double combined_score(double f1, double tau_b) {
  return harmonic_mean(f1, std::max(tau_b, 0.0));
}

}  // namespace msprobit
