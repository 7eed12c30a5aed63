#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "msprobit/model.hpp"
#include "msprobit/sampler.hpp"

namespace msprobit {

/// Rows are actual classes, columns predicted classes; labels are 1-based.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes);

  void add(int actual, int predicted);
  long count(int actual, int predicted) const;
  long total() const { return total_; }
  int num_classes() const { return num_classes_; }
  long row_sum(int actual) const;
  long col_sum(int predicted) const;

 private:
  int num_classes_;
  std::vector<long> counts_;
  long total_ = 0;
};

/// Pr(y = c | x) = Phi(gamma_c - x'beta) - Phi(gamma_{c-1} - x'beta) on the
/// given scale of `draw`, with gamma_0 = -inf and gamma_C = +inf.
std::vector<double> predict_class_probs(const ParamDraw& draw,
                                        const Eigen::Ref<const Eigen::VectorXd>& x,
                                        const ScaleSpec& scale);

/// Same, from a precomputed linear predictor.
std::vector<double> class_probs_from_predictor(const std::vector<double>& gamma,
                                               double linear_predictor);

/// Argmax class of the probabilities; ties go to the lower class.
int classify(const ParamDraw& draw, const Eigen::Ref<const Eigen::VectorXd>& x,
             const ScaleSpec& scale);
int argmax_class(const std::vector<double>& probs);

struct F1Result {
  std::vector<double> per_class;
  /// Class had no predictions or no actual instances; its F1 is 0.
  std::vector<bool> degenerate;
  double macro = 0.0;
  ConfusionMatrix confusion;
};

/// Per-class F1 from precision TP/(TP+FP) and recall TP/(TP+FN). Classes with
/// TP+FP = 0 or TP+FN = 0 score 0 and are flagged. Macro is the unweighted
/// mean over all C classes.
F1Result f1_scores(std::span<const int> predicted, std::span<const int> actual,
                   int num_classes);

/// Kendall's tau-b in O(n log n). Throws ValidationError when n < 2, lengths
/// differ, or either input is entirely tied.
double kendall_tau_b(std::span<const double> a, std::span<const double> b);

/// x'beta for every draw.
std::vector<double> rank_scores_per_draw(const DrawSet& draws,
                                         const Eigen::Ref<const Eigen::VectorXd>& x);
/// Posterior mean of x'beta.
double rank_score(const DrawSet& draws, const Eigen::Ref<const Eigen::VectorXd>& x);

/// 2ab / (a + b), and 0 when a + b = 0. Throws ValidationError for negative input.
double harmonic_mean(double a, double b);

/// Harmonic mean of F1 and tau-b with tau-b clamped at 0.
double combined_score(double f1, double tau_b);

}  // namespace msprobit
