#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msprobit/model.hpp"

namespace msprobit {

struct SplitSpec {
  double train_fraction = 2.0 / 3.0;
  int num_splits = 500;
  int chains = 1;
  /// Standardize features with statistics from each split's training rows.
  bool standardize = false;
  std::uint64_t seed = 1;
};

inline constexpr int kMaxResplits = 100;

/// One per-draw metric value. Metric names are <metric>_<in|out> where metric
/// is f1_macro, tau_b, harmonic or f1_class_<c>.
struct SplitMetricRow {
  int split;
  std::string model;
  int scale;
  std::string metric;
  long draw;
  double value;
};

/// Posterior-mean difference (multi - single) for one split, scale and metric.
struct SplitDiffRow {
  int split;
  int scale;
  std::string metric;
  double mean_multi;
  double mean_single;
  double diff;
};

struct SplitReport {
  std::vector<SplitMetricRow> rows;
  std::vector<SplitDiffRow> diffs;
  std::vector<std::string> warnings;
};

/// Metric names emitted per (model, scale, draw), in output order.
std::vector<std::string> split_metric_names(int num_classes);

/// Training rows: per scale, a random round(fraction * n_s) subset that holds
/// every class at least once (redrawn up to 100 times). Returned ascending.
std::vector<Eigen::Index> draw_training_rows(const Dataset& dataset, double train_fraction,
                                             RandomStream& rng);

/// Repeated train/test evaluation. Each split fits one single-scale model per
/// scale and one multi-scale model on the training rows, then scores every
/// stored draw in-sample and out-of-sample per scale. `chain` supplies prior,
/// proposal sds (one per scale of `dataset`) and the draw schedule; its seed
/// is ignored in favour of spec.seed. Splits run concurrently.
SplitReport evaluate_splits(const Dataset& dataset, const SplitSpec& spec,
                            const ChainConfig& chain);

}  // namespace msprobit
