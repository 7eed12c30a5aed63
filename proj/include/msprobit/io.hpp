#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "msprobit/diagnostics.hpp"
#include "msprobit/evaluate.hpp"
#include "msprobit/model.hpp"
#include "msprobit/sampler.hpp"
#include "msprobit/simulate.hpp"

namespace msprobit {

namespace fs = std::filesystem;

/// Shortest text that reads back to the same double (%.17g).
std::string format_double(double value);

/// Writes `contents` to a temporary file beside `path`, then renames it over
/// `path`. Throws IoError.
void write_file_atomic(const fs::path& path, const std::string& contents);
std::string read_file(const fs::path& path);

/// Sidecar declaring the classes per scale: data.csv -> data.scales.yaml.
fs::path sidecar_path(const fs::path& dataset_path);

/// Dataset CSV: header scale_id,label,f1..fp then one row per observation.
/// The sidecar lists `scales: [{scale_id: 1, num_classes: 2}, ...]`.
/// Throws IoError when unreadable, ValidationError on malformed content.
Dataset read_dataset(const fs::path& path, const DatasetChecks& checks = {});
void write_dataset(const fs::path& path, const Dataset& dataset);

std::string dataset_csv(const Dataset& dataset);
std::string scales_yaml(const std::vector<ScaleSpec>& scales);

/// Truth CSV: parameter,scale,index,value with rows beta (scale 0) then gamma.
std::string truth_csv(const SimTruth& truth);

/// Draws CSV: chain_id,iteration,beta_1..beta_p,gamma_s_c in (scale,
/// threshold) order.
std::string draws_csv(const DrawSet& draws);
DrawSet parse_draws_csv(const std::string& text);
void write_draws(const fs::path& path, const DrawSet& draws);
DrawSet read_draws(const fs::path& path);

/// parameter,scale,index,mean,sd,mcse,sd_rank; sd_rank orders coefficients
/// from least (1) to most uncertain and is blank for thresholds.
std::string summary_csv(const std::vector<ParameterSummary>& summary);
/// scale,accepted,proposed,rate
std::string acceptance_csv(const DrawSet& draws);

/// Posterior-averaged class probabilities of every row on `target_scale`.
struct Prediction {
  std::vector<double> probs;
  int map_class = 0;
  double rank_score = 0.0;
};
std::vector<Prediction> predict_rows(const DrawSet& draws, const Dataset& dataset,
                                     int target_scale);
/// row,scale_id,label,prob_1..prob_C,map_class,rank_score
std::string predictions_csv(const Dataset& dataset, const std::vector<Prediction>& predictions);

std::string experiment_summary_csv(const ExperimentReport& report);
std::string experiment_draws_csv(const ExperimentReport& report);
std::string experiment_ratios_csv(const ExperimentReport& report);
std::string failures_csv(const ExperimentReport& report);

/// split_id,model,scale,metric,draw_id,value
std::string split_long_csv(const SplitReport& report);
/// split_id,scale,metric,mean_multi,mean_single,diff
std::string split_diff_csv(const SplitReport& report);

/// Minimal CSV table for reading our own outputs back.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable parse_csv(const std::string& text, const std::string& source = "csv");
double parse_double(const std::string& field, const std::string& where);
long parse_long(const std::string& field, const std::string& where);

}  // namespace msprobit
