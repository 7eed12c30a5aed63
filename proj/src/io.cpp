#include "msprobit/io.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include "msprobit/metrics.hpp"

namespace msprobit {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << contents;
    out.flush();
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place at " + path.string());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path sidecar_path(const fs::path& dataset_path) {
  fs::path out = dataset_path;
  out.replace_extension(".scales.yaml");
  return out;
}

CsvTable parse_csv(const std::string& text, const std::string& source) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  auto split = [](const std::string& l) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(l);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (!l.empty() && l.back() == ',') fields.emplace_back();
    return fields;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw ValidationError(source + " line " + std::to_string(line_no) + ": expected " +
                            std::to_string(table.header.size()) + " fields, found " +
                            std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (table.header.empty()) throw ValidationError(source + ": missing header line");
  return table;
}

double parse_double(const std::string& field, const std::string& where) {
  const char* begin = field.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (field.empty() || end != begin + field.size() || errno == ERANGE) {
    throw ValidationError(where + ": cannot parse '" + field + "' as a number");
  }
  return v;
}

long parse_long(const std::string& field, const std::string& where) {
  const char* begin = field.c_str();
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(begin, &end, 10);
  if (field.empty() || end != begin + field.size() || errno == ERANGE) {
    throw ValidationError(where + ": cannot parse '" + field + "' as an integer");
  }
  return v;
}

namespace {

std::vector<ScaleSpec> read_sidecar(const fs::path& path) {
  const std::string text = read_file(path);
  std::vector<ScaleSpec> scales;
  try {
    const YAML::Node root = YAML::Load(text);
    const YAML::Node list = root["scales"];
    if (!list || !list.IsSequence()) {
      throw ValidationError(path.string() + ": expected a 'scales' list");
    }
    for (const auto& entry : list) {
      const int line = entry.Mark().line + 1;
      if (!entry["scale_id"] || !entry["num_classes"]) {
        throw ValidationError(path.string() + " line " + std::to_string(line) +
                              ": each scale needs scale_id and num_classes");
      }
      scales.emplace_back(entry["scale_id"].as<int>(), entry["num_classes"].as<int>());
    }
  } catch (const YAML::Exception& e) {
    throw ValidationError(path.string() + " line " + std::to_string(e.mark.line + 1) + ": " +
                          e.msg);
  }
  std::sort(scales.begin(), scales.end(),
            [](const ScaleSpec& a, const ScaleSpec& b) { return a.scale_id() < b.scale_id(); });
  return scales;
}

}  // namespace

Dataset read_dataset(const fs::path& path, const DatasetChecks& checks) {
  const CsvTable table = parse_csv(read_file(path), path.string());
  const auto& h = table.header;
  if (h.size() < 3 || h[0] != "scale_id" || h[1] != "label") {
    throw ValidationError(path.string() +
                          ": header must start with scale_id,label followed by features");
  }
  for (std::size_t k = 2; k < h.size(); ++k) {
    if (h[k] != "f" + std::to_string(k - 1)) {
      throw ValidationError(path.string() + ": feature column " + std::to_string(k - 1) +
                            " must be named f" + std::to_string(k - 1) + ", found '" + h[k] +
                            "'");
    }
  }
  const fs::path sidecar = sidecar_path(path);
  if (!fs::exists(sidecar)) {
    throw IoError("missing scale sidecar " + sidecar.string() + " for " + path.string());
  }

  Dataset data;
  data.scales = read_sidecar(sidecar);
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  const auto p = static_cast<Eigen::Index>(h.size() - 2);
  data.features.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    const std::string where = path.string() + " data row " + std::to_string(i + 1);
    data.scale_ids.push_back(static_cast<int>(parse_long(row[0], where)));
    data.labels.push_back(static_cast<int>(parse_long(row[1], where)));
    for (Eigen::Index k = 0; k < p; ++k) {
      data.features(i, k) = parse_double(row[static_cast<std::size_t>(k + 2)], where);
    }
  }
  return validate_dataset(std::move(data), checks);
}

std::string dataset_csv(const Dataset& dataset) {
  std::string out = "scale_id,label";
  for (Eigen::Index k = 1; k <= dataset.num_features(); ++k) out += ",f" + std::to_string(k);
  out += '\n';
  for (Eigen::Index i = 0; i < dataset.num_rows(); ++i) {
    out += std::to_string(dataset.scale_ids[static_cast<std::size_t>(i)]) + "," +
           std::to_string(dataset.labels[static_cast<std::size_t>(i)]);
    for (Eigen::Index k = 0; k < dataset.num_features(); ++k) {
      out += ',' + format_double(dataset.features(i, k));
    }
    out += '\n';
  }
  return out;
}

std::string scales_yaml(const std::vector<ScaleSpec>& scales) {
  std::string out = "scales:\n";
  for (const auto& s : scales) {
    out += "  - {scale_id: " + std::to_string(s.scale_id()) +
           ", num_classes: " + std::to_string(s.num_classes()) + "}\n";
  }
  return out;
}

void write_dataset(const fs::path& path, const Dataset& dataset) {
  write_file_atomic(path, dataset_csv(dataset));
  write_file_atomic(sidecar_path(path), scales_yaml(dataset.scales));
}

std::string truth_csv(const SimTruth& truth) {
  std::string out = "parameter,scale,index,value\n";
  for (Eigen::Index k = 0; k < truth.beta_true.size(); ++k) {
    out += "beta,0," + std::to_string(k + 1) + "," + format_double(truth.beta_true[k]) + "\n";
  }
  for (std::size_t s = 0; s < truth.gammas_true.size(); ++s) {
    for (std::size_t c = 0; c < truth.gammas_true[s].size(); ++c) {
      out += "gamma," + std::to_string(s + 1) + "," + std::to_string(c + 1) + "," +
             format_double(truth.gammas_true[s][c]) + "\n";
    }
  }
  return out;
}

std::string draws_csv(const DrawSet& draws) {
  if (draws.empty()) throw ValidationError("draws_csv: no draws");
  const auto& first = draws.draws.front();
  std::string out = "chain_id,iteration";
  for (Eigen::Index k = 1; k <= first.beta.size(); ++k) out += ",beta_" + std::to_string(k);
  for (std::size_t s = 0; s < first.gammas.size(); ++s) {
    for (std::size_t c = 0; c < first.gammas[s].size(); ++c) {
      out += ",gamma_" + std::to_string(s + 1) + "_" + std::to_string(c + 1);
    }
  }
  out += '\n';
  for (std::size_t d = 0; d < draws.size(); ++d) {
    const auto& draw = draws.draws[d];
    out += std::to_string(draws.chain_ids[d]) + "," + std::to_string(draws.iterations[d]);
    for (Eigen::Index k = 0; k < draw.beta.size(); ++k) out += ',' + format_double(draw.beta[k]);
    for (const auto& g : draw.gammas) {
      for (double v : g) out += ',' + format_double(v);
    }
    out += '\n';
  }
  return out;
}

DrawSet parse_draws_csv(const std::string& text) {
  const CsvTable table = parse_csv(text, "draws file");
  const auto& h = table.header;
  if (h.size() < 3 || h[0] != "chain_id" || h[1] != "iteration") {
    throw ValidationError("draws file: header must start with chain_id,iteration");
  }
  std::size_t col = 2;
  int p = 0;
  while (col < h.size() && h[col] == "beta_" + std::to_string(p + 1)) {
    ++p;
    ++col;
  }
  if (p == 0) throw ValidationError("draws file: no beta_ columns");
  std::vector<std::size_t> thresholds;  // per scale
  while (col < h.size()) {
    const int s = static_cast<int>(thresholds.size()) + 1;
    std::size_t c = 0;
    while (col < h.size() &&
           h[col] == "gamma_" + std::to_string(s) + "_" + std::to_string(c + 1)) {
      ++c;
      ++col;
    }
    if (c == 0) {
      throw ValidationError("draws file: unexpected column '" + h[col] + "', expected gamma_" +
                            std::to_string(s) + "_1");
    }
    thresholds.push_back(c);
  }
  if (thresholds.empty()) throw ValidationError("draws file: no gamma_ columns");

  DrawSet out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = "draws file row " + std::to_string(r + 1);
    out.chain_ids.push_back(static_cast<int>(parse_long(row[0], where)));
    out.iterations.push_back(parse_long(row[1], where));
    ParamDraw draw;
    draw.beta.resize(p);
    std::size_t k = 2;
    for (int j = 0; j < p; ++j) draw.beta[j] = parse_double(row[k++], where);
    for (std::size_t s = 0; s < thresholds.size(); ++s) {
      std::vector<double> g;
      for (std::size_t c = 0; c < thresholds[s]; ++c) g.push_back(parse_double(row[k++], where));
      if (!thresholds_ordered(g)) {
        throw ValidationError(where + ": thresholds for scale " + std::to_string(s + 1) +
                              " are not strictly increasing");
      }
      draw.gammas.push_back(std::move(g));
    }
    out.draws.push_back(std::move(draw));
  }
  if (out.empty()) throw ValidationError("draws file has no rows");
  return out;
}

void write_draws(const fs::path& path, const DrawSet& draws) {
  write_file_atomic(path, draws_csv(draws));
}

DrawSet read_draws(const fs::path& path) {
  try {
    return parse_draws_csv(read_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string summary_csv(const std::vector<ParameterSummary>& summary) {
  std::vector<std::size_t> beta_rows;
  for (std::size_t i = 0; i < summary.size(); ++i) {
    if (summary[i].scale == 0) beta_rows.push_back(i);
  }
  std::stable_sort(beta_rows.begin(), beta_rows.end(), [&](std::size_t a, std::size_t b) {
    return summary[a].sd < summary[b].sd;
  });
  std::vector<long> rank(summary.size(), 0);
  for (std::size_t r = 0; r < beta_rows.size(); ++r) rank[beta_rows[r]] = static_cast<long>(r) + 1;

  std::string out = "parameter,scale,index,mean,sd,mcse,sd_rank\n";
  for (std::size_t i = 0; i < summary.size(); ++i) {
    const auto& s = summary[i];
    out += s.name + "," + std::to_string(s.scale) + "," + std::to_string(s.index) + "," +
           format_double(s.mean) + "," + format_double(s.sd) + "," + format_double(s.mcse) + "," +
           (rank[i] > 0 ? std::to_string(rank[i]) : "") + "\n";
  }
  return out;
}

std::string acceptance_csv(const DrawSet& draws) {
  std::string out = "scale,accepted,proposed,rate\n";
  const auto rate = draws.accept_rate();
  for (std::size_t s = 0; s < draws.accepted.size(); ++s) {
    out += std::to_string(s + 1) + "," + std::to_string(draws.accepted[s]) + "," +
           std::to_string(draws.proposed[s]) + "," + format_double(rate[s]) + "\n";
  }
  return out;
}

std::vector<Prediction> predict_rows(const DrawSet& draws, const Dataset& dataset,
                                     int target_scale) {
  if (draws.empty()) throw ValidationError("predict: no draws");
  const auto& first = draws.draws.front();
  if (target_scale < 1 || target_scale > static_cast<int>(first.gammas.size())) {
    throw ValidationError("predict: unknown target scale " + std::to_string(target_scale) +
                          "; draws cover scales 1.." + std::to_string(first.gammas.size()));
  }
  if (first.beta.size() != dataset.num_features()) {
    throw ValidationError("predict: draws have " + std::to_string(first.beta.size()) +
                          " coefficients but the data has " +
                          std::to_string(dataset.num_features()) + " features");
  }
  const auto scale_idx = static_cast<std::size_t>(target_scale - 1);
  const std::size_t num_classes = first.gammas[scale_idx].size() + 1;
  const auto num_draws = static_cast<double>(draws.size());

  std::vector<Prediction> out(static_cast<std::size_t>(dataset.num_rows()));
  for (auto& pred : out) pred.probs.assign(num_classes, 0.0);
  for (const auto& draw : draws.draws) {
    const Eigen::VectorXd eta = dataset.features * draw.beta;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      auto& pred = out[static_cast<std::size_t>(i)];
      const auto probs = class_probs_from_predictor(draw.gammas[scale_idx], eta[i]);
      for (std::size_t c = 0; c < num_classes; ++c) pred.probs[c] += probs[c];
      pred.rank_score += eta[i];
    }
  }
  for (auto& pred : out) {
    for (auto& v : pred.probs) v /= num_draws;
    pred.rank_score /= num_draws;
    pred.map_class = argmax_class(pred.probs);
  }
  return out;
}

std::string predictions_csv(const Dataset& dataset, const std::vector<Prediction>& predictions) {
  std::string out = "row,scale_id,label";
  const std::size_t num_classes = predictions.empty() ? 0 : predictions.front().probs.size();
  for (std::size_t c = 1; c <= num_classes; ++c) out += ",prob_" + std::to_string(c);
  out += ",map_class,rank_score\n";
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto& pred = predictions[i];
    out += std::to_string(i + 1) + "," + std::to_string(dataset.scale_ids[i]) + "," +
           std::to_string(dataset.labels[i]);
    for (double v : pred.probs) out += ',' + format_double(v);
    out += "," + std::to_string(pred.map_class) + "," + format_double(pred.rank_score) + "\n";
  }
  return out;
}

std::string experiment_summary_csv(const ExperimentReport& report) {
  std::string out = "replication,model,scale,metric,value\n";
  for (const auto& r : report.summary) {
    out += std::to_string(r.replication) + "," + r.model + "," + std::to_string(r.scale) + "," +
           r.metric + "," + format_double(r.value) + "\n";
  }
  return out;
}

std::string experiment_draws_csv(const ExperimentReport& report) {
  std::string out = "replication,model,scale,metric,draw_id,value\n";
  for (const auto& r : report.draws) {
    out += std::to_string(r.replication) + "," + r.model + "," + std::to_string(r.scale) + "," +
           r.metric + "," + std::to_string(r.draw) + "," + format_double(r.value) + "\n";
  }
  return out;
}

std::string experiment_ratios_csv(const ExperimentReport& report) {
  std::string out = "replication,scale,metric,mean_multi,mean_single,ratio\n";
  for (const auto& r : report.ratios) {
    out += std::to_string(r.replication) + "," + std::to_string(r.scale) + "," + r.metric + "," +
           format_double(r.mean_multi) + "," + format_double(r.mean_single) + "," +
           format_double(r.ratio) + "\n";
  }
  return out;
}

std::string failures_csv(const ExperimentReport& report) {
  std::string out = "replication,message\n";
  for (const auto& f : report.failures) {
    std::string msg = f.message;
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    out += std::to_string(f.replication) + "," + msg + "\n";
  }
  return out;
}

std::string split_long_csv(const SplitReport& report) {
  std::string out = "split_id,model,scale,metric,draw_id,value\n";
  for (const auto& r : report.rows) {
    out += std::to_string(r.split) + "," + r.model + "," + std::to_string(r.scale) + "," +
           r.metric + "," + std::to_string(r.draw) + "," + format_double(r.value) + "\n";
  }
  return out;
}

std::string split_diff_csv(const SplitReport& report) {
  std::string out = "split_id,scale,metric,mean_multi,mean_single,diff\n";
  for (const auto& r : report.diffs) {
    out += std::to_string(r.split) + "," + std::to_string(r.scale) + "," + r.metric + "," +
           format_double(r.mean_multi) + "," + format_double(r.mean_single) + "," +
           format_double(r.diff) + "\n";
  }
  return out;
}

}  // namespace msprobit
