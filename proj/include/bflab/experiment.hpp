#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bflab/flows.hpp"

namespace bflab::experiment {

using nlohmann::json;

constexpr int kSummarySchemaVersion = 1;

struct ExperimentConfig {
  std::string name;
  manifold::MetricSpec metric;
  std::vector<int> k_list;
  /// Extra Gauss-Legendre rings beyond k; n_phi = 2 n_theta.
  int grid_pad = 8;
  double dt = 0.0;
  double T = 0.0;
  /// Finite-difference step for derivative checks.
  double fd_step = 1e-3;
  int samples = 10;
  /// FS o Hilb iterations for the balancing-flow experiment.
  int iterations = 400;
  int profile_nodes = 24;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir;

  /// Parses and validates; throws InvalidArgument.
  static ExperimentConfig from_json(const json& j);
  json to_json() const;
};

/// The config an experiment runs with when a field is not given.
ExperimentConfig default_config(const std::string& name);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // RMS of log residuals
};

/// Least-squares fit of log(value) against log(k).
RateFit fit_rate(const std::vector<std::pair<double, double>>& pairs);

/// "O(k^-p)": slope <= -p + 0.3 and residual < 0.1.
bool rate_passes(const RateFit& fit, double p);

struct Row {
  int k = 0;
  std::optional<double> t;
  std::string diagnostic;
  double value = 0.0;
};

struct Criterion {
  std::string key;
  bool pass = false;
  std::string detail;
  json data = json::object();
};

struct Result {
  std::string experiment;
  std::vector<Row> rows;
  std::vector<Criterion> criteria;
  /// plot file name -> (header, rows)
  std::map<std::string, std::pair<std::vector<std::string>, std::vector<std::vector<double>>>> plots;

  bool all_pass() const;
};

struct ExperimentInfo {
  std::string name;
  std::string description;
};
const std::vector<ExperimentInfo>& experiments();

/// Runs the experiment in memory.
Result run(const ExperimentConfig& config);

/// Writes results.csv, summary.json and plotdata/*.csv into the config's
/// output directory.
void write_outputs(const ExperimentConfig& config, const Result& result);

/// CSV text in the results.csv format.
std::string results_csv(const Result& result);
json summary_json(const ExperimentConfig& config, const Result& result);

/// BFLAB_THREADS, defaulting to the hardware concurrency.
int thread_limit();

}  // namespace bflab::experiment
