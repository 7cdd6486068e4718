// Command-line runner for the experiment suite.
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bflab/error.hpp"
#include "bflab/experiment.hpp"
#include "bflab/serialize.hpp"

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitNumerical = 3;

using bflab::experiment::json;

int cmd_run(const std::string& path, const std::string& out_override) {
  json j;
  try {
    j = json::parse(bflab::io::read_file(path));
  } catch (const json::exception& e) {
    throw bflab::InvalidArgument(std::string("config is not valid JSON: ") + e.what());
  }
  auto config = bflab::experiment::ExperimentConfig::from_json(j);
  if (!out_override.empty()) config.output_dir = out_override;
  const auto result = bflab::experiment::run(config);
  bflab::experiment::write_outputs(config, result);
  for (const auto& c : result.criteria)
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.key << ": " << c.detail << "\n";
  std::cout << "wrote " << config.output_dir.string() << "\n";
  return result.all_pass() ? 0 : 1;
}

int cmd_list() {
  for (const auto& e : bflab::experiment::experiments()) std::cout << e.name << "\t" << e.description << "\n";
  return 0;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Accepts either two numeric columns (k, value) or the results.csv long
// format, in which case --diagnostic selects the rows.
int cmd_fit(const std::string& path, const std::string& diagnostic) {
  std::istringstream in(bflab::io::read_file(path));
  std::string line;
  std::vector<std::pair<double, double>> pairs;
  int k_col = 0, v_col = 1, d_col = -1;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (first) {
      first = false;
      if (!cells.empty() && !cells[0].empty() && !std::isdigit(static_cast<unsigned char>(cells[0][0])) &&
          cells[0][0] != '-' && cells[0][0] != '.') {
        for (std::size_t i = 0; i < cells.size(); ++i) {
          if (cells[i] == "k") k_col = static_cast<int>(i);
          if (cells[i] == "value") v_col = static_cast<int>(i);
          if (cells[i] == "diagnostic") d_col = static_cast<int>(i);
        }
        if (d_col >= 0 && diagnostic.empty())
          throw bflab::InvalidArgument("fit: long-format CSV needs --diagnostic");
        continue;
      }
    }
    if (static_cast<int>(cells.size()) <= std::max({k_col, v_col, d_col}))
      throw bflab::InvalidArgument("fit: short row: " + line);
    if (d_col >= 0 && cells[d_col] != diagnostic) continue;
    try {
      pairs.emplace_back(std::stod(cells[k_col]), std::stod(cells[v_col]));
    } catch (const std::exception&) {
      throw bflab::InvalidArgument("fit: non-numeric row: " + line);
    }
  }
  const auto fit = bflab::experiment::fit_rate(pairs);
  std::cout << "slope " << bflab::io::format_double(fit.slope) << "\nintercept "
            << bflab::io::format_double(fit.intercept) << "\nresidual " << bflab::io::format_double(fit.residual)
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Balancing-flow laboratory on CP^1"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("-o,--output", out_dir, "Override the config's output directory");

  app.add_subcommand("list", "List experiments");

  std::string csv_path, diagnostic;
  auto* fit = app.add_subcommand("fit", "Fit log(value) against log(k)");
  fit->add_option("csv", csv_path, "CSV file")->required();
  fit->add_option("-d,--diagnostic", diagnostic, "Diagnostic to select in results.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir);
    if (*fit) return cmd_fit(csv_path, diagnostic);
    return cmd_list();
  } catch (const bflab::InvalidArgument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const bflab::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o failure: " << e.what() << "\n";
    return kExitInvalid;
  }
}
