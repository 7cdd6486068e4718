#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include "bflab/error.hpp"
#include "bflab/experiment.hpp"
#include "bflab/serialize.hpp"
#include "support.hpp"

using namespace bflab;
using namespace bflab::experiment;
namespace fs = std::filesystem;
using testing::Gen;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bflab_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

int cli(const std::string& args) {
  const std::string cmd = std::string(BFLAB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST_CASE("fit_rate examples") {
  std::vector<std::pair<double, double>> exact1, exact2, noisy;
  for (int k : {4, 8, 16, 32, 64}) {
    exact1.emplace_back(k, 7.0 / k);
    exact2.emplace_back(k, 3.0 / (k * k));
  }
  for (int k = 4; k <= 64; ++k) noisy.emplace_back(k, (1.0 / k) * (1 + 0.05 * std::sin(k)));
  const RateFit f1 = fit_rate(exact1), f2 = fit_rate(exact2), fn = fit_rate(noisy);
  CHECK(std::abs(f1.slope + 1.0) < 1e-10);
  CHECK(std::abs(f1.intercept - std::log(7.0)) < 1e-10);
  CHECK(f1.residual < 1e-12);
  CHECK(std::abs(f2.slope + 2.0) < 1e-10);
  CHECK(fn.slope >= -1.15);
  CHECK(fn.slope <= -0.85);
  CHECK(rate_passes(f1, 1.0));
  CHECK(rate_passes(f1, 1.3));
  CHECK_FALSE(rate_passes(f1, 1.31));
  CHECK_FALSE(rate_passes({-2.0, 0.0, 0.2}, 1.0));
  CHECK_THROWS_AS(fit_rate({{1, 1}, {2, 0.5}}), InvalidArgument);
  CHECK_THROWS_AS(fit_rate({{1, 1}, {2, 0.0}, {3, 1}}), InvalidArgument);
  CHECK_THROWS_AS(fit_rate({{1, 1}, {2, -1.0}, {3, 1}}), InvalidArgument);
}

TEST_CASE("configs validate") {
  const json ok = {{"experiment", "smoke"}, {"k_list", {2, 4}}, {"output_dir", "x"}};
  const ExperimentConfig c = ExperimentConfig::from_json(ok);
  CHECK(c.name == "smoke");
  CHECK(c.k_list == std::vector<int>{2, 4});
  const ExperimentConfig back = ExperimentConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());

  auto bad = [&](json j) { CHECK_THROWS_AS(ExperimentConfig::from_json(j), InvalidArgument); };
  json j = ok;
  j["bogus"] = 1;
  bad(j);
  j = ok;
  j["k_list"] = {4, 2};
  bad(j);
  j["k_list"] = json::array();
  bad(j);
  j["k_list"] = {0, 2};
  bad(j);
  j = ok;
  j["experiment"] = "nope";
  bad(j);
  j = ok;
  j["grid_pad"] = 2;
  bad(j);
  j = ok;
  j["metric"] = {{"type", "perturbed"}, {"epsilon", 0.7}};
  bad(j);
  j["metric"] = {{"type", "mystery"}};
  bad(j);
  bad(json::array());
  bad({{"experiment", "bergman_expansion"}, {"k_list", {4, 8}}});
  bad({{"experiment", "balancing_flow"}, {"dt", -1.0}});
  bad({{"experiment", "identity_suite"}, {"fd_step", 0.5}});

  const ExperimentConfig m = ExperimentConfig::from_json(
      {{"experiment", "bergman_expansion"}, {"metric", {{"type", "legendre"}, {"coefficients", {0.0, 0.0, 0.01}}}}});
  CHECK(m.metric.legendre == std::vector<double>{0.0, 0.0, 0.01});
  CHECK(ExperimentConfig::from_json({{"experiment", "smoke"}, {"metric", "round"}}).metric.is_round());
  for (const auto& e : experiments()) CHECK_NOTHROW(ExperimentConfig::from_json(default_config(e.name).to_json()));
  CHECK(experiments().size() == 10);
}

TEST_CASE("smoke experiment passes and writes its artifacts") {
  const fs::path dir = scratch_dir("smoke");
  ExperimentConfig c = default_config("smoke");
  c.output_dir = dir / "out";
  const Result r = run(c);
  CHECK(r.all_pass());
  for (const auto& row : r.rows) CHECK(row.value <= 1e-7);
  write_outputs(c, r);
  const std::string csv = io::read_file(c.output_dir / "results.csv");
  CHECK(csv.rfind("experiment,k,t,diagnostic,value\n", 0) == 0);
  const json s = json::parse(io::read_file(c.output_dir / "summary.json"));
  CHECK(s["schema_version"] == kSummarySchemaVersion);
  CHECK(s["criteria"].contains("smoke"));
  CHECK(s["all_pass"] == true);
  for (const auto& f : fs::directory_iterator(c.output_dir))
    CHECK(f.path().filename().string().find(".tmp") == std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("reruns are byte-identical, also with a different thread limit") {
  const fs::path dir = scratch_dir("determinism");
  ExperimentConfig c = default_config("balanced_baseline");
  c.k_list = {2, 4, 6};
  c.output_dir = dir / "out";
  ::setenv("BFLAB_THREADS", "1", 1);
  write_outputs(c, run(c));
  const std::string csv = io::read_file(c.output_dir / "results.csv");
  const std::string summary = io::read_file(c.output_dir / "summary.json");
  ::setenv("BFLAB_THREADS", "3", 1);
  write_outputs(c, run(c));
  ::unsetenv("BFLAB_THREADS");
  CHECK(io::read_file(c.output_dir / "results.csv") == csv);
  CHECK(io::read_file(c.output_dir / "summary.json") == summary);
  fs::remove_all(dir);
}

TEST_CASE("serialization round-trips bit-exactly") {
  Gen g(71);
  herm::CMatrix m = g.complex_matrix(5);
  m(0, 0) = {std::numeric_limits<double>::denorm_min(), -0.0};
  m(1, 2) = {1.0 / 3.0, 1e300};
  const herm::CMatrix back = io::matrix_from_json(json::parse(io::matrix_to_json(m).dump()));
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    CHECK(same_bits(back(i).real(), m(i).real()));
    CHECK(same_bits(back(i).imag(), m(i).imag()));
  }
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-310})
    CHECK(same_bits(std::strtod(io::format_double(v).c_str(), nullptr), v));

  const bergman::BergmanPoint b = bergman::act(bergman::balanced_round_point(4), g.hermitian_with_norm(5, 0.5));
  const bergman::BergmanPoint pb = io::point_from_json(json::parse(io::point_to_json(b).dump()));
  CHECK(pb.k == 4);
  CHECK((pb.H.matrix() - b.H.matrix()).cwiseAbs().maxCoeff() == 0.0);

  const manifold::KahlerData km(manifold::make_grid({10, 20}), manifold::MetricSpec::perturbed(0.1));
  const manifold::KahlerData kb = io::metric_from_json(json::parse(io::metric_to_json(km).dump()));
  CHECK(kb.grid().spec() == km.grid().spec());
  CHECK((kb.potential() - km.potential()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((kb.scalar_curvature() - km.scalar_curvature()).cwiseAbs().maxCoeff() == 0.0);

  const manifold::CalabiFlow flow(16);
  const manifold::SymmetricProfile p = flow.initial(manifold::MetricSpec::perturbed(0.05));
  const manifold::SymmetricProfile pp = io::profile_from_json(json::parse(io::profile_to_json(p).dump()));
  CHECK((pp.potential - p.potential).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("traces persist and resume bit-identically") {
  Gen g(72);
  const fs::path dir = scratch_dir("trace");
  const int k = 4;
  const auto frame = bergman::SectionFrame::round(k, manifold::make_grid(flows::grid_for_degree(k)));
  const auto b0 = bergman::act(bergman::balanced_round_point(k), g.hermitian_with_norm(k + 1, 0.4));
  const double dt = 2e-3;
  const flows::FlowTrace full = flows::balancing_flow(b0, frame, dt, 0.03);

  io::write_trace(dir, flows::balancing_flow(b0, frame, dt, 0.012), {{"dt", dt}});
  json meta;
  flows::FlowTrace resumed = io::read_trace(dir, &meta);
  CHECK(meta["dt"] == dt);
  flows::resume_balancing_flow(resumed, frame, dt, 0.03);
  REQUIRE(resumed.size() == full.size());
  for (std::size_t i = 0; i < full.size(); ++i) {
    CHECK(same_bits(resumed.times[i], full.times[i]));
    CHECK((resumed.points[i].H.matrix() - full.points[i].H.matrix()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(same_bits(resumed.diagnostics[i].mu0_killing, full.diagnostics[i].mu0_killing));
  }
  fs::remove_all(dir);
}

TEST_CASE("command-line exit codes") {
  const fs::path dir = scratch_dir("cli");
  CHECK(cli("list") == 0);
  CHECK(cli("") == 2);
  CHECK(cli("frobnicate") == 2);
  CHECK(cli("run " + (dir / "missing.json").string()) == 2);

  write_text(dir / "garbage.json", "{not json");
  CHECK(cli("run " + (dir / "garbage.json").string()) == 2);
  write_text(dir / "unknown.json", R"({"experiment": "smoke", "extra": 1})");
  CHECK(cli("run " + (dir / "unknown.json").string()) == 2);

  write_text(dir / "smoke.json", R"({"experiment": "smoke", "k_list": [2, 3]})");
  CHECK(cli("run " + (dir / "smoke.json").string() + " -o " + (dir / "smoke").string()) == 0);
  CHECK(fs::exists(dir / "smoke" / "summary.json"));

  // a metric that is not positive aborts as a numerical failure
  write_text(dir / "degenerate.json",
             R"({"experiment": "bergman_expansion", "k_list": [2, 3, 4],
                 "metric": {"type": "legendre", "coefficients": [0, 0, 2.0]}})");
  CHECK(cli("run " + (dir / "degenerate.json").string() + " -o " + (dir / "degenerate").string()) == 3);

  // a criterion that fails gives status 1
  write_text(dir / "expansion.json",
             R"({"experiment": "bergman_expansion", "k_list": [2, 3, 4],
                 "metric": {"type": "perturbed", "epsilon": 0.4}})");
  const int status = cli("run " + (dir / "expansion.json").string() + " -o " + (dir / "expansion").string());
  const json s = json::parse(io::read_file(dir / "expansion" / "summary.json"));
  CHECK(status == (s["all_pass"].get<bool>() ? 0 : 1));

  write_text(dir / "pairs.csv", "k,value\n4,1.75\n8,0.875\n16,0.4375\n");
  CHECK(cli("fit " + (dir / "pairs.csv").string()) == 0);
  CHECK(cli("fit " + (dir / "smoke" / "results.csv").string()) == 2);
  write_text(dir / "short.csv", "k,value\n4,1\n8,0.5\n");
  CHECK(cli("fit " + (dir / "short.csv").string()) == 2);
  fs::remove_all(dir);
}
