// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--expect-fail 2,3,5,6] [--only 1,4]
//
// Exit status is 0 when the set of failing criteria equals the expected set.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "bflab/bergman.hpp"
#include "bflab/error.hpp"
#include "bflab/experiment.hpp"
#include "bflab/flows.hpp"
#include "support.hpp"

using namespace bflab;
namespace ex = bflab::experiment;

namespace {

std::set<int> parse_list(const std::string& s) {
  std::set<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.insert(std::stoi(item));
  return out;
}

struct Line {
  int id;
  std::string name;
  bool pass;
  std::string detail;
};

// Gram matrix of the round metric against the Beta-integral oracle, relative.
double gram_oracle_error(int k) {
  const auto grid = manifold::make_grid(flows::grid_for_degree(k));
  const herm::CMatrix m = bergman::hilb(manifold::KahlerData::round(grid), k).H.matrix();
  double worst = 0.0;
  for (int a = 0; a <= k; ++a) {
    const double oracle = testing::adaptive_simpson(
        [=](double s) { return 2.0 * std::pow(std::sin(s), 2 * a + 1) * std::pow(std::cos(s), 2 * (k - a) + 1); },
        0.0, 0.5 * std::numbers::pi, 1e-22);
    for (int b = 0; b <= k; ++b) {
      const double want = a == b ? oracle : 0.0;
      worst = std::max(worst, std::abs(m(a, b) - want) / oracle);
    }
  }
  return worst;
}

std::string describe(const ex::Result& r) {
  std::string out;
  for (const auto& c : r.criteria) out += (out.empty() ? "" : "; ") + c.detail;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> expect_fail, only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--expect-fail" && i + 1 < argc) expect_fail = parse_list(argv[++i]);
    else if (a == "--only" && i + 1 < argc) only = parse_list(argv[++i]);
    else {
      std::cerr << "usage: acceptance [--expect-fail ids] [--only ids]\n";
      return 2;
    }
  }
  auto wanted = [&](int id) { return only.empty() || only.count(id) > 0; };

  const std::vector<std::pair<int, std::string>> plan = {
      {1, "balanced_baseline"},   {2, "bergman_expansion"},   {3, "tian_convergence"},
      {4, "operator_comparison"}, {5, "balancing_potential"}, {6, "balancing_flow"},
      {7, "flow_comparison"},     {8, "identity_suite"},      {9, "calabi_sanity"}};

  std::vector<Line> lines;
  std::map<std::string, std::pair<std::string, std::string>> first_bytes;
  for (const auto& [id, name] : plan) {
    if (!wanted(id) && !wanted(10)) continue;
    const auto start = std::chrono::steady_clock::now();
    const ex::ExperimentConfig cfg = ex::default_config(name);
    Line line{id, name, false, ""};
    try {
      const ex::Result r = ex::run(cfg);
      first_bytes[name] = {ex::results_csv(r), ex::summary_json(cfg, r).dump(2)};
      line.pass = r.all_pass();
      line.detail = describe(r);
      if (id == 1) {
        double oracle = 0.0;
        for (int k : cfg.k_list) oracle = std::max(oracle, gram_oracle_error(k));
        line.pass = line.pass && oracle <= 1e-10;
        char buf[96];
        std::snprintf(buf, sizeof buf, "; Beta-integral oracle gram %.3g (1e-10 rel)", oracle);
        line.detail += buf;
      }
    } catch (const std::exception& e) {
      line.detail = std::string("error: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char buf[32];
    std::snprintf(buf, sizeof buf, " [%.1fs]", secs);
    line.detail += buf;
    if (wanted(id)) lines.push_back(line);
  }

  if (wanted(10)) {
    // rerun every experiment with a different thread cap and compare bytes
    const char* old = std::getenv("BFLAB_THREADS");
    const std::string restore = old ? old : "";
    ::setenv("BFLAB_THREADS", "1", 1);
    int same = 0, total = 0;
    std::string diffs;
    for (const auto& [name, bytes] : first_bytes) {
      ++total;
      try {
        const ex::ExperimentConfig cfg = ex::default_config(name);
        const ex::Result r = ex::run(cfg);
        if (ex::results_csv(r) == bytes.first && ex::summary_json(cfg, r).dump(2) == bytes.second) ++same;
        else diffs += " " + name;
      } catch (const std::exception& e) {
        diffs += " " + name + "(" + e.what() + ")";
      }
    }
    if (old) ::setenv("BFLAB_THREADS", restore.c_str(), 1);
    else ::unsetenv("BFLAB_THREADS");
    lines.push_back({10, "determinism", total > 0 && same == total,
                     std::to_string(same) + "/" + std::to_string(total) +
                         " experiments byte-identical on rerun (BFLAB_THREADS=1 vs default)" +
                         (diffs.empty() ? "" : "; differ:" + diffs)});
  }

  std::set<int> failed;
  for (const auto& l : lines) {
    std::cout << (l.pass ? "PASS" : "FAIL") << " criterion " << l.id << " " << l.name << ": " << l.detail;
    if (!l.pass && expect_fail.count(l.id)) std::cout << " (expected failure)";
    std::cout << "\n";
    if (!l.pass) failed.insert(l.id);
  }
  std::set<int> expected;
  for (int id : expect_fail)
    if (wanted(id)) expected.insert(id);
  std::cout << (lines.size() - failed.size()) << "/" << lines.size() << " criteria pass\n";
  if (failed != expected) {
    std::cout << "failing set differs from the expected set\n";
    return 1;
  }
  return 0;
}
