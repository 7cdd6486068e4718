#include "bflab/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "bflab/error.hpp"

namespace bflab::io {

namespace fs = std::filesystem;

json matrix_to_json(const herm::CMatrix& m) {
  require(m.rows() == m.cols(), "matrix_to_json: matrix must be square");
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      re.push_back(m(i, j).real());
      im.push_back(m(i, j).imag());
    }
  return {{"dim", m.rows()}, {"re", re}, {"im", im}};
}

herm::CMatrix matrix_from_json(const json& j) {
  try {
    const Eigen::Index n = j.at("dim").get<Eigen::Index>();
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    require(n > 0 && re.size() == static_cast<std::size_t>(n * n) && im.size() == re.size(),
            "matrix JSON: entry count does not match dim");
    herm::CMatrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index c = 0; c < n; ++c) {
        const std::size_t idx = static_cast<std::size_t>(i * n + c);
        m(i, c) = herm::cplx(re[idx].get<double>(), im[idx].get<double>());
      }
    return m;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("matrix JSON: ") + e.what());
  }
}

json point_to_json(const bergman::BergmanPoint& b) {
  json j = matrix_to_json(b.H.matrix());
  j["k"] = b.k;
  return j;
}

bergman::BergmanPoint point_from_json(const json& j) {
  if (!j.contains("k")) throw InvalidArgument("BergmanPoint JSON: missing k");
  const int k = j["k"].get<int>();
  herm::PositiveHermitian h(matrix_from_json(j));
  require(h.dim() == k + 1, "BergmanPoint JSON: dim must be k + 1");
  return {k, h};
}

json metric_to_json(const manifold::KahlerData& m) {
  const auto& s = m.grid().spec();
  return {{"grid_spec", {{"n_theta", s.n_theta}, {"n_phi", s.n_phi}}},
          {"rel_potential", std::vector<double>(m.potential().data(), m.potential().data() + m.potential().size())}};
}

manifold::KahlerData metric_from_json(const json& j) {
  try {
    const manifold::GridSpec spec{j.at("grid_spec").at("n_theta").get<int>(),
                                  j.at("grid_spec").at("n_phi").get<int>()};
    const auto v = j.at("rel_potential").get<std::vector<double>>();
    auto grid = manifold::make_grid(spec);
    require(static_cast<Eigen::Index>(v.size()) == grid->size(), "metric JSON: sample count mismatch");
    return manifold::KahlerData(grid, Eigen::Map<const manifold::RVector>(v.data(), static_cast<Eigen::Index>(v.size())));
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("metric JSON: ") + e.what());
  }
}

json profile_to_json(const manifold::SymmetricProfile& p) {
  return {{"grid_spec", {{"n_nodes", p.potential.size()}}},
          {"rel_potential", std::vector<double>(p.potential.data(), p.potential.data() + p.potential.size())}};
}

manifold::SymmetricProfile profile_from_json(const json& j) {
  try {
    const auto n = j.at("grid_spec").at("n_nodes").get<std::size_t>();
    const auto v = j.at("rel_potential").get<std::vector<double>>();
    require(v.size() == n, "profile JSON: sample count mismatch");
    return {Eigen::Map<const manifold::RVector>(v.data(), static_cast<Eigen::Index>(v.size()))};
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("profile JSON: ") + e.what());
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void atomic_write(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw NumericalError("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw NumericalError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

namespace {
std::string point_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu.json", i);
  return buf;
}
}  // namespace

void write_trace(const fs::path& dir, const flows::FlowTrace& trace, const json& metadata) {
  json diag = {{"mu0_killing", json::array()}, {"mu_bar_op", json::array()}, {"beta_sup", json::array()},
               {"distance", json::array()},    {"scaled_distance", json::array()}};
  for (const auto& d : trace.diagnostics) {
    diag["mu0_killing"].push_back(d.mu0_killing);
    diag["mu_bar_op"].push_back(d.mu_bar_op);
    diag["beta_sup"].push_back(d.beta_sup);
    diag["distance"].push_back(d.distance);
    diag["scaled_distance"].push_back(d.scaled_distance);
  }
  for (std::size_t i = 0; i < trace.size(); ++i)
    atomic_write(dir / "points" / point_name(i), point_to_json(trace.points[i]).dump() + "\n");
  const json j = {{"k", trace.k}, {"times", trace.times}, {"diagnostics", diag}, {"metadata", metadata}};
  atomic_write(dir / "trace.json", j.dump(1) + "\n");
}

flows::FlowTrace read_trace(const fs::path& dir, json* metadata) {
  json j;
  try {
    j = json::parse(read_file(dir / "trace.json"));
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("trace JSON: ") + e.what());
  }
  flows::FlowTrace trace;
  trace.k = j.at("k").get<int>();
  const auto times = j.at("times").get<std::vector<double>>();
  const auto& diag = j.at("diagnostics");
  for (std::size_t i = 0; i < times.size(); ++i) {
    flows::Diagnostics d;
    d.mu0_killing = diag.at("mu0_killing").at(i).get<double>();
    d.mu_bar_op = diag.at("mu_bar_op").at(i).get<double>();
    d.beta_sup = diag.at("beta_sup").at(i).get<double>();
    d.distance = diag.at("distance").at(i).get<double>();
    d.scaled_distance = diag.at("scaled_distance").at(i).get<double>();
    const json pj = json::parse(read_file(dir / "points" / point_name(i)));
    trace.append(times[i], point_from_json(pj), d);
  }
  if (metadata) *metadata = j.value("metadata", json::object());
  return trace;
}

}  // namespace bflab::io
