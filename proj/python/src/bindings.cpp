// Python bindings for the main operations. Matrices cross as complex numpy
// arrays; metrics are given by Legendre coefficients of the relative potential.
#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bflab/bergman.hpp"
#include "bflab/error.hpp"
#include "bflab/experiment.hpp"
#include "bflab/flows.hpp"
#include "bflab/herm_linalg.hpp"

namespace py = pybind11;
using namespace bflab;
using herm::CMatrix;
using herm::RVector;

namespace {

manifold::MetricSpec spec_of(const std::vector<double>& legendre) { return {legendre}; }

manifold::SphereGridPtr grid_of(int k, int pad) { return manifold::make_grid(flows::grid_for_degree(k, pad)); }

bergman::BergmanPoint point_of(const CMatrix& h) {
  require(h.rows() >= 2, "need a matrix of size k+1 >= 2");
  return {static_cast<int>(h.rows()) - 1, herm::PositiveHermitian(h)};
}

bergman::Embedding embed(const CMatrix& h, int pad) {
  const auto b = point_of(h);
  return bergman::Embedding(b, bergman::SectionFrame::round(b.k, grid_of(b.k, pad)));
}

py::dict grid_dict(const manifold::SphereGrid& g) {
  RVector th(g.size()), ph(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) th[i] = g.theta(i), ph[i] = g.phi(i);
  py::dict d;
  d["theta"] = th;
  d["phi"] = ph;
  d["round_weights"] = g.round_weights();
  return d;
}

}  // namespace

PYBIND11_MODULE(_bflab, m) {
  m.doc() = "Balancing flow, Bergman kernels and Calabi flow on CP^1";

  static py::exception<NumericalError> numerical(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InvalidArgument& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const NumericalError& e) {
      py::set_error(numerical, e.what());
    }
  });

  m.def("trace_free", [](const CMatrix& a) { return herm::trace_free(herm::HermitianMatrix(a)).matrix(); });
  m.def("killing_norm", [](const CMatrix& a) { return herm::killing_norm(herm::HermitianMatrix(a)); });
  m.def("op_norm", [](const CMatrix& a) { return herm::op_norm(herm::HermitianMatrix(a)); });
  m.def("geodesic_point", [](const CMatrix& h0, const CMatrix& a, double t) {
    return herm::geodesic_point(herm::PositiveHermitian(h0), herm::HermitianMatrix(a), t).matrix();
  });
  m.def("distance", [](const CMatrix& h0, const CMatrix& h1) {
    return herm::distance(herm::PositiveHermitian(h0), herm::PositiveHermitian(h1));
  });
  m.def("scaled_distance", [](const CMatrix& h0, const CMatrix& h1, int k, int n) {
    return herm::scaled_distance(herm::PositiveHermitian(h0), herm::PositiveHermitian(h1), k, n);
  }, py::arg("h0"), py::arg("h1"), py::arg("k"), py::arg("n") = 1);

  m.def("perturbed_metric", [](double eps) { return manifold::MetricSpec::perturbed(eps).legendre; },
        "Legendre coefficients of the test potential with density 1 - eps (3 cos^2 - 1).");
  m.def("grid", [](int k, int pad) { return grid_dict(*grid_of(k, pad)); }, py::arg("k"), py::arg("grid_pad") = 8);
  m.def("scalar_curvature", [](const std::vector<double>& legendre, int n_theta, int n_phi) {
    return manifold::KahlerData(manifold::make_grid({n_theta, n_phi}), spec_of(legendre)).scalar_curvature();
  }, py::arg("legendre"), py::arg("n_theta") = 16, py::arg("n_phi") = 32);

  m.def("balanced_round_point", [](int k) { return bergman::balanced_round_point(k).H.matrix(); });
  m.def("hilb", [](int k, const std::vector<double>& legendre, int pad) {
    return bergman::hilb(manifold::KahlerData(grid_of(k, pad), spec_of(legendre)), k).H.matrix();
  }, py::arg("k"), py::arg("legendre") = std::vector<double>{}, py::arg("grid_pad") = 8);
  m.def("rho", [](int k, const std::vector<double>& legendre, int pad) {
    return bergman::rho(manifold::KahlerData(grid_of(k, pad), spec_of(legendre)), k);
  }, py::arg("k"), py::arg("legendre") = std::vector<double>{}, py::arg("grid_pad") = 8);
  m.def("act", [](const CMatrix& h, const CMatrix& a) {
    return bergman::act(point_of(h), herm::HermitianMatrix(a)).H.matrix();
  }, "Moves the point H by e^A, A in its orthonormal frame.");
  m.def("mu_bar", [](const CMatrix& h, int pad) { return bergman::mu_bar(embed(h, pad)).matrix(); },
        py::arg("H"), py::arg("grid_pad") = 8);
  m.def("balancing_potential", [](const CMatrix& h, int pad) { return bergman::balancing_potential(embed(h, pad)); },
        py::arg("H"), py::arg("grid_pad") = 8);
  m.def("fs_density", [](const CMatrix& h, int pad) { return embed(h, pad).fs_density(); }, py::arg("H"),
        py::arg("grid_pad") = 8);

  m.def("balancing_flow", [](const CMatrix& h, double dt, double T, int pad) {
    const auto b = point_of(h);
    const auto tr = flows::balancing_flow(b, bergman::SectionFrame::round(b.k, grid_of(b.k, pad)), dt, T);
    std::vector<double> mu0;
    std::vector<CMatrix> pts;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      mu0.push_back(tr.diagnostics[i].mu0_killing);
      pts.push_back(tr.points[i].H.matrix());
    }
    py::dict d;
    d["times"] = tr.times;
    d["mu0"] = mu0;
    d["points"] = pts;
    return d;
  }, py::arg("H"), py::arg("dt"), py::arg("T"), py::arg("grid_pad") = 8);
  m.def("t_iteration", [](const CMatrix& h, int iters, int pad) {
    const auto b = point_of(h);
    const auto tr = flows::t_iteration(b, bergman::SectionFrame::round(b.k, grid_of(b.k, pad)), iters);
    std::vector<double> mu0;
    for (const auto& d : tr.diagnostics) mu0.push_back(d.mu0_killing);
    py::dict d;
    d["mu0"] = mu0;
    d["final"] = tr.points.back().H.matrix();
    return d;
  }, py::arg("H"), py::arg("iters"), py::arg("grid_pad") = 8);

  m.def("fit_rate", [](const std::vector<double>& ks, const std::vector<double>& values) {
    require(ks.size() == values.size(), "fit_rate: ks and values differ in length");
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t i = 0; i < ks.size(); ++i) pairs.emplace_back(ks[i], values[i]);
    const auto f = experiment::fit_rate(pairs);
    return py::make_tuple(f.slope, f.intercept, f.residual);
  }, "Returns (slope, intercept, residual) of log(value) against log(k).");

  m.def("experiments", [] {
    std::vector<std::string> names;
    for (const auto& e : experiment::experiments()) names.push_back(e.name);
    return names;
  });
  m.def("_run_experiment", [](const std::string& config_json, bool write) {
    const auto cfg = experiment::ExperimentConfig::from_json(experiment::json::parse(config_json));
    experiment::Result r;
    {
      py::gil_scoped_release release;
      r = experiment::run(cfg);
    }
    if (write) experiment::write_outputs(cfg, r);
    return experiment::summary_json(cfg, r).dump();
  });
}
