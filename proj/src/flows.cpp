#include "bflab/flows.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bflab/error.hpp"

namespace bflab::flows {

namespace {
constexpr double kPi = std::numbers::pi;

double log_det(const herm::CMatrix& h) {
  Eigen::LLT<herm::CMatrix> llt(h);
  if (llt.info() != Eigen::Success) throw NumericalError("log_det: Cholesky failed");
  const herm::CMatrix l = llt.matrixL();
  double s = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) s += 2.0 * std::log(l(i, i).real());
  return s;
}

bool finite(const Diagnostics& d) {
  return std::isfinite(d.mu0_killing) && std::isfinite(d.mu_bar_op) && std::isfinite(d.beta_sup) &&
         std::isfinite(d.distance) && std::isfinite(d.scaled_distance);
}

Diagnostics diagnose(const bergman::Embedding& e) {
  const HermitianMatrix mb = bergman::mu_bar(e);
  const HermitianMatrix m0 = herm::trace_free(mb);
  Diagnostics d;
  d.mu0_killing = herm::killing_norm(m0);
  d.mu_bar_op = herm::op_norm(mb);
  d.beta_sup = bergman::balancing_potential(e, mb).cwiseAbs().maxCoeff();
  return d;
}
}  // namespace

void FlowTrace::append(double t, BergmanPoint b, Diagnostics d) {
  if (!times.empty() && !(t > times.back())) throw NumericalError("FlowTrace: times must increase");
  if (b.k != k) throw InvalidArgument("FlowTrace: point has wrong k");
  times.push_back(t);
  points.push_back(std::move(b));
  diagnostics.push_back(d);
}

void FlowTrace::validate() const {
  if (points.size() != times.size() || diagnostics.size() != times.size())
    throw NumericalError("FlowTrace: inconsistent lengths");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0 && !(times[i] > times[i - 1])) throw NumericalError("FlowTrace: times not increasing");
    if (!finite(diagnostics[i])) throw NumericalError("FlowTrace: non-finite diagnostic");
    herm::PositiveHermitian check(points[i].H.matrix());
  }
}

Diagnostics diagnose(const BergmanPoint& b, const SectionFramePtr& frame) {
  return diagnose(bergman::Embedding(b, frame));
}

GridSpec grid_for_degree(int k, int pad) {
  require(k >= 1 && pad >= 0, "grid_for_degree: bad arguments");
  const int nt = std::max(8, k + pad);
  return {nt, 2 * nt};
}

BergmanPoint balancing_step(const BergmanPoint& b, const SectionFramePtr& frame, double dt, double* tau) {
  require(dt > 0.0, "balancing_step: dt must be positive");
  const bergman::Embedding e(b, frame);
  const HermitianMatrix m0 = herm::trace_free(bergman::mu_bar(e));
  const double rate = 2.0 * kPi * b.k * b.k;
  const double op = herm::op_norm(m0);
  double step = dt;
  if (op > 0.0) step = std::min(step, 0.5 / (rate * op));
  if (tau) *tau = step;
  return bergman::act(b, m0 * (-step * rate));
}

void resume_balancing_flow(FlowTrace& trace, const SectionFramePtr& frame, double dt, double T) {
  require(!trace.points.empty(), "resume_balancing_flow: empty trace");
  require(dt > 0.0, "balancing_flow: dt must be positive");
  const double tol = 1e-14 * std::max(1.0, std::abs(T));
  double t = trace.times.back();
  BergmanPoint b = trace.points.back();
  while (T - t > tol) {
    double tau = 0.0;
    b = balancing_step(b, frame, std::min(dt, T - t), &tau);
    t = (T - (t + tau) <= tol) ? T : t + tau;
    trace.append(t, b, diagnose(b, frame));
  }
}

FlowTrace balancing_flow(const BergmanPoint& b0, const SectionFramePtr& frame, double dt, double T) {
  require(T >= 0.0, "balancing_flow: T must be nonnegative");
  FlowTrace trace;
  trace.k = b0.k;
  trace.append(0.0, b0, diagnose(b0, frame));
  resume_balancing_flow(trace, frame, dt, T);
  return trace;
}

BergmanPoint balancing_advance(const BergmanPoint& b0, const SectionFramePtr& frame, double dt, double duration) {
  const double tol = 1e-14 * std::max(1.0, duration);
  BergmanPoint b = b0;
  double t = 0.0;
  while (duration - t > tol) {
    double tau = 0.0;
    b = balancing_step(b, frame, std::min(dt, duration - t), &tau);
    t += tau;
  }
  return b;
}

FlowTrace t_iteration(const BergmanPoint& b0, const SectionFramePtr& frame, int iters) {
  require(iters >= 1, "t_iteration: iters must be >= 1");
  FlowTrace trace;
  trace.k = b0.k;
  trace.append(0.0, b0, diagnose(b0, frame));
  const double target = log_det(b0.H.matrix());
  const double n = static_cast<double>(b0.H.dim());
  BergmanPoint b = b0;
  for (int it = 1; it <= iters; ++it) {
    const bergman::Embedding e(b, frame);
    const herm::CMatrix mb = bergman::mu_bar(e).matrix();
    Eigen::LLT<herm::CMatrix> llt(b.H.matrix());
    const herm::CMatrix l = llt.matrixL();
    herm::CMatrix h = l * mb * l.adjoint();
    h *= std::exp((target - log_det(h)) / n);
    b = {b.k, herm::PositiveHermitian(HermitianMatrix::symmetrized(h))};
    trace.append(static_cast<double>(it), b, diagnose(b, frame));
  }
  return trace;
}

HermitianMatrix klein_symmetrize(const HermitianMatrix& a) {
  const Eigen::Index n = a.dim();
  herm::CMatrix p = herm::CMatrix::Zero(n, n), j = herm::CMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    p(i, i) = (i % 2 == 0) ? 1.0 : -1.0;
    j(i, n - 1 - i) = 1.0;
  }
  const herm::CMatrix pj = p * j;
  const herm::CMatrix& m = a.matrix();
  const herm::CMatrix s = (m + p * m * p + j * m * j + pj * m * pj.adjoint()) / 4.0;
  return herm::trace_free(HermitianMatrix::symmetrized(s));
}

CalabiBergmanPath calabi_bergman_path(const MetricSpec& metric, const CalabiPathOptions& opt) {
  require(opt.samples >= 1 && opt.T >= 0.0, "calabi_bergman_path: bad sampling");
  const manifold::CalabiFlow flow(opt.profile_nodes);
  auto grid = manifold::make_grid(opt.grid);
  const auto round_frame = bergman::SectionFrame::round(opt.k, grid);
  manifold::SymmetricProfile profile = flow.initial(metric);

  CalabiBergmanPath path;
  path.trace.k = opt.k;
  const double rate = 2.0 * kPi * opt.k * opt.k;
  for (int j = 0; j <= opt.samples; ++j) {
    const double t = opt.T * j / opt.samples;
    const manifold::KahlerData m(grid, flow.to_grid(profile, *grid));
    const bergman::BergmanData bd(m, opt.k);
    const RVector vel = flow.velocity_on_grid(profile, *grid);
    const RVector gen = opt.k * vel + m.laplacian_apply(vel) / (4.0 * kPi);
    const bergman::Embedding e(bd.point(), round_frame);
    const HermitianMatrix mb = bergman::mu_bar(e);
    path.U.push_back(bd.section_matrix(gen));
    path.V.push_back(herm::trace_free(mb) * -rate);
    path.calabi_energy.push_back(flow.calabi_energy(profile));
    path.trace.append(j == 0 ? 0.0 : t, bd.point(), diagnose(e));
    if (j == opt.samples || opt.T == 0.0) break;
    const double span = opt.T / opt.samples;
    const int steps = static_cast<int>(std::ceil(span / flow.stable_dt(profile, opt.calabi_safety)));
    const double dt = span / steps;
    for (int s = 0; s < steps; ++s) profile = flow.step(profile, dt);
  }
  return path;
}

std::vector<CompareRow> compare_flows(const MetricSpec& metric, const std::vector<int>& k_list,
                                      const CompareOptions& opt) {
  require(!k_list.empty(), "compare_flows: empty k list");
  require(opt.balancing_substeps >= 1, "compare_flows: substeps must be >= 1");
  std::vector<CompareRow> rows;
  for (int k : k_list) {
    CalabiPathOptions po;
    po.k = k;
    po.grid = grid_for_degree(k, opt.grid_pad);
    po.profile_nodes = opt.profile_nodes;
    po.T = opt.T;
    po.samples = opt.samples;
    const CalabiBergmanPath path = calabi_bergman_path(metric, po);
    const auto frame = bergman::SectionFrame::round(k, manifold::make_grid(po.grid));

    CompareRow row;
    row.k = k;
    BergmanPoint b = path.trace.points.front();
    for (std::size_t j = 0; j < path.trace.size(); ++j) {
      if (j > 0) {
        const double span = path.trace.times[j] - path.trace.times[j - 1];
        b = balancing_advance(b, frame, span / opt.balancing_substeps, span);
      }
      const double d = herm::distance(b.H, path.trace.points[j].H);
      row.times.push_back(path.trace.times[j]);
      row.distance.push_back(d);
      row.scaled_distance.push_back(d * std::pow(static_cast<double>(k), -1.5));
      row.tangent_gap.push_back(herm::killing_norm(path.U[j] - path.V[j]) * std::pow(static_cast<double>(k), -1.5));
    }
    row.max_scaled_distance = *std::max_element(row.scaled_distance.begin(), row.scaled_distance.end());
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<PotentialRow> potential_convergence(const MetricSpec& metric, const std::vector<int>& k_list,
                                                int grid_pad) {
  std::vector<PotentialRow> rows;
  for (int k : k_list) {
    auto grid = manifold::make_grid(grid_for_degree(k, grid_pad));
    const manifold::KahlerData m(grid, metric);
    const BergmanPoint b = bergman::hilb(m, k);
    const bergman::Embedding e(b, bergman::SectionFrame::round(k, grid));
    const RVector beta = bergman::balancing_potential(e);
    PotentialRow row;
    row.k = k;
    row.mean_scalar = m.mean_scalar_curvature();
    row.sup_error = (beta - (m.scalar_curvature().array() - row.mean_scalar).matrix()).cwiseAbs().maxCoeff();
    row.beta_fs_mean = e.fs_weights().dot(beta) / k;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace bflab::flows
