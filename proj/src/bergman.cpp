#include "bflab/bergman.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "bflab/error.hpp"

namespace bflab::bergman {

namespace {
constexpr double kPi = std::numbers::pi;

double binomial(int n, int r) {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0));
}

// Row-wise x^* y for node x section matrices.
CVector row_dot(const CMatrix& x, const CMatrix& y) {
  return x.conjugate().cwiseProduct(y).rowwise().sum();
}

// sum_i w_i v_i v_i^* with v_i the rows of v.
CMatrix weighted_outer(const CMatrix& v, const RVector& w) {
  return v.transpose() * w.asDiagonal() * v.conjugate();
}

void require_invertible(const CMatrix& g) {
  require(g.rows() == g.cols() && g.rows() > 0, "gauge must be square");
  require(g.allFinite(), "gauge must be finite");
}
}  // namespace

BergmanPoint balanced_round_point(int k) {
  require(k >= 1, "balanced_round_point: k must be >= 1");
  RVector d(k + 1);
  for (int a = 0; a <= k; ++a) d[a] = 1.0 / ((k + 1.0) * binomial(k, a));
  return {k, PositiveHermitian(HermitianMatrix::diagonal(d))};
}

CMatrix orthonormal_gauge(const BergmanPoint& b) {
  Eigen::LLT<CMatrix> llt(b.H.matrix());
  if (llt.info() != Eigen::Success) throw NumericalError("orthonormal_gauge: Cholesky failed");
  const CMatrix l = llt.matrixL();
  return l.triangularView<Eigen::Lower>().solve(CMatrix::Identity(l.rows(), l.cols()));
}

BergmanPoint act(const BergmanPoint& b, const HermitianMatrix& a) {
  require(a.dim() == b.H.dim(), "act: dimension mismatch");
  Eigen::LLT<CMatrix> llt(b.H.matrix());
  if (llt.info() != Eigen::Success) throw NumericalError("act: Cholesky failed");
  const CMatrix l = llt.matrixL();
  const CMatrix e = herm::expm(a * -2.0).matrix();
  return {b.k, PositiveHermitian(HermitianMatrix::symmetrized(l * e * l.adjoint()))};
}

SectionFrame::SectionFrame(int k, SphereGridPtr grid, RVector log_weight)
    : k_(k), grid_(std::move(grid)), log_weight_(std::move(log_weight)) {
  require(k >= 1, "SectionFrame: k must be >= 1");
  require(log_weight_.size() == grid_->size(), "SectionFrame: log-weight count mismatch");
  require(log_weight_.allFinite(), "SectionFrame: log-weights must be finite");
  const Eigen::Index n = grid_->size();
  values_.resize(n, k + 1);
  derivs_.resize(n, k + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double th = grid_->theta(i), ph = grid_->phi(i);
    const double c = std::cos(0.5 * th), s = std::sin(0.5 * th);
    const bool north = th <= 0.5 * kPi;
    for (int a = 0; a <= k; ++a) {
      values_(i, a) = std::pow(c, k - a) * std::pow(s, a) * std::polar(1.0, a * ph);
      if (north) {
        derivs_(i, a) = a == 0 ? cplx(0.0)
                               : a * std::pow(s, a - 1) * std::pow(c, k - a - 1) * std::polar(1.0, (a - 1) * ph);
      } else {
        derivs_(i, a) = a == k ? cplx(0.0)
                               : (k - a) * std::pow(c, k - a - 1) * std::pow(s, a - 1) *
                                     std::polar(1.0, -(k - a - 1) * ph);
      }
    }
  }
}

SectionFramePtr SectionFrame::round(int k, SphereGridPtr grid) {
  const Eigen::Index n = grid->size();
  return std::make_shared<const SectionFrame>(k, std::move(grid), RVector::Zero(n));
}

SectionFramePtr SectionFrame::for_metric(int k, const KahlerData& m) {
  return std::make_shared<const SectionFrame>(k, m.grid_ptr(), (-2.0 * k) * m.potential());
}

BergmanPoint hilb(const SectionFrame& frame, const RVector& volume_weights) {
  require(volume_weights.size() == frame.grid().size(), "hilb: weight count mismatch");
  const int k = frame.k();
  if (frame.grid().n_phi() <= k || 2 * frame.grid().n_theta() <= k) {
    std::ostringstream os;
    os << "hilb: grid " << frame.grid().n_theta() << "x" << frame.grid().n_phi()
       << " cannot resolve degree-" << k << " sections";
    throw NumericalError(os.str());
  }
  const RVector w = volume_weights.cwiseProduct(frame.log_weight().array().exp().matrix());
  const CMatrix gram = weighted_outer(frame.values(), w);
  return {k, PositiveHermitian(HermitianMatrix::symmetrized(gram))};
}

BergmanPoint hilb(const KahlerData& m, int k) {
  return hilb(*SectionFrame::for_metric(k, m), m.weights());
}

Embedding::Embedding(const BergmanPoint& b, SectionFramePtr frame)
    : Embedding(orthonormal_gauge(b), std::move(frame)) {
  require(b.k == frame_->k(), "Embedding: k mismatch between point and frame");
}

Embedding::Embedding(CMatrix gauge, SectionFramePtr frame) : frame_(std::move(frame)), gauge_(std::move(gauge)) {
  require_invertible(gauge_);
  require(gauge_.rows() == frame_->dim(), "Embedding: gauge dimension mismatch");
  t_ = frame_->values() * gauge_.transpose();
  norm2_ = t_.rowwise().squaredNorm();
  if (!(norm2_.minCoeff() > 0.0)) throw NumericalError("Embedding: sections vanish simultaneously");
  x_ = norm2_.cwiseSqrt().cwiseInverse().asDiagonal() * t_;
  CMatrix tt = frame_->derivatives() * gauge_.transpose();
  const CVector proj = row_dot(x_, tt);
  tt -= proj.asDiagonal() * x_;
  const RVector tn2 = tt.rowwise().squaredNorm();
  if (!(tn2.minCoeff() > 0.0)) throw NumericalError("Embedding: degenerate embedding derivative");
  e_ = tn2.cwiseSqrt().cwiseInverse().asDiagonal() * tt;
  fs_density_ = tn2.cwiseQuotient(norm2_);
  fs_weights_ = frame_->grid().round_weights().cwiseProduct(fs_density_);
}

RVector Embedding::fs_potential() const { return norm2_.array().log().matrix() / (2.0 * k()); }

RVector Embedding::fs_log_weight() const { return -norm2_.array().log().matrix(); }

RVector fs(const BergmanPoint& b, const SectionFramePtr& frame) { return Embedding(b, frame).fs_log_weight(); }

HermitianMatrix mu_point(const Embedding& e, Eigen::Index node) {
  require(node >= 0 && node < e.directions().rows(), "mu_point: node out of range");
  const CVector x = e.directions().row(node).transpose();
  return HermitianMatrix::symmetrized(x * x.adjoint());
}

HermitianMatrix mu_bar(const Embedding& e) {
  return HermitianMatrix::symmetrized(weighted_outer(e.directions(), e.fs_weights()));
}

RVector h_A(const Embedding& e, const HermitianMatrix& a) {
  require(a.dim() == e.dim(), "h_A: dimension mismatch");
  return row_dot(e.directions(), e.directions() * a.matrix().transpose()).real();
}

RVector balancing_potential(const Embedding& e, const HermitianMatrix& mu_bar_value) {
  return (-2.0 * kPi * e.k()) * h_A(e, herm::trace_free(mu_bar_value));
}

RVector balancing_potential(const Embedding& e) { return balancing_potential(e, mu_bar(e)); }

XiFields xi_fields(const Embedding& e, const HermitianMatrix& a, const HermitianMatrix& b) {
  require(a.dim() == e.dim() && b.dim() == e.dim(), "xi: dimension mismatch");
  const CMatrix& x = e.directions();
  CMatrix va = x * a.matrix().transpose();
  CMatrix vb = x * b.matrix().transpose();
  const CVector ha = row_dot(x, va), hb = row_dot(x, vb);
  va -= ha.asDiagonal() * x;
  vb -= hb.asDiagonal() * x;
  const CVector ea = row_dot(e.tangents(), va), eb = row_dot(e.tangents(), vb);
  XiFields out;
  out.total = row_dot(va, vb).real();
  out.tangential = ea.conjugate().cwiseProduct(eb).real();
  out.normal = out.total - out.tangential;
  return out;
}

XiProducts xi_decompose(const Embedding& e, const HermitianMatrix& a, const HermitianMatrix& b,
                        Eigen::Index node) {
  require(node >= 0 && node < e.directions().rows(), "xi_decompose: node out of range");
  require(a.dim() == e.dim() && b.dim() == e.dim(), "xi: dimension mismatch");
  const CVector x = e.directions().row(node).transpose();
  const CVector t = e.tangents().row(node).transpose();
  CVector va = a.matrix() * x, vb = b.matrix() * x;
  va -= x.dot(va) * x;
  vb -= x.dot(vb) * x;
  XiProducts p;
  p.total = va.dot(vb).real();
  p.tangential = (std::conj(t.dot(va)) * t.dot(vb)).real();
  p.normal = p.total - p.tangential;
  return p;
}

double l21_inner(const Embedding& e, const HermitianMatrix& a, const HermitianMatrix& b) {
  const XiFields xi = xi_fields(e, a, b);
  const RVector ha = h_A(e, a), hb = h_A(e, b);
  return e.fs_weights().dot(ha.cwiseProduct(hb) + xi.tangential);
}

HermitianMatrix d_mu_bar(const Embedding& e, const HermitianMatrix& a, double eps) {
  if (!(eps >= 1e-5 && eps <= 1e-2)) {
    std::ostringstream os;
    os << "d_mu_bar: eps " << eps << " outside [1e-5, 1e-2]";
    throw InvalidArgument(os.str());
  }
  require(a.dim() == e.dim(), "d_mu_bar: dimension mismatch");
  auto at = [&](double s) { return mu_bar(Embedding(herm::expm(a * s).matrix() * e.gauge(), e.frame_ptr())).matrix(); };
  auto central = [&](double h) -> CMatrix { return (at(h) - at(-h)) / (2.0 * h); };
  const CMatrix d1 = central(eps), d2 = central(0.5 * eps);
  return HermitianMatrix::symmetrized((4.0 * d2 - d1) / 3.0);
}

BergmanData::BergmanData(const KahlerData& m, int k) : k_(k), weights_(m.weights()) {
  const auto frame = SectionFrame::for_metric(k, m);
  point_ = hilb(*frame, m.weights());
  const CMatrix g = orthonormal_gauge(point_);
  ts_ = (0.5 * frame->log_weight().array()).exp().matrix().asDiagonal() * (frame->values() * g.transpose());
  rho_ = ts_.rowwise().squaredNorm();
}

Eigen::MatrixXd BergmanData::kernel() const {
  if (ts_.rows() > kMaxKernelNodes) {
    std::ostringstream os;
    os << "bergman_kernel: " << ts_.rows() << " nodes exceeds limit " << kMaxKernelNodes;
    throw NumericalError(os.str());
  }
  const CMatrix p = ts_.conjugate() * ts_.transpose();
  return p.cwiseAbs2() / static_cast<double>(k_);
}

HermitianMatrix BergmanData::section_matrix(const RVector& f) const {
  require(f.size() == weights_.size(), "section_matrix: sample count mismatch");
  return HermitianMatrix::symmetrized(weighted_outer(ts_, weights_.cwiseProduct(f)));
}

RVector BergmanData::qk_apply(const RVector& f) const {
  const HermitianMatrix af = section_matrix(f);
  return row_dot(ts_, ts_ * af.matrix().transpose()).real() / static_cast<double>(k_);
}

RVector rho(const KahlerData& m, int k) { return BergmanData(m, k).rho(); }

Eigen::MatrixXd bergman_kernel(const KahlerData& m, int k) { return BergmanData(m, k).kernel(); }

RVector qk_apply(const KahlerData& m, int k, const RVector& f) { return BergmanData(m, k).qk_apply(f); }

}  // namespace bflab::bergman
