#include "bflab/herm_linalg.hpp"

#include <cmath>
#include <sstream>

#include "bflab/error.hpp"

namespace bflab::herm {

namespace {

constexpr double kHermTol = 1e-12;
constexpr double kSpectrumFloor = 1e-14;

bool all_finite(const CMatrix& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (!std::isfinite(a(i, j).real()) || !std::isfinite(a(i, j).imag())) return false;
  return true;
}

CMatrix apply_spectral(const EigenDecomposition& e, const RVector& f) {
  return e.vectors * f.asDiagonal() * e.vectors.adjoint();
}

void check_same_dim(Eigen::Index a, Eigen::Index b) {
  if (a != b) {
    std::ostringstream os;
    os << "dimension mismatch: " << a << " vs " << b;
    throw InvalidArgument(os.str());
  }
}

}  // namespace

HermitianMatrix::HermitianMatrix(const CMatrix& entries) {
  require(entries.rows() == entries.cols(), "Hermitian matrix must be square");
  require(all_finite(entries), "Hermitian matrix has non-finite entries");
  const double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
  const double asym = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
  if (asym > kHermTol * scale) {
    std::ostringstream os;
    os << "matrix is not Hermitian (max |A - A*| = " << asym << ")";
    throw InvalidArgument(os.str());
  }
  m_ = 0.5 * (entries + entries.adjoint());
}

HermitianMatrix HermitianMatrix::zero(Eigen::Index dim) {
  HermitianMatrix h;
  h.m_ = CMatrix::Zero(dim, dim);
  return h;
}

HermitianMatrix HermitianMatrix::identity(Eigen::Index dim) {
  HermitianMatrix h;
  h.m_ = CMatrix::Identity(dim, dim);
  return h;
}

HermitianMatrix HermitianMatrix::diagonal(const RVector& d) {
  HermitianMatrix h;
  h.m_ = d.cast<cplx>().asDiagonal();
  return h;
}

HermitianMatrix HermitianMatrix::symmetrized(const CMatrix& a) {
  require(a.rows() == a.cols(), "Hermitian matrix must be square");
  HermitianMatrix h;
  h.m_ = 0.5 * (a + a.adjoint());
  return h;
}

HermitianMatrix HermitianMatrix::operator+(const HermitianMatrix& o) const {
  check_same_dim(dim(), o.dim());
  return symmetrized(m_ + o.m_);
}

HermitianMatrix HermitianMatrix::operator-(const HermitianMatrix& o) const {
  check_same_dim(dim(), o.dim());
  return symmetrized(m_ - o.m_);
}

HermitianMatrix HermitianMatrix::operator*(double s) const { return symmetrized(m_ * s); }

PositiveHermitian::PositiveHermitian(const CMatrix& entries)
    : PositiveHermitian(HermitianMatrix(entries)) {}

PositiveHermitian::PositiveHermitian(const HermitianMatrix& h) : m_(h) {
  // Test the Jacobi-scaled matrix so that badly scaled but well-conditioned
  // Gram matrices (monomial frames at large k) are accepted.
  const RVector d = h.matrix().diagonal().real();
  if (!(d.minCoeff() > 0.0)) throw NumericalError("matrix is not positive definite (non-positive diagonal)");
  const RVector s = d.cwiseSqrt().cwiseInverse();
  const RVector ev = eigh(HermitianMatrix::symmetrized(s.asDiagonal() * h.matrix() * s.asDiagonal())).values;
  if (!(ev(0) > 0.0)) {
    std::ostringstream os;
    os << "matrix is not positive definite (smallest scaled eigenvalue " << ev(0) << ")";
    throw NumericalError(os.str());
  }
  if (ev(0) < kSpectrumFloor * ev(ev.size() - 1))
    throw NumericalError("positive matrix is numerically singular");
}

PositiveHermitian PositiveHermitian::identity(Eigen::Index dim) {
  return PositiveHermitian(HermitianMatrix::identity(dim));
}

EigenDecomposition eigh(const HermitianMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a.matrix());
  if (es.info() != Eigen::Success) throw NumericalError("Hermitian eigen-decomposition failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

HermitianMatrix trace_free(const HermitianMatrix& a) {
  const double shift = a.trace() / static_cast<double>(a.dim());
  return HermitianMatrix::symmetrized(a.matrix() - shift * CMatrix::Identity(a.dim(), a.dim()));
}

double killing_inner(const HermitianMatrix& a, const HermitianMatrix& b) {
  check_same_dim(a.dim(), b.dim());
  // tr(AB) = sum_ij A_ij B_ji = sum_ij A_ij conj(B_ij) for Hermitian B.
  return (a.matrix().array() * b.matrix().conjugate().array()).sum().real();
}

double killing_norm(const HermitianMatrix& a) { return a.matrix().norm(); }

double op_norm(const HermitianMatrix& a) {
  if (a.dim() == 0) return 0.0;
  return eigh(a).values.cwiseAbs().maxCoeff();
}

HermitianMatrix expm(const HermitianMatrix& a) {
  const auto e = eigh(a);
  return HermitianMatrix::symmetrized(apply_spectral(e, e.values.array().exp().matrix()));
}

HermitianMatrix logm(const PositiveHermitian& h) {
  const auto e = eigh(h.hermitian());
  const double top = e.values.maxCoeff();
  if (!(e.values.minCoeff() > kSpectrumFloor * top))
    throw NumericalError("matrix logarithm: spectrum below the clipping floor");
  return HermitianMatrix::symmetrized(apply_spectral(e, e.values.array().log().matrix()));
}

PositiveHermitian powm(const PositiveHermitian& h, double p) {
  const auto e = eigh(h.hermitian());
  return PositiveHermitian(
      HermitianMatrix::symmetrized(apply_spectral(e, e.values.array().pow(p).matrix())));
}

PositiveHermitian geodesic_point(const PositiveHermitian& h0, const HermitianMatrix& a, double t) {
  check_same_dim(h0.dim(), a.dim());
  const CMatrix g = expm(a * t).matrix();
  return PositiveHermitian(HermitianMatrix::symmetrized(g * h0.matrix() * g));
}

double distance(const PositiveHermitian& h0, const PositiveHermitian& h1) {
  check_same_dim(h0.dim(), h1.dim());
  // Eigenvalues of H0^{-1/2} H1 H0^{-1/2} equal the generalized eigenvalues
  // of H1 v = lambda H0 v.
  Eigen::GeneralizedSelfAdjointEigenSolver<CMatrix> ges(h1.matrix(), h0.matrix(),
                                                        Eigen::EigenvaluesOnly);
  if (ges.info() != Eigen::Success) throw NumericalError("generalized eigensolver failed");
  const RVector lam = ges.eigenvalues();
  if (!(lam.minCoeff() > 0.0)) throw NumericalError("distance: non-positive relative spectrum");
  return 0.5 * lam.array().log().matrix().norm();
}

double scaled_distance(const PositiveHermitian& h0, const PositiveHermitian& h1, int k, int n) {
  require(k >= 1, "scaled_distance: k must be >= 1");
  return std::pow(static_cast<double>(k), -0.5 * (n + 2)) * distance(h0, h1);
}

double unscale_distance(double scaled, int k, int n) {
  require(k >= 1, "unscale_distance: k must be >= 1");
  return std::pow(static_cast<double>(k), 0.5 * (n + 2)) * scaled;
}

}  // namespace bflab::herm
