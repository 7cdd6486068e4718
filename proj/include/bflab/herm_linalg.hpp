#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace bflab::herm {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// A complex Hermitian matrix. Construction checks A = A* to a relative
/// tolerance of 1e-12 and stores the exactly symmetrized matrix.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(const CMatrix& entries);

  static HermitianMatrix zero(Eigen::Index dim);
  static HermitianMatrix identity(Eigen::Index dim);
  static HermitianMatrix diagonal(const RVector& d);
  /// Symmetrizes (A + A*)/2 without checking.
  static HermitianMatrix symmetrized(const CMatrix& a);

  Eigen::Index dim() const { return m_.rows(); }
  const CMatrix& matrix() const { return m_; }
  double trace() const { return m_.trace().real(); }

  HermitianMatrix operator+(const HermitianMatrix& o) const;
  HermitianMatrix operator-(const HermitianMatrix& o) const;
  HermitianMatrix operator*(double s) const;

 private:
  CMatrix m_;
};

/// Positive-definite Hermitian matrix: a point of GL(N+1)/U(N+1). Positivity
/// is checked on the diagonally rescaled matrix.
class PositiveHermitian {
 public:
  PositiveHermitian() = default;
  explicit PositiveHermitian(const CMatrix& entries);
  explicit PositiveHermitian(const HermitianMatrix& h);

  static PositiveHermitian identity(Eigen::Index dim);

  Eigen::Index dim() const { return m_.dim(); }
  const CMatrix& matrix() const { return m_.matrix(); }
  const HermitianMatrix& hermitian() const { return m_; }

 private:
  HermitianMatrix m_;
};

struct EigenDecomposition {
  RVector values;   // ascending
  CMatrix vectors;  // columns
};

EigenDecomposition eigh(const HermitianMatrix& a);

HermitianMatrix trace_free(const HermitianMatrix& a);
double killing_norm(const HermitianMatrix& a);
double op_norm(const HermitianMatrix& a);

/// exp(A) via eigen-decomposition.
HermitianMatrix expm(const HermitianMatrix& a);
/// log(H) for positive H; throws NumericalError when the spectrum has an
/// eigenvalue below 1e-14 of the largest.
HermitianMatrix logm(const PositiveHermitian& h);
/// H^p for positive H.
PositiveHermitian powm(const PositiveHermitian& h, double p);

/// e^{tA} H0 e^{tA}.
PositiveHermitian geodesic_point(const PositiveHermitian& h0, const HermitianMatrix& a, double t);

/// d(H0,H1) = 1/2 || log(H0^{-1/2} H1 H0^{-1/2}) ||_Killing, so that
/// d(H, e^A H e^A) = ||A||.
double distance(const PositiveHermitian& h0, const PositiveHermitian& h1);

/// Distance for the rescaled Killing form k^{-(n+2)} tr A^2.
double scaled_distance(const PositiveHermitian& h0, const PositiveHermitian& h1, int k, int n);

/// Inverse of the rescaling: multiplies a scaled distance by k^{(n+2)/2}.
double unscale_distance(double scaled, int k, int n);

/// Real part of tr(A B); the Killing inner product.
double killing_inner(const HermitianMatrix& a, const HermitianMatrix& b);

}  // namespace bflab::herm
