#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "bflab/sphere_grid.hpp"

namespace bflab::manifold {

/// Fully normalized associated Legendre functions, orthonormal on [-1,1]:
/// table(l, m) for 0 <= m <= l <= lmax at a single x.
Eigen::MatrixXd normalized_legendre(int lmax, double x);

/// Spherical-harmonic analysis/synthesis on a SphereGrid, band-limited to
/// degree lmax = n_theta - 1 and order mmax = min(lmax, (n_phi - 1) / 2).
/// The round Laplacian of the unit-area sphere is diagonal here with
/// eigenvalue 4 pi l (l + 1).
class SphericalTransform {
 public:
  explicit SphericalTransform(SphereGridPtr grid);

  int lmax() const { return lmax_; }
  int mmax() const { return mmax_; }
  const SphereGrid& grid() const { return *grid_; }

  /// Coefficients c(l, m), m >= 0, stored as a complex (lmax+1) x (mmax+1) array.
  Eigen::MatrixXcd analyze(const RVector& f) const;
  RVector synthesize(const Eigen::MatrixXcd& c) const;

  RVector project(const RVector& f) const { return synthesize(analyze(f)); }
  /// Positive Laplace-Beltrami operator of the unit-area round metric.
  RVector round_laplacian(const RVector& f) const;

  /// Real orthonormal basis (w.r.t. round weights) of the band-limited space,
  /// one column per (l, m, cos|sin); degrees returned alongside.
  Eigen::MatrixXd real_basis(std::vector<int>* degrees) const;

 private:
  SphereGridPtr grid_;
  int lmax_;
  int mmax_;
  // legendre_[i](l, m)
  std::vector<Eigen::MatrixXd> legendre_;
};

/// Legendre transform for S^1-invariant functions sampled at Gauss-Legendre
/// nodes in x = cos(theta).
class ZonalTransform {
 public:
  explicit ZonalTransform(int n);

  int size() const { return static_cast<int>(gl_.x.size()); }
  const GaussLegendre& nodes() const { return gl_; }
  /// Weights of the unit-area round metric restricted to zonal functions.
  RVector round_weights() const { return 0.5 * gl_.w; }

  RVector analyze(const RVector& f) const;
  RVector synthesize(const RVector& c) const;
  RVector round_laplacian(const RVector& f) const;
  double max_eigenvalue() const;

 private:
  GaussLegendre gl_;
  Eigen::MatrixXd p_;  // p_(i, l) = Pbar_l(x_i)
};

}  // namespace bflab::manifold
