#pragma once

#include <memory>
#include <mutex>
#include <vector>

#include <Eigen/Dense>

#include "bflab/spectral.hpp"
#include "bflab/sphere_grid.hpp"

namespace bflab::manifold {

/// Grid-independent description of a metric in c1(O(1)): the relative
/// potential phi = sum_l a_l P_l(cos theta) over the round metric.
struct MetricSpec {
  std::vector<double> legendre;  // a_0, a_1, ...

  static MetricSpec round() { return {}; }
  /// phi = eps (3 cos^2 theta - 1) / 12, whose density is 1 - eps (3 cos^2 theta - 1).
  static MetricSpec perturbed(double eps);

  double potential_at(double cos_theta) const;
  bool is_round() const;
};

struct Eigenpairs {
  RVector values;           // ascending, values[0] = 0
  Eigen::MatrixXd vectors;  // grid samples, orthonormal in L^2(omega)
};

/// A Kahler metric omega = omega_round + (i/pi) d dbar phi on CP^1, sampled on
/// a SphereGrid. Fiber metric on O(1) is h = exp(-2 phi) h_round. The
/// Laplacian is the positive Laplace-Beltrami operator of g = omega(., J.),
/// and scalar curvature is half the Gaussian curvature (mean 2 pi).
class KahlerData {
 public:
  KahlerData(SphereGridPtr grid, RVector potential);
  KahlerData(SphereGridPtr grid, const MetricSpec& spec);
  static KahlerData round(SphereGridPtr grid);

  const SphereGrid& grid() const { return *grid_; }
  const SphereGridPtr& grid_ptr() const { return grid_; }
  const SphericalTransform& transform() const { return *transform_; }

  const RVector& potential() const { return potential_; }
  /// omega / omega_round.
  const RVector& density() const { return density_; }
  const RVector& scalar_curvature() const { return scalar_; }
  /// Mean of S against omega (total volume is 1).
  double mean_scalar_curvature() const;

  /// Weights of omega on the grid (round weights times density).
  const RVector& weights() const { return weights_; }
  QuadratureGrid quadrature() const;

  double inner(const RVector& f, const RVector& g) const;
  double l2_norm(const RVector& f) const;

  RVector laplacian_apply(const RVector& f) const;
  /// Pointwise g_omega(grad f, grad g).
  RVector gradient_inner(const RVector& f, const RVector& g) const;

  /// Eigenpairs of the discrete Laplacian, computed on first use.
  const Eigenpairs& eigenpairs() const;
  /// exp(-s Delta) f. The round metric is handled spectrally without eigenpairs.
  RVector heat_semigroup(double s, const RVector& f) const;
  /// Derivative of S along phi -> phi + eps * eta.
  RVector linearized_scalar_curvature(const RVector& eta) const;

  /// Largest grid accepted by eigenpairs().
  static constexpr Eigen::Index kMaxEigenNodes = 4000;

 private:
  struct Cache {
    std::once_flag once;
    Eigenpairs pairs;
  };

  SphereGridPtr grid_;
  std::shared_ptr<const SphericalTransform> transform_;
  RVector potential_;
  RVector density_;
  RVector scalar_;
  RVector weights_;
  std::shared_ptr<Cache> cache_;
  bool round_ = false;
};

/// Samples of the scalar curvature for given density samples.
RVector scalar_curvature_from_density(const SphericalTransform& t, const RVector& density);

/// Gauss-Legendre x round-phi grid with weights of the given metric.
QuadratureGrid build_grid(int n_theta, int n_phi, const MetricSpec& metric);

}  // namespace bflab::manifold
