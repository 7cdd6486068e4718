#pragma once

#include <complex>
#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace bflab::manifold {

using RVector = Eigen::VectorXd;

/// Gauss-Legendre nodes and weights on [-1, 1], sorted by decreasing x
/// (so that theta = acos(x) increases).
struct GaussLegendre {
  RVector x;
  RVector w;
};
GaussLegendre gauss_legendre(int n);

struct GridSpec {
  int n_theta = 16;
  int n_phi = 32;
  bool operator==(const GridSpec&) const = default;
};

/// Tensor grid on CP^1 = S^2: Gauss-Legendre in cos(theta) times uniform phi.
/// Node index is i_theta * n_phi + j_phi. Poles are never nodes.
class SphereGrid {
 public:
  explicit SphereGrid(GridSpec spec);

  const GridSpec& spec() const { return spec_; }
  int n_theta() const { return spec_.n_theta; }
  int n_phi() const { return spec_.n_phi; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(spec_.n_theta) * spec_.n_phi; }

  double theta(Eigen::Index node) const { return theta_[node / spec_.n_phi]; }
  double phi(Eigen::Index node) const { return phi_[node % spec_.n_phi]; }
  double cos_theta(Eigen::Index node) const { return gl_.x[node / spec_.n_phi]; }
  /// Affine chart coordinate z = tan(theta/2) e^{i phi}.
  std::complex<double> chart(Eigen::Index node) const;

  const GaussLegendre& legendre() const { return gl_; }
  const std::vector<double>& thetas() const { return theta_; }
  const std::vector<double>& phis() const { return phi_; }

  /// Weights of the unit-area round metric; they sum to 1.
  const RVector& round_weights() const { return round_w_; }

  /// Polynomial exactness in cos(theta) under the round metric.
  int exactness_degree() const { return 2 * spec_.n_theta - 1; }

  /// Samples of a function of (theta, phi).
  template <class F>
  RVector sample(F&& f) const {
    RVector out(size());
    for (Eigen::Index i = 0; i < size(); ++i) out[i] = f(theta(i), phi(i));
    return out;
  }

 private:
  GridSpec spec_;
  GaussLegendre gl_;
  std::vector<double> theta_;
  std::vector<double> phi_;
  RVector round_w_;
};

using SphereGridPtr = std::shared_ptr<const SphereGrid>;
SphereGridPtr make_grid(GridSpec spec);

/// A grid paired with the weights of a chosen volume form.
struct QuadratureGrid {
  SphereGridPtr grid;
  RVector weights;
  int exactness_degree = 0;

  Eigen::Index size() const { return weights.size(); }
};

/// sum_i w_i f_i; throws on length mismatch.
double integrate(const RVector& f, const QuadratureGrid& q);

}  // namespace bflab::manifold
