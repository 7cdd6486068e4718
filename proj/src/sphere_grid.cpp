#include "bflab/sphere_grid.hpp"

#include <cmath>
#include <numbers>

#include "bflab/error.hpp"

namespace bflab::manifold {

GaussLegendre gauss_legendre(int n) {
  require(n >= 1, "gauss_legendre: n must be positive");
  GaussLegendre gl{RVector(n), RVector(n)};
  const double pi = std::numbers::pi;
  for (int i = 0; i < n; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int l = 2; l <= n; ++l) {
        const double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    gl.x[i] = x;
    gl.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return gl;
}

SphereGrid::SphereGrid(GridSpec spec) : spec_(spec) {
  require(spec.n_theta >= 8 && spec.n_phi >= 8, "build_grid: n_theta and n_phi must be >= 8");
  gl_ = gauss_legendre(spec.n_theta);
  theta_.resize(spec.n_theta);
  for (int i = 0; i < spec.n_theta; ++i) theta_[i] = std::acos(gl_.x[i]);
  phi_.resize(spec.n_phi);
  for (int j = 0; j < spec.n_phi; ++j) phi_[j] = 2.0 * std::numbers::pi * j / spec.n_phi;
  round_w_.resize(size());
  for (int i = 0; i < spec.n_theta; ++i)
    for (int j = 0; j < spec.n_phi; ++j)
      round_w_[static_cast<Eigen::Index>(i) * spec.n_phi + j] = gl_.w[i] / (2.0 * spec.n_phi);
}

std::complex<double> SphereGrid::chart(Eigen::Index node) const {
  return std::polar(std::tan(0.5 * theta(node)), phi(node));
}

SphereGridPtr make_grid(GridSpec spec) { return std::make_shared<const SphereGrid>(spec); }

double integrate(const RVector& f, const QuadratureGrid& q) {
  require(f.size() == q.weights.size(), "integrate: sample count does not match grid");
  return q.weights.dot(f);
}

}  // namespace bflab::manifold
