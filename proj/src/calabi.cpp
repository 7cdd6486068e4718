#include "bflab/calabi.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "bflab/error.hpp"

namespace bflab::manifold {

namespace {
constexpr double kPi = std::numbers::pi;
}

CalabiFlow::CalabiFlow(int n_nodes) : zonal_(n_nodes) {
  require(n_nodes >= 8, "CalabiFlow: need at least 8 nodes");
}

SymmetricProfile CalabiFlow::initial(const MetricSpec& spec) const {
  RVector phi(size());
  for (int i = 0; i < size(); ++i) phi[i] = spec.potential_at(zonal_.nodes().x[i]);
  return {phi};
}

RVector CalabiFlow::density(const SymmetricProfile& p) const {
  require(p.potential.size() == size(), "CalabiFlow: profile size mismatch");
  RVector rho = (1.0 - zonal_.round_laplacian(p.potential).array() / (2.0 * kPi)).matrix();
  const double dmin = rho.minCoeff();
  if (!(dmin > 0.0)) {
    std::ostringstream os;
    os << "Calabi flow: metric degenerated (min density " << dmin << ")";
    throw NumericalError(os.str());
  }
  return rho;
}

RVector CalabiFlow::scalar_curvature(const SymmetricProfile& p) const {
  const RVector rho = density(p);
  const RVector lap_log = zonal_.round_laplacian(rho.array().log().matrix());
  return ((2.0 * kPi + 0.25 * lap_log.array()) / rho.array()).matrix();
}

RVector CalabiFlow::velocity(const SymmetricProfile& p) const {
  return (scalar_curvature(p).array() - 2.0 * kPi).matrix();
}

double CalabiFlow::calabi_energy(const SymmetricProfile& p) const {
  const RVector rho = density(p);
  const RVector v = velocity(p);
  return zonal_.round_weights().cwiseProduct(rho).dot(v.cwiseAbs2());
}

double CalabiFlow::stable_dt(const SymmetricProfile& p, double safety) const {
  const double lam = zonal_.max_eigenvalue() / density(p).minCoeff();
  return safety * 8.0 * kPi / (lam * lam);
}

SymmetricProfile CalabiFlow::step(const SymmetricProfile& p, double dt) const {
  require(dt != 0.0 && std::isfinite(dt), "Calabi step: dt must be finite and nonzero");
  if (std::abs(dt) > stable_dt(p, 2.5)) {
    std::ostringstream os;
    os << "Calabi step: dt " << dt << " exceeds stability bound " << stable_dt(p, 2.5);
    throw InvalidArgument(os.str());
  }
  const RVector& y = p.potential;
  const RVector k1 = velocity({y});
  const RVector k2 = velocity({y + 0.5 * dt * k1});
  const RVector k3 = velocity({y + 0.5 * dt * k2});
  const RVector k4 = velocity({y + dt * k3});
  SymmetricProfile out{y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)};
  density(out);
  return out;
}

double CalabiFlow::evaluate(const SymmetricProfile& p, double cos_theta) const {
  const RVector c = zonal_.analyze(p.potential);
  const Eigen::MatrixXd leg = normalized_legendre(size() - 1, cos_theta);
  return leg.col(0).dot(c);
}

RVector CalabiFlow::interpolate(const RVector& samples, const SphereGrid& grid) const {
  RVector ring(grid.n_theta());
  const auto& gx = grid.legendre().x;
  if (grid.n_theta() == size()) {
    ring = samples;
  } else {
    const RVector c = zonal_.analyze(samples);
    for (int i = 0; i < grid.n_theta(); ++i)
      ring[i] = normalized_legendre(size() - 1, gx[i]).col(0).dot(c);
  }
  RVector out(grid.size());
  for (Eigen::Index n = 0; n < grid.size(); ++n) out[n] = ring[n / grid.n_phi()];
  return out;
}

RVector CalabiFlow::to_grid(const SymmetricProfile& p, const SphereGrid& grid) const {
  require(p.potential.size() == size(), "CalabiFlow: profile size mismatch");
  return interpolate(p.potential, grid);
}

RVector CalabiFlow::velocity_on_grid(const SymmetricProfile& p, const SphereGrid& grid) const {
  return interpolate(velocity(p), grid);
}

}  // namespace bflab::manifold
