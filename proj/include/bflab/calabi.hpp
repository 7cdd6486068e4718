#pragma once

#include "bflab/kahler.hpp"
#include "bflab/spectral.hpp"

namespace bflab::manifold {

/// S^1-invariant relative potential sampled at the Gauss-Legendre nodes of a
/// ZonalTransform (x = cos theta decreasing).
struct SymmetricProfile {
  RVector potential;
};

/// Calabi flow phi' = S - Sbar restricted to S^1-invariant potentials on CP^1,
/// discretized by a Legendre spectral method and stepped with classical RK4.
class CalabiFlow {
 public:
  explicit CalabiFlow(int n_nodes);

  const ZonalTransform& transform() const { return zonal_; }
  int size() const { return zonal_.size(); }

  SymmetricProfile initial(const MetricSpec& spec) const;

  RVector density(const SymmetricProfile& p) const;
  RVector scalar_curvature(const SymmetricProfile& p) const;
  /// S - Sbar, with Sbar = 2 pi.
  RVector velocity(const SymmetricProfile& p) const;
  /// Integral of (S - Sbar)^2 against omega.
  double calabi_energy(const SymmetricProfile& p) const;

  /// Step size with |dt * lambda^2 / 8 pi| <= safety at the top mode,
  /// corrected for the smallest density. RK4 is stable below about 2.7.
  double stable_dt(const SymmetricProfile& p, double safety = 1.0) const;

  /// One RK4 step (dt may be negative for short backward steps); throws
  /// InvalidArgument if |dt| exceeds stable_dt(p, 2.5) and
  /// NumericalError if any stage loses positivity.
  SymmetricProfile step(const SymmetricProfile& p, double dt) const;

  /// Spectral interpolation of the potential at arbitrary cos(theta).
  double evaluate(const SymmetricProfile& p, double cos_theta) const;
  /// Potential samples on a 2-D grid.
  RVector to_grid(const SymmetricProfile& p, const SphereGrid& grid) const;
  RVector velocity_on_grid(const SymmetricProfile& p, const SphereGrid& grid) const;

 private:
  RVector interpolate(const RVector& samples, const SphereGrid& grid) const;

  ZonalTransform zonal_;
};

inline SymmetricProfile calabi_flow_step(const CalabiFlow& flow, const SymmetricProfile& p, double dt) {
  return flow.step(p, dt);
}

}  // namespace bflab::manifold
