#pragma once

#include <optional>
#include <vector>

#include "bflab/bergman.hpp"
#include "bflab/calabi.hpp"

namespace bflab::flows {

using bergman::BergmanPoint;
using bergman::SectionFramePtr;
using herm::HermitianMatrix;
using manifold::GridSpec;
using manifold::MetricSpec;
using manifold::RVector;

struct Diagnostics {
  double mu0_killing = 0.0;  // ||mu_bar_0||
  double mu_bar_op = 0.0;
  double beta_sup = 0.0;
  double distance = 0.0;  // to the reference trace, when one is attached
  double scaled_distance = 0.0;
};

struct FlowTrace {
  int k = 0;
  std::vector<double> times;
  std::vector<BergmanPoint> points;
  std::vector<Diagnostics> diagnostics;

  void append(double t, BergmanPoint b, Diagnostics d);
  std::size_t size() const { return times.size(); }
  /// Checks the FlowTrace invariants; throws NumericalError when violated.
  void validate() const;
};

/// Diagnostics of a point whose mu_bar is integrated on the frame's grid.
Diagnostics diagnose(const BergmanPoint& b, const SectionFramePtr& frame);

/// Grid used for degree-k sections throughout the experiments.
GridSpec grid_for_degree(int k, int pad = 8);

/// One exponential step G <- exp(-tau 2 pi k^2 mu_bar_0) G, with
/// tau = min(dt, 0.5 / (2 pi k^2 ||mu_bar_0||_op)). Returns the new point
/// and writes tau.
BergmanPoint balancing_step(const BergmanPoint& b, const SectionFramePtr& frame, double dt, double* tau);

/// Balancing flow from b0 on [0, T], recording every step.
FlowTrace balancing_flow(const BergmanPoint& b0, const SectionFramePtr& frame, double dt, double T);
/// Continues a trace up to time T; identical to an uninterrupted run.
void resume_balancing_flow(FlowTrace& trace, const SectionFramePtr& frame, double dt, double T);
/// Flow for a fixed duration without recording.
BergmanPoint balancing_advance(const BergmanPoint& b, const SectionFramePtr& frame, double dt, double duration);

/// Iterates b <- Hilb(FS(b)) with the Fubini-Study volume, rescaled to keep
/// det H fixed. Records the start and every iterate.
FlowTrace t_iteration(const BergmanPoint& b0, const SectionFramePtr& frame, int iters);

/// Averages A over the Klein four-group generated by z -> -z and z -> 1/z in
/// the round balanced frame and removes the trace. Starts built from such A
/// have a unique balanced limit.
HermitianMatrix klein_symmetrize(const HermitianMatrix& a);

struct CalabiPathOptions {
  int k = 8;
  GridSpec grid;
  int profile_nodes = 24;
  double T = 0.02;
  int samples = 10;
  /// Calabi steps use stable_dt(profile, calabi_safety).
  double calabi_safety = 1.0;
};

struct CalabiBergmanPath {
  FlowTrace trace;                    // Bergman points of omega(t)
  std::vector<HermitianMatrix> U;     // tangent to the path, orthonormal frame
  std::vector<HermitianMatrix> V;     // balancing-flow vector field -2 pi k^2 mu_bar_0
  std::vector<double> calabi_energy;  // of omega(t)
};

/// Runs Calabi flow from the metric and records hilb(omega(t), k) at
/// samples + 1 equally spaced times in [0, T].
CalabiBergmanPath calabi_bergman_path(const MetricSpec& metric, const CalabiPathOptions& opt);

struct CompareRow {
  int k = 0;
  std::vector<double> times;
  std::vector<double> scaled_distance;
  std::vector<double> distance;
  /// ||U_k - V_k|| k^{-3/2} along the Calabi side.
  std::vector<double> tangent_gap;
  double max_scaled_distance = 0.0;
};

struct CompareOptions {
  int profile_nodes = 24;
  double T = 0.02;
  int samples = 10;
  int balancing_substeps = 20;
  int grid_pad = 8;
};

/// Balancing flow from hilb(omega_0, k) against the Bergman points of Calabi
/// flow, for each k.
std::vector<CompareRow> compare_flows(const MetricSpec& metric, const std::vector<int>& k_list,
                                      const CompareOptions& opt);

struct PotentialRow {
  int k = 0;
  double sup_error = 0.0;       // sup |beta_k - (S - Sbar)|
  double mean_scalar = 0.0;     // int S omega
  double beta_fs_mean = 0.0;    // int beta_k omega_FS / k
};

std::vector<PotentialRow> potential_convergence(const MetricSpec& metric, const std::vector<int>& k_list,
                                                int grid_pad = 8);

}  // namespace bflab::flows
