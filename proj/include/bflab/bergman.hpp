#pragma once

#include <memory>

#include "bflab/herm_linalg.hpp"
#include "bflab/kahler.hpp"

namespace bflab::bergman {

using herm::cplx;
using herm::CMatrix;
using herm::CVector;
using herm::HermitianMatrix;
using herm::PositiveHermitian;
using manifold::KahlerData;
using manifold::RVector;
using manifold::SphereGrid;
using manifold::SphereGridPtr;

/// An inner product on H^0(O(k)) given by its Gram matrix H_ab = <z^a, z^b>
/// relative to the monomial frame.
struct BergmanPoint {
  int k = 0;
  PositiveHermitian H;
};

/// The balanced point of the round metric: H = diag(1 / ((k+1) C(k,a))).
BergmanPoint balanced_round_point(int k);

/// Cholesky gauge: G = L^{-1} with H = L L*, L lower with positive diagonal.
/// The sections t = G z are b-orthonormal.
CMatrix orthonormal_gauge(const BergmanPoint& b);

/// The point e^A . b obtained by moving the embedding by e^A, with A written
/// in the b-orthonormal frame. distance(b, act(b, A)) = ||A||.
BergmanPoint act(const BergmanPoint& b, const HermitianMatrix& a);

/// Monomial sections z^a of O(k) on a sphere grid, stored in the bounded
/// normalization u_a = z^a (1+|z|^2)^{-k/2}, together with a per-node
/// log-weight so that |z^a|^2_{h^k} = |u_a|^2 exp(log_weight).
class SectionFrame {
 public:
  SectionFrame(int k, SphereGridPtr grid, RVector log_weight);
  static std::shared_ptr<const SectionFrame> round(int k, SphereGridPtr grid);
  /// Fiber metric h^k = exp(-2k phi) h_round^k of the given metric.
  static std::shared_ptr<const SectionFrame> for_metric(int k, const KahlerData& m);

  int k() const { return k_; }
  Eigen::Index dim() const { return k_ + 1; }
  const SphereGrid& grid() const { return *grid_; }
  const SphereGridPtr& grid_ptr() const { return grid_; }
  /// node x section.
  const CMatrix& values() const { return values_; }
  /// Derivatives of the sections along the curve in a chart adapted to each
  /// node (z for the northern hemisphere, 1/z for the southern), up to a
  /// node-dependent scalar.
  const CMatrix& derivatives() const { return derivs_; }
  const RVector& log_weight() const { return log_weight_; }

 private:
  int k_;
  SphereGridPtr grid_;
  CMatrix values_;
  CMatrix derivs_;
  RVector log_weight_;
};

using SectionFramePtr = std::shared_ptr<const SectionFrame>;

/// L^2 Gram matrix sum_i w_i exp(lw_i) u_i u_i^* for the frame's fiber metric and
/// the supplied volume weights. Throws NumericalError on rank deficiency.
BergmanPoint hilb(const SectionFrame& frame, const RVector& volume_weights);
BergmanPoint hilb(const KahlerData& m, int k);

/// The embedding of CP^1 into CP^k given by a b-orthonormal basis,
/// sampled on the frame's grid. Everything on the Fubini-Study side of
/// the correspondence lives here.
class Embedding {
 public:
  Embedding(const BergmanPoint& b, SectionFramePtr frame);
  /// Embedding by the sections t = G z for an arbitrary invertible gauge G.
  Embedding(CMatrix gauge, SectionFramePtr frame);

  int k() const { return frame_->k(); }
  Eigen::Index dim() const { return frame_->dim(); }
  const SectionFrame& frame() const { return *frame_; }
  const SectionFramePtr& frame_ptr() const { return frame_; }
  const CMatrix& gauge() const { return gauge_; }

  /// node x section, the sections t = G u in the bounded normalization.
  const CMatrix& sections() const { return t_; }
  /// |t|^2 per node.
  const RVector& norm2() const { return norm2_; }
  /// Unit vectors x = t / |t| (node x section).
  const CMatrix& directions() const { return x_; }
  /// Unit tangent vectors of the embedded curve, orthogonal to x.
  const CMatrix& tangents() const { return e_; }

  /// omega_FS / omega_round for the unscaled Fubini-Study form (mass k).
  const RVector& fs_density() const { return fs_density_; }
  /// Round weights times fs_density.
  const RVector& fs_weights() const { return fs_weights_; }
  /// Potential phi with h_FS = exp(-2 phi) h_round on O(1), i.e. log|t|^2 / 2k.
  RVector fs_potential() const;
  /// FS fiber metric of h^k as log-weights in the frame's convention, so that
  /// SectionFrame(k, grid, fs_log_weight()) carries the FS metric.
  RVector fs_log_weight() const;

 private:
  SectionFramePtr frame_;
  CMatrix gauge_;
  CMatrix t_;
  RVector norm2_;
  CMatrix x_;
  CMatrix e_;
  RVector fs_density_;
  RVector fs_weights_;
};

/// FS fiber metric of b as frame log-weights (see Embedding::fs_log_weight).
RVector fs(const BergmanPoint& b, const SectionFramePtr& frame);

HermitianMatrix mu_point(const Embedding& e, Eigen::Index node);
HermitianMatrix mu_bar(const Embedding& e);
/// H_A = tr(A mu) at every node.
RVector h_A(const Embedding& e, const HermitianMatrix& a);
/// beta_k = -2 pi k tr(mu_bar_0 mu).
RVector balancing_potential(const Embedding& e);
RVector balancing_potential(const Embedding& e, const HermitianMatrix& mu_bar_value);

/// Pointwise Fubini-Study inner products of the ambient vector fields
/// generated by A and B, split into parts tangent and normal to the curve.
/// The vector field of A at x is A x - (x* A x) x.
struct XiProducts {
  double total = 0.0;
  double tangential = 0.0;
  double normal = 0.0;
};
XiProducts xi_decompose(const Embedding& e, const HermitianMatrix& a, const HermitianMatrix& b,
                        Eigen::Index node);

struct XiFields {
  RVector total;
  RVector tangential;
  RVector normal;
};
XiFields xi_fields(const Embedding& e, const HermitianMatrix& a, const HermitianMatrix& b);

/// int (H_A H_B + (xi_A^T, xi_B^T)) omega_FS.
double l21_inner(const Embedding& e, const HermitianMatrix& a, const HermitianMatrix& b);

/// Derivative of mu_bar along s -> e^{sA} . b (A in the b-orthonormal frame),
/// by Richardson-extrapolated central differences with steps eps and eps/2.
HermitianMatrix d_mu_bar(const Embedding& e, const HermitianMatrix& a, double eps = 1e-3);

/// Metric-side Bergman data of (m, k): the L^2-orthonormal basis of
/// H^0(O(k)) for h^k and omega, with fiber weights applied.
class BergmanData {
 public:
  BergmanData(const KahlerData& m, int k);

  int k() const { return k_; }
  const BergmanPoint& point() const { return point_; }
  /// node x section, |s_alpha|_{h^k} realized as complex values.
  const CMatrix& weighted_sections() const { return ts_; }
  const RVector& rho() const { return rho_; }
  const RVector& weights() const { return weights_; }

  /// K_k(p,q) = |B_k(p,q)|^2 / k. Throws NumericalError above kMaxKernelNodes.
  Eigen::MatrixXd kernel() const;
  /// (Q_k f)(p) = int K_k(p,q) f(q) omega(q).
  RVector qk_apply(const RVector& f) const;
  /// (A_F)_{ab} = int (s_a, s_b) F omega.
  HermitianMatrix section_matrix(const RVector& f) const;

  static constexpr Eigen::Index kMaxKernelNodes = 4000;

 private:
  int k_;
  BergmanPoint point_;
  CMatrix ts_;
  RVector rho_;
  RVector weights_;
};

RVector rho(const KahlerData& m, int k);
Eigen::MatrixXd bergman_kernel(const KahlerData& m, int k);
RVector qk_apply(const KahlerData& m, int k, const RVector& f);

}  // namespace bflab::bergman
