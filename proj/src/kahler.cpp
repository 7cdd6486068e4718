#include "bflab/kahler.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "bflab/error.hpp"

namespace bflab::manifold {

namespace {
constexpr double kPi = std::numbers::pi;

double legendre_p(int l, double x) {
  double p0 = 1.0, p1 = x;
  if (l == 0) return p0;
  for (int n = 2; n <= l; ++n) {
    const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}
}  // namespace

MetricSpec MetricSpec::perturbed(double eps) { return {{0.0, 0.0, eps / 6.0}}; }

double MetricSpec::potential_at(double x) const {
  double v = 0.0;
  for (std::size_t l = 0; l < legendre.size(); ++l)
    if (legendre[l] != 0.0) v += legendre[l] * legendre_p(static_cast<int>(l), x);
  return v;
}

bool MetricSpec::is_round() const {
  for (std::size_t l = 1; l < legendre.size(); ++l)
    if (legendre[l] != 0.0) return false;
  return true;
}

RVector scalar_curvature_from_density(const SphericalTransform& t, const RVector& density) {
  const RVector lap_log = t.round_laplacian(density.array().log().matrix());
  return ((2.0 * kPi + 0.25 * lap_log.array()) / density.array()).matrix();
}

KahlerData::KahlerData(SphereGridPtr grid, RVector potential)
    : grid_(std::move(grid)),
      transform_(std::make_shared<const SphericalTransform>(grid_)),
      potential_(std::move(potential)),
      cache_(std::make_shared<Cache>()) {
  require(potential_.size() == grid_->size(), "KahlerData: potential sample count mismatch");
  density_ = (1.0 - transform_->round_laplacian(potential_).array() / (2.0 * kPi)).matrix();
  const double dmin = density_.minCoeff();
  if (!(dmin > 0.0)) {
    std::ostringstream os;
    os << "KahlerData: metric is not positive (min density " << dmin << ")";
    throw NumericalError(os.str());
  }
  scalar_ = scalar_curvature_from_density(*transform_, density_);
  round_ = potential_.cwiseAbs().maxCoeff() == 0.0;
  weights_ = grid_->round_weights().cwiseProduct(density_);
}

KahlerData::KahlerData(SphereGridPtr grid, const MetricSpec& spec)
    : KahlerData(grid, grid->sample([&](double th, double) { return spec.potential_at(std::cos(th)); })) {}

KahlerData KahlerData::round(SphereGridPtr grid) {
  const Eigen::Index n = grid->size();
  return KahlerData(std::move(grid), RVector::Zero(n));
}

double KahlerData::mean_scalar_curvature() const { return weights_.dot(scalar_) / weights_.sum(); }

QuadratureGrid KahlerData::quadrature() const {
  return QuadratureGrid{grid_, weights_, grid_->exactness_degree()};
}

double KahlerData::inner(const RVector& f, const RVector& g) const {
  require(f.size() == weights_.size() && g.size() == weights_.size(), "inner: size mismatch");
  return weights_.dot(f.cwiseProduct(g));
}

double KahlerData::l2_norm(const RVector& f) const { return std::sqrt(inner(f, f)); }

RVector KahlerData::laplacian_apply(const RVector& f) const {
  return transform_->round_laplacian(f).cwiseQuotient(density_);
}

RVector KahlerData::gradient_inner(const RVector& f, const RVector& g) const {
  // Delta(fg) = f Delta g + g Delta f - 2 <grad f, grad g> for the positive Laplacian.
  const RVector lf = laplacian_apply(f), lg = laplacian_apply(g);
  const RVector lfg = laplacian_apply(f.cwiseProduct(g));
  return 0.5 * (f.cwiseProduct(lg) + g.cwiseProduct(lf) - lfg);
}

const Eigenpairs& KahlerData::eigenpairs() const {
  std::call_once(cache_->once, [this] {
    if (grid_->size() > kMaxEigenNodes)
      throw NumericalError("eigenpairs: grid too large for dense eigen-decomposition");
    std::vector<int> deg;
    const Eigen::MatrixXd y = transform_->real_basis(&deg);
    // Discrete operator Delta = rho^{-1} Y D Y^T W. Its nonzero spectrum is that
    // of D^{1/2} (Y^T W rho^{-1} Y) D^{1/2} restricted to l >= 1.
    std::vector<Eigen::Index> cols;
    for (std::size_t b = 0; b < deg.size(); ++b)
      if (deg[b] > 0) cols.push_back(static_cast<Eigen::Index>(b));
    const Eigen::Index nb = static_cast<Eigen::Index>(cols.size());
    Eigen::MatrixXd yb(y.rows(), nb);
    RVector sqrt_d(nb);
    for (Eigen::Index c = 0; c < nb; ++c) {
      yb.col(c) = y.col(cols[c]);
      const double l = deg[cols[c]];
      sqrt_d[c] = std::sqrt(4.0 * kPi * l * (l + 1.0));
    }
    const RVector w_over_rho = grid_->round_weights().cwiseQuotient(density_);
    const Eigen::MatrixXd g = yb.transpose() * w_over_rho.asDiagonal() * yb;
    const Eigen::MatrixXd m = sqrt_d.asDiagonal() * g * sqrt_d.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
    if (es.info() != Eigen::Success) throw NumericalError("eigenpairs: eigensolver failed");
    Eigenpairs out;
    out.values.resize(nb + 1);
    out.vectors.resize(y.rows(), nb + 1);
    out.values[0] = 0.0;
    out.vectors.col(0).setOnes();
    const RVector inv_rho = density_.cwiseInverse();
    for (Eigen::Index j = 0; j < nb; ++j) {
      const double lam = es.eigenvalues()[j];
      if (!(lam > 0.0)) throw NumericalError("eigenpairs: degenerate Laplacian spectrum");
      out.values[j + 1] = lam;
      out.vectors.col(j + 1) =
          inv_rho.cwiseProduct(yb * sqrt_d.cwiseProduct(es.eigenvectors().col(j))) / std::sqrt(lam);
    }
    cache_->pairs = std::move(out);
  });
  return cache_->pairs;
}

RVector KahlerData::heat_semigroup(double s, const RVector& f) const {
  require(s > 0.0, "heat_semigroup: s must be positive");
  require(f.size() == weights_.size(), "heat_semigroup: size mismatch");
  if (round_) {
    // Spherical harmonics diagonalize the round Laplacian; no eigensolve needed.
    Eigen::MatrixXcd c = transform_->analyze(f);
    for (Eigen::Index l = 0; l < c.rows(); ++l) c.row(l) *= std::exp(-s * 4.0 * kPi * l * (l + 1.0));
    const RVector smooth = transform_->synthesize(c);
    return f - transform_->project(f) + smooth;
  }
  const auto& ep = eigenpairs();
  const RVector coeff = ep.vectors.transpose() * weights_.cwiseProduct(f);
  RVector factor = ((-s) * ep.values.array()).exp().matrix() - RVector::Ones(ep.values.size());
  factor[0] = 0.0;
  return f + ep.vectors * factor.cwiseProduct(coeff);
}

RVector KahlerData::linearized_scalar_curvature(const RVector& eta) const {
  // rho'/rho = -Delta eta / 2 pi and dS = Delta(rho'/rho)/4 - S rho'/rho.
  const RVector lap = laplacian_apply(eta);
  return (-laplacian_apply(lap) / (8.0 * kPi) + scalar_.cwiseProduct(lap) / (2.0 * kPi)).eval();
}

QuadratureGrid build_grid(int n_theta, int n_phi, const MetricSpec& metric) {
  auto grid = make_grid({n_theta, n_phi});
  if (metric.is_round()) return QuadratureGrid{grid, grid->round_weights(), grid->exactness_degree()};
  return KahlerData(grid, metric).quadrature();
}

}  // namespace bflab::manifold
