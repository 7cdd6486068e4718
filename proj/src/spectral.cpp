#include "bflab/spectral.hpp"

#include <cmath>
#include <numbers>

#include "bflab/error.hpp"

namespace bflab::manifold {

namespace {
constexpr double kPi = std::numbers::pi;
}

Eigen::MatrixXd normalized_legendre(int lmax, double x) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(lmax + 1, lmax + 1);
  const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
  p(0, 0) = 1.0 / std::sqrt(2.0);
  for (int m = 1; m <= lmax; ++m)
    p(m, m) = -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s * p(m - 1, m - 1);
  for (int m = 0; m < lmax; ++m) p(m + 1, m) = std::sqrt(2.0 * m + 3.0) * x * p(m, m);
  for (int m = 0; m <= lmax; ++m) {
    for (int l = m + 2; l <= lmax; ++l) {
      const double l2 = static_cast<double>(l) * l;
      const double lm1 = l - 1.0;
      const double a = std::sqrt((4.0 * l2 - 1.0) / (l2 - m * m));
      const double b = std::sqrt((lm1 * lm1 - m * m) / (4.0 * lm1 * lm1 - 1.0));
      p(l, m) = a * (x * p(l - 1, m) - b * p(l - 2, m));
    }
  }
  return p;
}

SphericalTransform::SphericalTransform(SphereGridPtr grid) : grid_(std::move(grid)) {
  lmax_ = grid_->n_theta() - 1;
  mmax_ = std::min(lmax_, (grid_->n_phi() - 1) / 2);
  legendre_.reserve(grid_->n_theta());
  for (int i = 0; i < grid_->n_theta(); ++i)
    legendre_.push_back(normalized_legendre(lmax_, grid_->legendre().x[i]));
}

Eigen::MatrixXcd SphericalTransform::analyze(const RVector& f) const {
  require(f.size() == grid_->size(), "spherical transform: sample count mismatch");
  const int nt = grid_->n_theta(), np = grid_->n_phi();
  const auto& phis = grid_->phis();
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(lmax_ + 1, mmax_ + 1);
  std::vector<std::complex<double>> ring(mmax_ + 1);
  for (int i = 0; i < nt; ++i) {
    for (int m = 0; m <= mmax_; ++m) {
      std::complex<double> acc = 0.0;
      for (int j = 0; j < np; ++j)
        acc += f[static_cast<Eigen::Index>(i) * np + j] * std::polar(1.0, -m * phis[j]);
      ring[m] = acc / static_cast<double>(np);
    }
    const double w = grid_->legendre().w[i];
    const auto& p = legendre_[i];
    for (int m = 0; m <= mmax_; ++m)
      for (int l = m; l <= lmax_; ++l) c(l, m) += w * p(l, m) * ring[m];
  }
  return c;
}

RVector SphericalTransform::synthesize(const Eigen::MatrixXcd& c) const {
  const int nt = grid_->n_theta(), np = grid_->n_phi();
  const auto& phis = grid_->phis();
  RVector f(grid_->size());
  std::vector<std::complex<double>> ring(mmax_ + 1);
  for (int i = 0; i < nt; ++i) {
    const auto& p = legendre_[i];
    for (int m = 0; m <= mmax_; ++m) {
      std::complex<double> acc = 0.0;
      for (int l = m; l <= lmax_; ++l) acc += c(l, m) * p(l, m);
      ring[m] = acc;
    }
    for (int j = 0; j < np; ++j) {
      double v = ring[0].real();
      for (int m = 1; m <= mmax_; ++m) v += 2.0 * (ring[m] * std::polar(1.0, m * phis[j])).real();
      f[static_cast<Eigen::Index>(i) * np + j] = v;
    }
  }
  return f;
}

RVector SphericalTransform::round_laplacian(const RVector& f) const {
  Eigen::MatrixXcd c = analyze(f);
  for (int m = 0; m <= mmax_; ++m)
    for (int l = m; l <= lmax_; ++l) c(l, m) *= 4.0 * kPi * l * (l + 1.0);
  return synthesize(c);
}

Eigen::MatrixXd SphericalTransform::real_basis(std::vector<int>* degrees) const {
  const int nt = grid_->n_theta(), np = grid_->n_phi();
  const auto& phis = grid_->phis();
  std::vector<std::pair<int, int>> modes;  // (l, signed m)
  for (int l = 0; l <= lmax_; ++l)
    for (int m = -std::min(l, mmax_); m <= std::min(l, mmax_); ++m) modes.emplace_back(l, m);
  Eigen::MatrixXd y(grid_->size(), static_cast<Eigen::Index>(modes.size()));
  if (degrees) degrees->clear();
  for (std::size_t b = 0; b < modes.size(); ++b) {
    const auto [l, m] = modes[b];
    if (degrees) degrees->push_back(l);
    const int am = std::abs(m);
    // Unit-area measure is dx dphi / (4 pi).
    const double norm = (m == 0) ? std::sqrt(2.0) : 2.0;
    for (int i = 0; i < nt; ++i) {
      const double pl = legendre_[i](l, am) * norm;
      for (int j = 0; j < np; ++j) {
        const double ang = (m > 0) ? std::cos(am * phis[j]) : (m < 0 ? std::sin(am * phis[j]) : 1.0);
        y(static_cast<Eigen::Index>(i) * np + j, static_cast<Eigen::Index>(b)) = pl * ang;
      }
    }
  }
  return y;
}

ZonalTransform::ZonalTransform(int n) : gl_(gauss_legendre(n)), p_(n, n) {
  for (int i = 0; i < n; ++i) p_.row(i) = normalized_legendre(n - 1, gl_.x[i]).col(0).transpose();
}

RVector ZonalTransform::analyze(const RVector& f) const {
  require(f.size() == gl_.x.size(), "zonal transform: sample count mismatch");
  return p_.transpose() * gl_.w.cwiseProduct(f);
}

RVector ZonalTransform::synthesize(const RVector& c) const { return p_ * c; }

RVector ZonalTransform::round_laplacian(const RVector& f) const {
  RVector c = analyze(f);
  for (Eigen::Index l = 0; l < c.size(); ++l) c[l] *= 4.0 * kPi * l * (l + 1.0);
  return synthesize(c);
}

double ZonalTransform::max_eigenvalue() const {
  const double l = size() - 1.0;
  return 4.0 * kPi * l * (l + 1.0);
}

}  // namespace bflab::manifold
