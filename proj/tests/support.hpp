#pragma once

// Random generators and independent numerical oracles shared by the tests.

#include <cmath>
#include <complex>
#include <functional>
#include <random>

#include <Eigen/Dense>

#include "bflab/herm_linalg.hpp"

namespace testing {

using bflab::herm::CMatrix;
using bflab::herm::HermitianMatrix;
using bflab::herm::PositiveHermitian;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double normal() { return nd_(rng_); }
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng_); }

  CMatrix complex_matrix(Eigen::Index n) {
    CMatrix a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) a(i, j) = {normal(), normal()};
    return a;
  }
  HermitianMatrix hermitian(Eigen::Index n, double scale = 1.0) {
    const CMatrix a = complex_matrix(n);
    return HermitianMatrix::symmetrized(a * scale);
  }
  /// Killing norm exactly `norm`.
  HermitianMatrix hermitian_with_norm(Eigen::Index n, double norm) {
    HermitianMatrix h = hermitian(n);
    return h * (norm / h.matrix().norm());
  }
  PositiveHermitian positive(Eigen::Index n) {
    const CMatrix a = complex_matrix(n);
    return PositiveHermitian(HermitianMatrix::symmetrized(a * a.adjoint() + CMatrix::Identity(n, n) * 0.5));
  }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> nd_{0.0, 1.0};
};

/// Adaptive Simpson quadrature on [a, b].
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                               int depth = 50) {
  std::function<double(double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole, int d) {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
        const double flm = f(lm), frm = f(rm);
        const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        if (d <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
          return left + right + (left + right - whole) / 15.0;
        return rec(lo, mid, flo, flm, fmid, left, d - 1) + rec(mid, hi, fmid, frm, fhi, right, d - 1);
      };
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return rec(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), depth);
}

/// Integral over CP^1 of a radial function g(|z|) against the unit-area round
/// form, which is dA / (pi (1+r^2)^2); computed in r = tan(s), s in [0, pi/2).
inline double radial_round_integral(const std::function<double(double)>& g, double tol = 1e-13) {
  return adaptive_simpson(
      [&](double s) {
        if (s >= 0.5 * M_PI) return 0.0;
        const double r = std::tan(s);
        const double c2 = std::cos(s) * std::cos(s);
        // 2 r dr / (1+r^2)^2 = 2 tan s cos^2 s ds
        return g(r) * 2.0 * r * c2;
      },
      0.0, 0.5 * M_PI, tol);
}

}  // namespace testing
