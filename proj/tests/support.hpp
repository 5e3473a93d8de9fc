#pragma once

// Seeded generators and independent reference computations shared by the
// test binaries. Nothing here calls into the library's numerical paths.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "dephaskit/qcore.hpp"
#include "dephaskit/spectra.hpp"

namespace testsupport {

using dephaskit::Complex;
using dephaskit::Matrix;
using dephaskit::Matrix2;
using dephaskit::Matrix4;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }
  Complex cnormal() { return {normal(), normal()}; }

  Matrix gaussian(int n) {
    Matrix g(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) g(r, c) = cnormal();
    return g;
  }
  Matrix hermitian(int n) {
    const Matrix g = gaussian(n);
    return (g + g.adjoint()) / 2.0;
  }
  // Full-rank unless `rank` is smaller than n.
  Matrix density(int n, int rank = -1) {
    const int k = rank < 0 ? n : rank;
    Matrix g(n, k);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < k; ++c) g(r, c) = cnormal();
    Matrix rho = g * g.adjoint();
    return rho / rho.trace().real();
  }
  Matrix unitary(int n) {
    Eigen::HouseholderQR<Matrix> qr(gaussian(n));
    return qr.householderQ();
  }
  // Uniform on the closed unit disk.
  Complex in_disk() {
    const double r = std::sqrt(uniform());
    return std::polar(r, uniform(0.0, 2.0 * std::numbers::pi));
  }

 private:
  std::mt19937_64 eng_;
};

inline double min_eig(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((a + a.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Transpose of the second tensor factor, written out index by index.
inline Matrix4 pt_second(const Matrix4& m) {
  Matrix4 out;
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k)
      for (int j = 0; j < 2; ++j)
        for (int l = 0; l < 2; ++l) out(2 * i + k, 2 * j + l) = m(2 * i + l, 2 * j + k);
  return out;
}

// Output-traced marginal of an input ⊗ output operator.
inline Matrix2 input_marginal(const Matrix4& m) {
  Matrix2 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out(i, j) = m(2 * i, 2 * j) + m(2 * i + 1, 2 * j + 1);
  return out;
}

// Dephasing written directly on matrix entries.
inline Matrix2 dephase(Complex k, const Matrix2& rho) {
  Matrix2 out = rho;
  out(0, 1) = std::conj(k) * rho(0, 1);
  out(1, 0) = k * rho(1, 0);
  return out;
}

// Trace-one Choi of a map given by its action on matrix units.
template <class Map>
Matrix4 choi_of(Map map) {
  Matrix4 j = Matrix4::Zero();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      Matrix2 e = Matrix2::Zero();
      e(a, b) = 1.0;
      const Matrix2 out = map(e);
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) j(2 * a + k, 2 * b + l) = 0.5 * out(k, l);
    }
  return j;
}

inline Matrix4 dephasing_choi(Complex k) {
  return choi_of([k](const Matrix2& e) { return dephase(k, e); });
}

// Column-stacking superoperator of a map.
template <class Map>
Matrix4 transfer_of(Map map) {
  Matrix4 t;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      Matrix2 e = Matrix2::Zero();
      e(a, b) = 1.0;
      const Matrix2 out = map(e);
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) t(k + 2 * l, a + 2 * b) = out(k, l);
    }
  return t;
}

// Decoherence factor by composite Simpson over wavelength with the exact
// phase 2 pi s lambda0 / lambda, +-10 sigma per component.
inline Complex kappa_simpson(const dephaskit::Spectrum& spec, double lambda0_nm, double s, int intervals = 4000) {
  Complex total = 0.0;
  for (const auto& c : spec.components()) {
    if (c.sigma_nm == 0.0) {
      total += c.weight * std::polar(1.0, 2.0 * std::numbers::pi * s * lambda0_nm / c.center_nm);
      continue;
    }
    const double lo = c.center_nm - 10.0 * c.sigma_nm;
    const double h = 20.0 * c.sigma_nm / intervals;
    Complex acc = 0.0;
    for (int i = 0; i <= intervals; ++i) {
      const double lam = lo + i * h;
      const double g = std::exp(-0.5 * std::pow((lam - c.center_nm) / c.sigma_nm, 2)) /
                       (c.sigma_nm * std::sqrt(2.0 * std::numbers::pi));
      const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      acc += w * g * std::polar(1.0, 2.0 * std::numbers::pi * s * lambda0_nm / lam);
    }
    total += c.weight * acc * h / 3.0;
  }
  return total;
}

inline double binary_entropy_bits(double p) {
  auto term = [](double x) { return x <= 0.0 ? 0.0 : -x * std::log2(x); };
  return term(p) + term(1.0 - p);
}

inline double positive_increments(const std::vector<double>& v) {
  double sum = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) sum += std::max(0.0, v[i] - v[i - 1]);
  return sum;
}

// Single-peak HCL-N at t1 = t/2 when alpha = |kappa|: e^{-c/2} - e^{-c},
// c = (2 pi s lambda0 sigma / center^2)^2 / 2.
inline double single_peak_n(double center_nm, double sigma_nm, double lambda0_nm, double s) {
  const double a = 2.0 * std::numbers::pi * s * lambda0_nm * sigma_nm / (center_nm * center_nm);
  const double c = 0.5 * a * a;
  return std::exp(-c / 2.0) - std::exp(-c);
}

// Largest sigma with single_peak_n below `level`, by bisection (the function
// increases in sigma while c < ln 4).
inline double single_peak_threshold(double center_nm, double lambda0_nm, double s, double level) {
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (single_peak_n(center_nm, mid, lambda0_nm, s) < level ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace testsupport
