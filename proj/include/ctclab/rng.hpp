#pragma once
#ifndef CTCLAB_RNG_HPP
#define CTCLAB_RNG_HPP

// Deterministic random generation.
//
// Generator identity: std::mt19937_64 seeded directly with the user seed.  The
// raw 64-bit stream of mt19937_64 is fixed by the C++ standard, so the same
// seed yields the same stream on every conforming platform.  All value
// distributions are implemented here explicitly (uniform doubles via the top
// 53 bits, normals via Box-Muller) because the std::*_distribution classes are
// not required to be reproducible across implementations.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "ctclab/common.hpp"

namespace ctclab {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t raw() { return eng_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n) by rejection (no modulo bias, deterministic).
  std::uint64_t integer(std::uint64_t n) {
    require(n > 0, "Rng::integer: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via Box-Muller; second value of each pair is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0,1] so the log is finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Complex standard normal, unit total variance.
  cplx complex_normal() {
    const double re = normal();
    const double im = normal();
    return cplx(re, im) / std::sqrt(2.0);
  }

  CMat ginibre(int rows, int cols) {
    CMat g(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) g(i, j) = complex_normal();
    return g;
  }

  CMat hermitian(int n) {
    CMat g = ginibre(n, n);
    return (g + g.adjoint()) / 2.0;
  }

  // Haar-like unitary: QR of a Ginibre matrix with the R-diagonal phase fixed.
  CMat unitary(int n) {
    CMat g = ginibre(n, n);
    Eigen::HouseholderQR<CMat> qr(g);
    CMat q = qr.householderQ();
    CMat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j) {
      const cplx d = r(j, j);
      const double a = std::abs(d);
      q.col(j) *= (a > 0.0) ? d / a : cplx(1.0, 0.0);
    }
    return q;
  }

  // Random full-rank density matrix G G^dagger normalized to unit trace.
  CMat density(int n) {
    CMat g = ginibre(n, n);
    CMat rho = g * g.adjoint();
    return rho / rho.trace();
  }

  // Random pure state, unit norm.
  CVec state(int n) {
    CVec v(n);
    for (int i = 0; i < n; ++i) v(i) = complex_normal();
    return v / v.norm();
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace ctclab

#endif  // CTCLAB_RNG_HPP
