#pragma once
#ifndef CTCLAB_TESTS_FIXTURES_HPP
#define CTCLAB_TESTS_FIXTURES_HPP

// Shared fixtures and independent oracle implementations for the test suite.
// The oracles deliberately re-derive results through a different route than
// the library (explicit index loops instead of block operations) so that the
// two implementations check each other.

#include <complex>
#include <vector>

#include "ctclab/common.hpp"
#include "ctclab/linalg.hpp"

namespace fixtures {

using ctclab::CMat;
using ctclab::CVec;
using ctclab::cplx;

inline const cplx I{0.0, 1.0};

inline CMat identity(int n) { return CMat::Identity(n, n); }

inline CMat pauli_x() {
  CMat m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline CMat pauli_y() {
  CMat m(2, 2);
  m << 0, -I, I, 0;
  return m;
}

inline CMat pauli_z() {
  CMat m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

// Control on the first (A) factor, target on the second (B); A-major basis
// order |00>,|01>,|10>,|11>.
inline CMat cnot() {
  CMat m = CMat::Zero(4, 4);
  m(0, 0) = 1;
  m(1, 1) = 1;
  m(2, 3) = 1;
  m(3, 2) = 1;
  return m;
}

inline CMat swap_gate() {
  CMat m = CMat::Zero(4, 4);
  m(0, 0) = 1;
  m(1, 2) = 1;
  m(2, 1) = 1;
  m(3, 3) = 1;
  return m;
}

inline CVec bell_phi_plus() {
  CVec v = CVec::Zero(4);
  v(0) = 1.0 / std::sqrt(2.0);
  v(3) = 1.0 / std::sqrt(2.0);
  return v;
}

inline CVec basis_state(int dim, int k) {
  CVec v = CVec::Zero(dim);
  v(k) = 1.0;
  return v;
}

// Independent Kronecker product: plain quadruple loop.
inline CMat kron_oracle(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int ia = 0; ia < a.rows(); ++ia)
    for (int ja = 0; ja < a.cols(); ++ja)
      for (int ib = 0; ib < b.rows(); ++ib)
        for (int jb = 0; jb < b.cols(); ++jb)
          out(ia * b.rows() + ib, ja * b.cols() + jb) = a(ia, ja) * b(ib, jb);
  return out;
}

// Independent partial traces via explicit index sums (A-major joint index).
inline CMat ptrace_a_oracle(const CMat& m, int dA, int dB) {
  CMat out = CMat::Zero(dB, dB);
  for (int ib = 0; ib < dB; ++ib)
    for (int jb = 0; jb < dB; ++jb)
      for (int ia = 0; ia < dA; ++ia)
        out(ib, jb) += m(ia * dB + ib, ia * dB + jb);
  return out;
}

inline CMat ptrace_b_oracle(const CMat& m, int dA, int dB) {
  CMat out = CMat::Zero(dA, dA);
  for (int ia = 0; ia < dA; ++ia)
    for (int ja = 0; ja < dA; ++ja)
      for (int ib = 0; ib < dB; ++ib)
        out(ia, ja) += m(ia * dB + ib, ja * dB + ib);
  return out;
}

// Partial transpose on the B factor (used by the PPT separability oracle).
inline CMat partial_transpose_b(const CMat& m, int dA, int dB) {
  CMat out(m.rows(), m.cols());
  for (int ia = 0; ia < dA; ++ia)
    for (int ja = 0; ja < dA; ++ja)
      for (int ib = 0; ib < dB; ++ib)
        for (int jb = 0; jb < dB; ++jb)
          out(ia * dB + jb, ja * dB + ib) = m(ia * dB + ib, ja * dB + jb);
  return out;
}

inline double max_abs_diff(const CMat& a, const CMat& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace fixtures

#endif  // CTCLAB_TESTS_FIXTURES_HPP
