#pragma once
#ifndef CTCLAB_DCTC_HPP
#define CTCLAB_DCTC_HPP

// Self-consistency condition on a bipartite system: the chronology-
// respecting factor A (state rhoA) and the CTC factor B interact through a
// joint unitary U, and a B-state is self-consistent when it is a fixed point
// of the induced channel
//
//   Phi(rhoB) = Tr_A( U^dagger (rhoA (x) rhoB) U ).
//
// Convention: states evolve as rho -> U^dagger rho U.  This is the opposite
// of the more common rho -> U rho U^dagger; the two describe the same family
// of channels with U replaced by its adjoint, but every formula in this
// module is pinned to the first form.
//
// The canonical fixed point is the limit of Cesaro averages of Phi^n started
// from the maximally mixed state.  It is computed directly as the ergodic
// projection onto ker(M - I) along ran(M - I), where M is the channel's
// superoperator; a long Cesaro iteration is kept as a fallback for
// ill-conditioned cases.

#include <utility>
#include <vector>

#include "ctclab/common.hpp"
#include "ctclab/linalg.hpp"

namespace ctclab::dctc {

struct CtcChannel {
  BipartiteSpace space;
  UnitaryOperator U;
  DensityMatrix rhoA;

  CtcChannel(BipartiteSpace s, UnitaryOperator u, DensityMatrix a)
      : space(s), U(std::move(u)), rhoA(std::move(a)) {
    require_dim(U.dim() == space.joint(),
                "CtcChannel: unitary does not act on the joint space");
    require_dim(rhoA.dim() == space.dimA,
                "CtcChannel: rhoA does not live on factor A");
  }
};

// Applies the channel to an arbitrary (not necessarily Hermitian) operator on
// factor B; the linear extension is what the superoperator encodes.
inline CMat apply_channel(const CtcChannel& ch, const CMat& x) {
  require_dim(x.rows() == ch.space.dimB && x.cols() == ch.space.dimB,
              "apply_channel: operator does not live on factor B");
  const CMat joint = tensor_product(ch.rhoA.mat(), x);
  const CMat evolved = ch.U.adjoint() * joint * ch.U.mat();
  return partial_trace(evolved, ch.space, Subsystem::A);
}

inline CMat ctc_map(const CtcChannel& ch, const DensityMatrix& rhoB) {
  return apply_channel(ch, rhoB.mat());
}

// Matrix M with M vec(rho) = vec(Phi(rho)) in the column-stacking convention.
inline CMat channel_superoperator(const CtcChannel& ch) {
  const int dB = ch.space.dimB;
  CMat m(dB * dB, dB * dB);
  CMat unit = CMat::Zero(dB, dB);
  for (int j = 0; j < dB; ++j)
    for (int i = 0; i < dB; ++i) {
      unit(i, j) = 1.0;
      m.col(j * dB + i) = vec(apply_channel(ch, unit));
      unit(i, j) = 0.0;
    }
  return m;
}

// Trace-norm residual ||Phi(rhoB) - rhoB||_1 of the consistency condition.
inline double verify_dctc(const CtcChannel& ch, const DensityMatrix& rhoB) {
  return trace_norm(apply_channel(ch, rhoB.mat()) - rhoB.mat());
}

struct FixedPointResult {
  DensityMatrix canonical;
  double residual = 0.0;          // trace-norm residual of the canonical state
  int subspaceDimension = 0;      // dim of the fixed subspace of M
  std::vector<CMat> hermitianBasis;  // HS-orthonormal Hermitian fixed operators
  long iterations = 0;            // Cesaro steps used by the fallback (0 = direct)
};

namespace detail {

// Hermitian part and (1/i) anti-Hermitian part of each null-space column,
// orthonormalized over the reals in the Hilbert-Schmidt inner product.
inline std::vector<CMat> hermitian_fixed_basis(const CMat& nullBasis, int dB) {
  std::vector<CMat> basis;
  const int want = static_cast<int>(nullBasis.cols());
  for (int j = 0; j < nullBasis.cols() && static_cast<int>(basis.size()) < want;
       ++j) {
    const CMat m = unvec(nullBasis.col(j), dB, dB);
    const CMat cand[2] = {(m + m.adjoint()) / 2.0,
                          (m - m.adjoint()) / cplx(0.0, 2.0)};
    for (const CMat& c0 : cand) {
      if (static_cast<int>(basis.size()) >= want) break;
      CMat c = c0;
      for (const CMat& h : basis)
        c -= ((h.adjoint() * c).trace().real()) * h;
      const double n = frobenius_norm(c);
      if (n > 1e-8) basis.push_back(c / n);
    }
  }
  return basis;
}

// Streaming Cesaro average from the maximally mixed state; returns the best
// (state, residual, steps) seen at power-of-ten checkpoints up to maxN.
struct CesaroFallback {
  CMat state;
  double residual;
  long steps;
};

inline CesaroFallback cesaro_fallback(const CtcChannel& ch, long maxN) {
  const int dB = ch.space.dimB;
  CMat current = CMat::Identity(dB, dB) / static_cast<double>(dB);
  CMat sum = CMat::Zero(dB, dB);
  CesaroFallback best{current, trace_norm(apply_channel(ch, current) - current),
                      0};
  long checkpoint = 1000;
  for (long n = 1; n <= maxN; ++n) {
    sum += current;
    current = apply_channel(ch, current);
    if (n == checkpoint || n == maxN) {
      CMat avg = sum / static_cast<double>(n);
      avg = (avg + avg.adjoint()) / 2.0;
      avg /= avg.trace().real();
      const double res = trace_norm(apply_channel(ch, avg) - avg);
      if (res < best.residual) best = {avg, res, n};
      checkpoint *= 10;
    }
  }
  return best;
}

}  // namespace detail

// Finds the fixed-point set of the CTC channel.  Throws solver_error only
// when the requested tolerance cannot be met (a fixed point always exists).
inline FixedPointResult solve_fixed_points(const CtcChannel& ch,
                                           double tol = 1e-10) {
  require(tol > 0.0, "solve_fixed_points: tolerance must be positive");
  const int dB = ch.space.dimB;
  const CMat m = channel_superoperator(ch);
  const CMat a = m - CMat::Identity(m.rows(), m.cols());
  const CMat right = null_space(a, 1e-11);
  const int k = static_cast<int>(right.cols());

  CMat candidate;
  bool haveCandidate = false;
  long iterations = 0;

  if (k > 0) {
    // Ergodic projection of I/dB onto ker(M-I) along ran(M-I): ran(M-I)'s
    // orthogonal complement is ker(M^dagger - I).
    const CMat left = null_space(a.adjoint(), 1e-11);
    if (left.cols() == k) {
      const CMat gram = left.adjoint() * right;
      const CVec rhs =
          left.adjoint() * vec(CMat::Identity(dB, dB) / static_cast<double>(dB));
      Eigen::ColPivHouseholderQR<CMat> qr(gram);
      if (qr.rank() == k) {
        const CVec z = qr.solve(rhs);
        CMat rho = unvec(right * z, dB, dB);
        rho = (rho + rho.adjoint()) / 2.0;
        const double tr = rho.trace().real();
        if (std::abs(tr) > 1e-8) {
          candidate = rho / tr;
          haveCandidate = true;
        }
      }
    }
  }

  if (haveCandidate) {
    const double res = trace_norm(apply_channel(ch, candidate) - candidate);
    if (res > tol) haveCandidate = false;
  }
  if (!haveCandidate) {
    const auto fb = detail::cesaro_fallback(ch, 1000000L);
    if (fb.residual > tol)
      throw solver_error(
          "solve_fixed_points: residual " + std::to_string(fb.residual) +
          " exceeds tolerance; the tolerance is too tight for this channel");
    candidate = fb.state;
    iterations = fb.steps;
  }

  // Validate as a state (clips eigenvalue dust) and re-measure the residual.
  DensityMatrix canonical(candidate);
  const double residual = verify_dctc(ch, canonical);
  if (residual > tol)
    throw solver_error(
        "solve_fixed_points: canonical state residual exceeds tolerance");

  FixedPointResult out{std::move(canonical), residual, k,
                       detail::hermitian_fixed_basis(right, dB), iterations};
  return out;
}

struct CesaroResult {
  std::vector<DensityMatrix> orbit;  // orbit[n] = Phi^n(rhoB0)
  DensityMatrix average;             // (1/N) sum of the orbit
  double averageResidual = 0.0;      // ||Phi(average) - average||_1
};

// Streaming Cesaro average over the first `iterations` orbit points, without
// storing the orbit; returns the averaged state and its consistency residual.
inline std::pair<DensityMatrix, double> cesaro_average(
    const CtcChannel& ch, const DensityMatrix& rhoB0, long iterations) {
  require(iterations >= 1, "cesaro_average: need at least one iteration");
  const int dB = ch.space.dimB;
  require_dim(rhoB0.dim() == dB, "cesaro_average: start state lives off B");
  CMat current = rhoB0.mat();
  CMat sum = CMat::Zero(dB, dB);
  for (long n = 0; n < iterations; ++n) {
    sum += current;
    if (n + 1 < iterations) current = apply_channel(ch, current);
  }
  CMat avg = sum / static_cast<double>(iterations);
  avg = (avg + avg.adjoint()) / 2.0;
  DensityMatrix average(avg);
  const double res = verify_dctc(ch, average);
  return {std::move(average), res};
}

// Orbit and Cesaro average of the channel from a given start state.
inline CesaroResult cesaro_iterate(const CtcChannel& ch,
                                   const DensityMatrix& rhoB0, int iterations) {
  require(iterations >= 1, "cesaro_iterate: need at least one iteration");
  const int dB = ch.space.dimB;
  require_dim(rhoB0.dim() == dB, "cesaro_iterate: start state lives off B");
  std::vector<DensityMatrix> orbit;
  orbit.reserve(iterations);
  CMat current = rhoB0.mat();
  CMat sum = CMat::Zero(dB, dB);
  for (int n = 0; n < iterations; ++n) {
    orbit.emplace_back(current);
    sum += current;
    if (n + 1 < iterations) current = apply_channel(ch, current);
  }
  CMat avg = sum / static_cast<double>(iterations);
  avg = (avg + avg.adjoint()) / 2.0;
  DensityMatrix average(avg);
  const double res = verify_dctc(ch, average);
  return {std::move(orbit), std::move(average), res};
}

}  // namespace ctclab::dctc

#endif  // CTCLAB_DCTC_HPP
