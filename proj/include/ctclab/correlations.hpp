#pragma once
#ifndef CTCLAB_CORRELATIONS_HPP
#define CTCLAB_CORRELATIONS_HPP

// Damping of two-point correlations across an interaction region.
//
// Setting: a pure state psi on a triple tensor product H1 (x) H2 (x) H3 and
// a unitary u12 acting on the first two factors only.  Observables a1 on
// factor 1 and a3 on factor 3 probe correlations before and after the
// interaction:
//
//   before = < a1 psi,   a3 psi >      after = < a1 U psi, a3 U psi >
//   x = ||a1 psi||^2,  y = ||a3 psi||^2,  s = x + y.
//
// The damping constant q >= 0 of a family of pairs is the smallest q with
//
//   |after - before - q * before|  <=  (q/2) s   and
//   |before - after - q * after |  <=  (q/2) s   for every pair,
//
// and the amplification constant K >= 1 is the smallest K with
//
//   K^-2 <= || e^{i t} a1 U psi + a3 U psi ||^2
//           / || e^{i t} a1 psi  + a3 psi  ||^2  <= K^2   for all phases t.
//
// When the state is invariant under the interaction on the factor-1 algebra
// (true for the generators below), expanding the norms shows the two notions
// coincide exactly: minK^2 = minQ + 1.  min_q is computed in closed form per
// pair; min_k sweeps an explicit phase grid over vectors it builds itself, so
// the two routes share no intermediate quantities.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "ctclab/common.hpp"
#include "ctclab/linalg.hpp"
#include "ctclab/rng.hpp"

namespace ctclab::correlations {

struct TripartiteDims {
  int d1 = 0, d2 = 0, d3 = 0;
  TripartiteDims(int a, int b, int c) : d1(a), d2(b), d3(c) {
    require_dim(d1 >= 1 && d2 >= 1 && d3 >= 1,
                "TripartiteDims: factors must be at least one-dimensional");
    require_dim(static_cast<long>(d1) * d2 * d3 <= kDimensionCap,
                "TripartiteDims: joint dimension exceeds the cap");
  }
  int joint() const { return d1 * d2 * d3; }
};

namespace detail {
using RowMajorMat =
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
}

// Joint index convention: (i1 * d2 + i2) * d3 + i3.

inline CVec apply_factor1(const CMat& a, const TripartiteDims& t,
                          const CVec& psi) {
  require_dim(a.rows() == t.d1 && a.cols() == t.d1 &&
                  psi.size() == t.joint(),
              "apply_factor1: dimension mismatch");
  Eigen::Map<const detail::RowMajorMat> m(psi.data(), t.d1, t.d2 * t.d3);
  detail::RowMajorMat out = a * m;
  return Eigen::Map<const CVec>(out.data(), psi.size());
}

inline CVec apply_factor3(const CMat& a, const TripartiteDims& t,
                          const CVec& psi) {
  require_dim(a.rows() == t.d3 && a.cols() == t.d3 &&
                  psi.size() == t.joint(),
              "apply_factor3: dimension mismatch");
  Eigen::Map<const detail::RowMajorMat> m(psi.data(), t.d1 * t.d2, t.d3);
  detail::RowMajorMat out = m * a.transpose();
  return Eigen::Map<const CVec>(out.data(), psi.size());
}

inline CVec apply_u12(const CMat& u, const TripartiteDims& t,
                      const CVec& psi) {
  require_dim(u.rows() == t.d1 * t.d2 && u.cols() == t.d1 * t.d2 &&
                  psi.size() == t.joint(),
              "apply_u12: dimension mismatch");
  Eigen::Map<const detail::RowMajorMat> m(psi.data(), t.d1 * t.d2, t.d3);
  detail::RowMajorMat out = u * m;
  return Eigen::Map<const CVec>(out.data(), psi.size());
}

// Reduced state on factor 1 (factors 2 and 3 traced out).
inline CMat reduced_density_1(const CVec& psi, const TripartiteDims& t) {
  require_dim(psi.size() == t.joint(), "reduced_density_1: size mismatch");
  Eigen::Map<const detail::RowMajorMat> m(psi.data(), t.d1, t.d2 * t.d3);
  return m * m.adjoint();
}

struct CorrelationInstance {
  TripartiteDims dims;
  CVec psi;   // unit vector on the joint space
  CMat u12;   // unitary on factors 1 and 2

  CorrelationInstance(TripartiteDims t, CVec state, CMat u)
      : dims(t), psi(std::move(state)), u12(std::move(u)) {
    require_dim(psi.size() == dims.joint(),
                "CorrelationInstance: state size mismatch");
    require(std::abs(psi.norm() - 1.0) <= 1e-10,
            "CorrelationInstance: state is not normalized");
    UnitaryOperator check(u12);  // validates unitarity and shape
    require_dim(check.dim() == dims.d1 * dims.d2,
                "CorrelationInstance: u12 does not act on factors 1 and 2");
  }
};

struct OperatorPair {
  CMat a1;  // on factor 1
  CMat a3;  // on factor 3
};

struct PairData {
  double x = 0.0, y = 0.0;  // ||a1 psi||^2 and ||a3 psi||^2
  cplx before{};            // < a1 psi, a3 psi >
  cplx after{};             // < a1 U psi, a3 U psi >
  double s() const { return x + y; }
};

inline PairData pair_data(const CorrelationInstance& inst,
                          const OperatorPair& p) {
  const CVec v1 = apply_factor1(p.a1, inst.dims, inst.psi);
  const CVec v3 = apply_factor3(p.a3, inst.dims, inst.psi);
  const CVec upsi = apply_u12(inst.u12, inst.dims, inst.psi);
  const CVec u1 = apply_factor1(p.a1, inst.dims, upsi);
  const CVec u3 = apply_factor3(p.a3, inst.dims, upsi);
  PairData d;
  d.x = v1.squaredNorm();
  d.y = v3.squaredNorm();
  d.before = v1.dot(v3);  // Eigen's dot conjugates the left argument
  d.after = u1.dot(u3);
  return d;
}

// Largest change of a factor-1 expectation value under the interaction;
// zero (up to roundoff) is the precondition for the damping estimates.
inline double check_invariance(const CorrelationInstance& inst) {
  const CVec upsi = apply_u12(inst.u12, inst.dims, inst.psi);
  return max_abs(CMat(reduced_density_1(upsi, inst.dims) -
                      reduced_density_1(inst.psi, inst.dims)));
}

inline constexpr double kInfiniteDamping =
    std::numeric_limits<double>::infinity();

// Smallest q >= 0 with |alpha - q beta| <= (q/2) s, or infinity if none
// exists.  Squaring gives a*q^2 + b*q + c0 <= 0 with a = |beta|^2 - s^2/4,
// b = -2 Re(conj(alpha) beta), c0 = |alpha|^2; under the Cauchy-Schwarz
// relation |beta| <= s/2 the parabola opens downward and the smallest
// admissible q is its unique nonnegative crossing.
inline double minimal_damping(cplx alpha, cplx beta, double s) {
  require(s >= 0.0, "minimal_damping: s must be nonnegative");
  const double c0 = std::norm(alpha);
  const double scale = s * s / 4.0 + std::norm(beta) + c0;
  if (scale == 0.0 || c0 <= 1e-24 * scale) return 0.0;
  const double a = std::norm(beta) - s * s / 4.0;
  const double b = -2.0 * std::real(std::conj(alpha) * beta);
  if (a < -1e-14 * scale) {
    const double bigA = -a;
    const double r = std::sqrt(b * b + 4.0 * bigA * c0);
    // Stable root of bigA q^2 - b q - c0 = 0 (avoid cancellation).
    return b > 0.0 ? (b + r) / (2.0 * bigA) : 2.0 * c0 / (r - b);
  }
  if (a > 1e-14 * scale) {
    // Possible only when the Cauchy-Schwarz precondition fails.
    const double disc = b * b - 4.0 * a * c0;
    if (b < 0.0 && disc >= 0.0) return (-b - std::sqrt(disc)) / (2.0 * a);
    return kInfiniteDamping;
  }
  // |beta| = s/2 exactly: the constraint is linear, b q + c0 <= 0.
  if (b < -1e-14 * scale) return c0 / (-b);
  return kInfiniteDamping;
}

// Per-pair damping: both estimate directions must hold.
inline double pair_min_q(const PairData& d) {
  const double q1 = minimal_damping(d.after - d.before, d.before, d.s());
  const double q2 = minimal_damping(d.before - d.after, d.after, d.s());
  return std::max(q1, q2);
}

inline double min_q(const CorrelationInstance& inst,
                    const std::vector<OperatorPair>& pairs) {
  require(!pairs.empty(), "min_q: need at least one operator pair");
  double q = 0.0;
  for (const auto& p : pairs) q = std::max(q, pair_min_q(pair_data(inst, p)));
  return q;
}

namespace detail {

// Ratio max(n1/n2, n2/n1) at phase t, from explicitly built vectors; returns
// infinity when exactly one of the norms vanishes, and 1 when both do.
struct PhaseSweep {
  CVec u1, u3, v1, v3;
  double floor;  // absolute tolerance for treating a norm as zero

  double ratio(double t) const {
    const cplx w = std::polar(1.0, t);
    const double n1 = (w * u1 + u3).squaredNorm();
    const double n2 = (w * v1 + v3).squaredNorm();
    if (n1 <= floor && n2 <= floor) return 1.0;
    if (n1 <= floor || n2 <= floor) return kInfiniteDamping;
    return std::max(n1 / n2, n2 / n1);
  }
};

}  // namespace detail

// Smallest K >= 1 bounding the norm ratios over all phases, estimated on a
// uniform phase grid with one parabolic refinement around the grid maximum.
inline double min_k(const CorrelationInstance& inst,
                    const std::vector<OperatorPair>& pairs,
                    int gridSize = 256) {
  require(!pairs.empty(), "min_k: need at least one operator pair");
  require(gridSize >= 8, "min_k: grid too coarse");
  const CVec upsi = apply_u12(inst.u12, inst.dims, inst.psi);
  const double step = 2.0 * kPi / gridSize;
  double worst = 1.0;
  std::vector<double> r(gridSize);
  for (const auto& p : pairs) {
    detail::PhaseSweep sweep;
    sweep.v1 = apply_factor1(p.a1, inst.dims, inst.psi);
    sweep.v3 = apply_factor3(p.a3, inst.dims, inst.psi);
    sweep.u1 = apply_factor1(p.a1, inst.dims, upsi);
    sweep.u3 = apply_factor3(p.a3, inst.dims, upsi);
    sweep.floor = 1e-12 * (sweep.u1.squaredNorm() + sweep.u3.squaredNorm() +
                           sweep.v1.squaredNorm() + sweep.v3.squaredNorm());
    int best = 0;
    for (int g = 0; g < gridSize; ++g) {
      r[g] = sweep.ratio(g * step);
      if (r[g] > r[best]) best = g;
    }
    double pairWorst = r[best];
    if (std::isfinite(pairWorst)) {
      // Parabolic refinement through the three samples around the maximum.
      const double rm = r[(best + gridSize - 1) % gridSize];
      const double rp = r[(best + 1) % gridSize];
      if (std::isfinite(rm) && std::isfinite(rp)) {
        const double denom = rm - 2.0 * r[best] + rp;
        if (std::abs(denom) > 1e-30) {
          double h = 0.5 * (rm - rp) / denom;
          h = std::clamp(h, -1.0, 1.0);
          pairWorst = std::max(pairWorst, sweep.ratio((best + h) * step));
        }
      }
    }
    worst = std::max(worst, pairWorst);
    if (!std::isfinite(worst)) return kInfiniteDamping;
  }
  return std::sqrt(worst);
}

struct LemmaReport {
  double invarianceDefect = 0.0;
  double minQ = 0.0;
  double minK = 1.0;
  bool finite = true;
  double discrepancy = 0.0;  // |minK^2 - (minQ + 1)|, when finite
};

// Runs both routes on the same pair family and reports their agreement.
inline LemmaReport verify_lemma(const CorrelationInstance& inst,
                                const std::vector<OperatorPair>& pairs,
                                int gridSize = 256) {
  LemmaReport rep;
  rep.invarianceDefect = check_invariance(inst);
  rep.minQ = min_q(inst, pairs);
  rep.minK = min_k(inst, pairs, gridSize);
  rep.finite = std::isfinite(rep.minQ) && std::isfinite(rep.minK);
  rep.discrepancy =
      rep.finite ? std::abs(rep.minK * rep.minK - (rep.minQ + 1.0)) : 0.0;
  return rep;
}

// Structured operator samples on a d-dimensional factor: all matrix units,
// the identity, Hermitian off-diagonal combinations, and seeded random
// operators scaled to unit operator norm.
inline std::vector<CMat> default_operator_samples(int d, std::uint64_t seed,
                                                  int randomCount = 8) {
  require_dim(d >= 1 && d <= kDimensionCap, "default_operator_samples: bad d");
  std::vector<CMat> out;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      CMat e = CMat::Zero(d, d);
      e(i, j) = 1.0;
      out.push_back(e);
    }
  out.push_back(CMat::Identity(d, d));
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      CMat sym = CMat::Zero(d, d), asym = CMat::Zero(d, d);
      sym(i, j) = sym(j, i) = 1.0;
      asym(i, j) = cplx(0.0, 1.0);
      asym(j, i) = cplx(0.0, -1.0);
      out.push_back(sym);
      out.push_back(asym);
    }
  Rng rng(seed);
  for (int k = 0; k < randomCount; ++k) {
    CMat g = rng.ginibre(d, d);
    out.push_back(g / operator_norm(g));
  }
  return out;
}

// Cross product of per-factor samples.
inline std::vector<OperatorPair> default_pairs(const TripartiteDims& t,
                                               std::uint64_t seed,
                                               int randomCount = 8) {
  const auto s1 = default_operator_samples(t.d1, seed, randomCount);
  const auto s3 = default_operator_samples(t.d3, seed + 1, randomCount);
  std::vector<OperatorPair> pairs;
  pairs.reserve(s1.size() * s3.size());
  for (const auto& a1 : s1)
    for (const auto& a3 : s3) pairs.push_back({a1, a3});
  return pairs;
}

// Interaction that leaves every factor-1 expectation invariant: a phase
// operator diagonal in the eigenbasis of the reduced state on factor 1,
// tensored with an arbitrary unitary on factor 2.
inline CMat invariant_interaction(const CVec& psi, const TripartiteDims& t,
                                  Rng& rng) {
  const CMat rho1 = reduced_density_1(psi, t);
  const auto eig = hermitian_eigensystem((rho1 + dagger(rho1)) / 2.0);
  CMat w = CMat::Zero(t.d1, t.d1);
  for (int k = 0; k < t.d1; ++k) {
    const cplx phase = std::polar(1.0, rng.uniform(0.0, 2.0 * kPi));
    w += phase * (eig.vectors.col(k) * eig.vectors.col(k).adjoint());
  }
  return tensor_product(w, rng.unitary(t.d2));
}

// Generic instance satisfying the invariance precondition exactly.
inline CorrelationInstance random_invariant_instance(const TripartiteDims& t,
                                                     Rng& rng) {
  CVec psi = rng.state(t.joint());
  CMat u = invariant_interaction(psi, t, rng);
  return CorrelationInstance(t, std::move(psi), std::move(u));
}

// Product state with an invariant interaction; its correlations are exactly
// unchanged, so the damping constant vanishes.
inline CorrelationInstance product_instance(const TripartiteDims& t,
                                            Rng& rng) {
  const CVec p1 = rng.state(t.d1);
  const CVec p2 = rng.state(t.d2);
  const CVec p3 = rng.state(t.d3);
  CVec psi(t.joint());
  for (int i1 = 0; i1 < t.d1; ++i1)
    for (int i2 = 0; i2 < t.d2; ++i2)
      for (int i3 = 0; i3 < t.d3; ++i3)
        psi[(i1 * t.d2 + i2) * t.d3 + i3] = p1[i1] * p2[i2] * p3[i3];
  CMat u = invariant_interaction(psi, t, rng);
  return CorrelationInstance(t, std::move(psi), std::move(u));
}

}  // namespace ctclab::correlations

#endif  // CTCLAB_CORRELATIONS_HPP
