#pragma once
#ifndef CTCLAB_GIBBS_HPP
#define CTCLAB_GIBBS_HPP

// Thermal equilibrium states of a harmonic oscillator with level energies
// E_n = n + 1/2, and their behaviour on finite-rank observables.
//
// The partition function has the closed form
//
//   Z(beta) = sum_n e^{-beta E_n} = e^{-beta/2} / (1 - e^{-beta}),
//
// and the Gibbs weight of level n is e^{-beta E_n} / Z.  Expectations of
// finite-rank observables are computed here by explicit truncated sums (with
// compensated summation) so they can be compared against closed forms; the
// truncated tail is controlled exactly:
//
//   sum_{n > N} e^{-beta E_n} / Z(beta) = e^{-beta (N+1)}.
//
// Two exact identities used as oracles throughout:
//   omega_beta(p_0)              = 1 - e^{-beta}
//   sum_{j=0..k-1} omega_beta(p_j) = 1 - e^{-beta k}.
//
// As beta -> 0 every individual level weight vanishes while the cumulative
// weights still sum to one at each fixed beta; the report at the bottom
// tabulates those two incompatible limits, which is the obstruction to
// extending the small-beta limit of the Gibbs functionals to a normal state.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "ctclab/common.hpp"
#include "ctclab/linalg.hpp"

namespace ctclab::gibbs {

inline constexpr double kTailTol = 1e-12;

inline double energy(long n) { return static_cast<double>(n) + 0.5; }

inline double partition_function(double beta) {
  require(beta > 0.0, "partition_function: beta must be positive");
  return std::exp(-beta / 2.0) / (-std::expm1(-beta));
}

// Relative weight of the levels above nmax: exp(-beta (nmax+1)), exactly.
inline double relative_tail(double beta, long nmax) {
  require(beta > 0.0 && nmax >= 0, "relative_tail: bad arguments");
  return std::exp(-beta * static_cast<double>(nmax + 1));
}

// Smallest default truncation keeping the relative tail below ~1e-13.
inline long default_nmax(double beta) {
  require(beta > 0.0, "default_nmax: beta must be positive");
  const double n = std::ceil(30.0 / beta);
  return std::max(200L, static_cast<long>(n));
}

namespace detail {

// Kahan-compensated accumulator; keeps long geometric sums at a few ulps.
struct Accumulator {
  double sum = 0.0, carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

}  // namespace detail

inline double partition_function_partial(double beta, long nmax) {
  require(beta > 0.0 && nmax >= 0, "partition_function_partial: bad args");
  detail::Accumulator acc;
  for (long n = 0; n <= nmax; ++n) acc.add(std::exp(-beta * energy(n)));
  return acc.sum;
}

// Observable c * 1 + sum_{n,m < levels} block(n,m) |n><m|.
struct FiniteRankObservable {
  int levels = 0;
  CMat block;                      // levels x levels, Hermitian
  double identityCoefficient = 0;  // multiple of the identity added on top

  FiniteRankObservable(int lv, CMat b, double idc = 0.0)
      : levels(lv), block(std::move(b)), identityCoefficient(idc) {
    require_dim(levels >= 0 && levels <= kDimensionCap,
                "FiniteRankObservable: bad level count");
    require_dim(block.rows() == levels && block.cols() == levels,
                "FiniteRankObservable: block shape mismatch");
    if (levels > 0)
      require(max_abs(CMat(block - block.adjoint())) <=
                  kHermitianTol * (1.0 + max_abs(block)),
              "FiniteRankObservable: block is not Hermitian");
  }

  // p_k = |k><k|.
  static FiniteRankObservable level_projector(int k) {
    require_dim(k >= 0, "level_projector: negative level");
    CMat b = CMat::Zero(k + 1, k + 1);
    b(k, k) = 1.0;
    return FiniteRankObservable(k + 1, std::move(b));
  }

  // sum_{j < k} p_j: the rank-k initial-segment projector.
  static FiniteRankObservable segment_projector(int k) {
    require_dim(k >= 1, "segment_projector: need at least one level");
    return FiniteRankObservable(k, CMat(CMat::Identity(k, k)));
  }

  // The identity itself (not finite-rank; carried by the coefficient).
  static FiniteRankObservable identity() {
    return FiniteRankObservable(0, CMat(CMat::Zero(0, 0)), 1.0);
  }
};

// Truncated-sum Gibbs expectation.  Throws truncation_error when the
// requested truncation cannot control the tail to tailTol; nmax < 0 selects
// the default truncation for the given beta.
inline double gibbs_expectation(const FiniteRankObservable& obs, double beta,
                                long nmax = -1, double tailTol = kTailTol) {
  require(beta > 0.0, "gibbs_expectation: beta must be positive");
  if (nmax < 0)
    nmax = std::max(default_nmax(beta), static_cast<long>(obs.levels));
  if (relative_tail(beta, nmax) > tailTol)
    throw truncation_error(
        "gibbs_expectation: relative tail " +
        std::to_string(relative_tail(beta, nmax)) +
        " exceeds the tail tolerance; raise nmax or use the default");
  require(obs.levels == 0 || obs.levels - 1 <= nmax,
          "gibbs_expectation: observable block extends beyond the truncation");
  detail::Accumulator num, den;
  for (long n = 0; n <= nmax; ++n) {
    const double w = std::exp(-beta * energy(n));
    den.add(w);
    if (n < obs.levels) num.add(obs.block(n, n).real() * w);
  }
  return obs.identityCoefficient + num.sum / den.sum;
}

struct ScanRow {
  double beta = 0.0;
  long nmax = 0;
  double relativeTail = 0.0;
  double partitionClosed = 0.0;
  double partitionPartial = 0.0;
  double groundOccupancy = 0.0;  // omega_beta(p_0), truncated-sum route
  double expectation = 0.0;      // of the supplied observable
};

inline std::vector<ScanRow> scan_beta(const FiniteRankObservable& obs,
                                      const std::vector<double>& betas) {
  std::vector<ScanRow> rows;
  rows.reserve(betas.size());
  for (double beta : betas) {
    ScanRow r;
    r.beta = beta;
    r.nmax = default_nmax(beta);
    r.relativeTail = relative_tail(beta, r.nmax);
    r.partitionClosed = partition_function(beta);
    r.partitionPartial = partition_function_partial(beta, r.nmax);
    r.groundOccupancy =
        gibbs_expectation(FiniteRankObservable::level_projector(0), beta);
    r.expectation = gibbs_expectation(obs, beta);
    rows.push_back(r);
  }
  return rows;
}

// The two incompatible limits in one table: at fixed beta the cumulative
// level weights tend to one in k, while at each fixed k the weight of every
// individual level (and of every fixed finite segment) tends to zero with
// beta.
struct ContradictionReport {
  double betaStar = 0.0;
  std::vector<long> ks;
  std::vector<double> cumulativeAtBetaStar;  // -> 1 as k grows
  long kStar = 0;
  std::vector<double> betas;
  std::vector<double> segmentAtSmallBeta;  // -> 0 as beta -> 0
};

inline ContradictionReport normality_contradiction(
    double betaStar, const std::vector<long>& ks, long kStar,
    const std::vector<double>& betas) {
  require(betaStar > 0.0 && kStar >= 1, "normality_contradiction: bad args");
  ContradictionReport rep;
  rep.betaStar = betaStar;
  rep.ks = ks;
  rep.kStar = kStar;
  rep.betas = betas;
  for (long k : ks) {
    require(k >= 1, "normality_contradiction: segment sizes start at 1");
    rep.cumulativeAtBetaStar.push_back(gibbs_expectation(
        FiniteRankObservable::segment_projector(static_cast<int>(k)),
        betaStar));
  }
  for (double beta : betas)
    rep.segmentAtSmallBeta.push_back(gibbs_expectation(
        FiniteRankObservable::segment_projector(static_cast<int>(kStar)),
        beta));
  return rep;
}

}  // namespace ctclab::gibbs

#endif  // CTCLAB_GIBBS_HPP
