#pragma once
#ifndef CTCLAB_POLITZER_HPP
#define CTCLAB_POLITZER_HPP

// Massless scalar field on a 1+1 spacetime with a strip time machine.
//
// Two horizontal slits S± = { t = ±tau, |x| <= L } are removed from
// Minkowski space and their lips are glued crosswise: the underside of S-
// connects to the underside of S+ (worldlines crossing t = -tau upward inside
// the strip reappear above t = +tau), and the top side of S+ connects to the
// top side of S- (worldlines crossing t = +tau upward inside the strip
// reappear just above t = -tau, inside the slab).  The slab region
// -tau < t < tau, |x| <= L is traversed repeatedly and carries closed
// timelike curves.
//
// The field is evolved by null characteristics.  Right movers are functions
// of u = t - x, left movers of v = t + x; both chiralities pick up the same
// coordinate shift at a glued crossing (the time jump of +-2 tau, with x
// preserved).  Tracing BACKWARD in time:
//
//   cross t = -tau from above, |x| <= L  ->  continue from (+tau, x), c += 2 tau
//   cross t = +tau from above, |x| <= L  ->  continue from (-tau, x), c -= 2 tau
//
// where c is the null coordinate of either chirality.  Forward tracing
// inverts these rules.  A crossing within `criticalTol` of a strip endpoint
// x = +-L raises critical_ray_error (the solution is not controlled on rays
// grazing the rim), and evaluation on a removed strip itself raises
// ambiguity_error (the two lips carry different values).
//
// Initial data lives on a surface t = t0 < -tau as a pair of piecewise-cubic
// profiles in the null coordinates.  Everything else - point evaluation,
// Cauchy-data splitting, the symplectic form, Weyl elements, localization of
// regions on the initial surface - is built on the tracer.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "ctclab/common.hpp"
#include "ctclab/rng.hpp"

namespace ctclab::politzer {

inline constexpr double kCutTol = 1e-12;  // on-line detection for t = +-tau

struct Geometry {
  double tau;          // strips sit at t = +-tau
  double halfLength;   // strips span |x| <= halfLength
  double criticalTol;  // grazing tolerance around the strip endpoints

  explicit Geometry(double tau_, double halfLength_, double crit = 1e-6)
      : tau(tau_), halfLength(halfLength_), criticalTol(crit) {
    require(tau > 0.0, "Geometry: tau must be positive");
    require(halfLength > 0.0, "Geometry: strip half-length must be positive");
    require(criticalTol > 0.0 && criticalTol < tau &&
                criticalTol < halfLength,
            "Geometry: grazing tolerance must be small and positive");
  }

  bool same_as(const Geometry& o) const {
    return tau == o.tau && halfLength == o.halfLength;
  }
};

enum class Chirality { Right, Left };  // profiles in u = t - x resp. v = t + x

// ---------------------------------------------------------------------------
// Piecewise-cubic C^1 profiles with explicit knots, values and slopes.
// Between consecutive knots the profile is the cubic Hermite interpolant of
// the endpoint data; outside the knot range it continues with the boundary
// value (constant tails).  Because a cubic is its own Hermite interpolant on
// any subinterval, the sum of two profiles on the merged knot set is again
// exactly representable, which makes profile addition exact.
// ---------------------------------------------------------------------------
class MoverProfile {
 public:
  MoverProfile() = default;  // identically zero

  MoverProfile(std::vector<double> knots, std::vector<double> values,
               std::vector<double> slopes)
      : knots_(std::move(knots)),
        values_(std::move(values)),
        slopes_(std::move(slopes)) {
    require(knots_.size() == values_.size() &&
                knots_.size() == slopes_.size(),
            "MoverProfile: knots/values/slopes size mismatch");
    require(knots_.size() >= 2, "MoverProfile: need at least two knots");
    for (size_t i = 0; i + 1 < knots_.size(); ++i)
      require(knots_[i] < knots_[i + 1],
              "MoverProfile: knots must be strictly increasing");
    for (double k : knots_) require(std::isfinite(k), "MoverProfile: knot");
    for (double y : values_) require(std::isfinite(y), "MoverProfile: value");
    for (double m : slopes_) require(std::isfinite(m), "MoverProfile: slope");
  }

  bool empty() const { return knots_.empty(); }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& slopes() const { return slopes_; }

  double operator()(double c) const {
    if (empty()) return 0.0;
    if (c <= knots_.front()) return values_.front();
    if (c >= knots_.back()) return values_.back();
    const size_t i = piece(c);
    const double h = knots_[i + 1] - knots_[i];
    const double s = (c - knots_[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * values_[i] +
           (s3 - 2 * s2 + s) * h * slopes_[i] +
           (-2 * s3 + 3 * s2) * values_[i + 1] +
           (s3 - s2) * h * slopes_[i + 1];
  }

  double derivative(double c) const {
    if (empty() || c <= knots_.front() || c >= knots_.back()) return 0.0;
    const size_t i = piece(c);
    const double h = knots_[i + 1] - knots_[i];
    const double s = (c - knots_[i]) / h;
    const double s2 = s * s;
    return ((6 * s2 - 6 * s) * values_[i] / h +
            (3 * s2 - 4 * s + 1) * slopes_[i] +
            (-6 * s2 + 6 * s) * values_[i + 1] / h +
            (3 * s2 - 2 * s) * slopes_[i + 1]);
  }

  // Conservative check that the profile vanishes on [lo, hi] up to tol.
  bool is_zero_on(double lo, double hi, double tol) const {
    if (empty()) return true;
    if (lo < knots_.front() && std::abs(values_.front()) > tol) return false;
    if (hi > knots_.back() && std::abs(values_.back()) > tol) return false;
    for (size_t i = 0; i + 1 < knots_.size(); ++i) {
      if (knots_[i + 1] < lo || knots_[i] > hi) continue;
      const double h = knots_[i + 1] - knots_[i];
      const double bound = std::abs(values_[i]) + std::abs(values_[i + 1]) +
                           0.15 * h *
                               (std::abs(slopes_[i]) +
                                std::abs(slopes_[i + 1]));
      if (bound > tol) return false;
    }
    return true;
  }

  // Exact sum on the merged knot set.
  MoverProfile operator+(const MoverProfile& o) const {
    if (empty()) return o;
    if (o.empty()) return *this;
    std::vector<double> merged;
    merged.reserve(knots_.size() + o.knots_.size());
    std::merge(knots_.begin(), knots_.end(), o.knots_.begin(), o.knots_.end(),
               std::back_inserter(merged));
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    std::vector<double> vals, slopes;
    vals.reserve(merged.size());
    slopes.reserve(merged.size());
    for (double k : merged) {
      vals.push_back((*this)(k) + o(k));
      slopes.push_back(knot_slope(k) + o.knot_slope(k));
    }
    return MoverProfile(std::move(merged), std::move(vals), std::move(slopes));
  }

  MoverProfile operator-() const {
    if (empty()) return {};
    std::vector<double> vals = values_, slopes = slopes_;
    for (double& y : vals) y = -y;
    for (double& m : slopes) m = -m;
    return MoverProfile(knots_, std::move(vals), std::move(slopes));
  }

  // Smooth compactly supported cosine bump sampled onto Hermite knots.
  static MoverProfile bump(double center, double halfWidth, double amplitude,
                           int pieces = 32) {
    require(halfWidth > 0.0 && pieces >= 4, "MoverProfile::bump: bad shape");
    std::vector<double> k(pieces + 1), y(pieces + 1), m(pieces + 1);
    for (int i = 0; i <= pieces; ++i) {
      const double c = center - halfWidth + 2.0 * halfWidth * i / pieces;
      const double phase = kPi * (c - center) / halfWidth;
      k[i] = c;
      y[i] = amplitude * 0.5 * (1.0 + std::cos(phase));
      m[i] = -amplitude * 0.5 * (kPi / halfWidth) * std::sin(phase);
    }
    y.front() = y.back() = 0.0;
    m.front() = m.back() = 0.0;
    return MoverProfile(std::move(k), std::move(y), std::move(m));
  }

 private:
  size_t piece(double c) const {
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), c);
    const size_t i = static_cast<size_t>(it - knots_.begin());
    return std::min(std::max<size_t>(i, 1) - 1, knots_.size() - 2);
  }

  // One-sided derivative at an arbitrary point, matching the piece used by
  // operator(); at interior knots both sides agree by C^1 continuity.
  double knot_slope(double c) const {
    if (empty() || c <= knots_.front() || c >= knots_.back()) {
      // Exactly at a boundary knot the stored slope applies.
      if (!empty() && c == knots_.front()) return slopes_.front();
      if (!empty() && c == knots_.back()) return slopes_.back();
      return 0.0;
    }
    const auto it = std::lower_bound(knots_.begin(), knots_.end(), c);
    if (it != knots_.end() && *it == c)
      return slopes_[static_cast<size_t>(it - knots_.begin())];
    return derivative(c);
  }

  std::vector<double> knots_, values_, slopes_;
};

// ---------------------------------------------------------------------------
// Characteristic tracing.
// ---------------------------------------------------------------------------

enum class CrossingAction { Free, Wrap, Jump };

struct CrossingEvent {
  double line = 0.0;    // the t = +-tau line being crossed
  double xCross = 0.0;  // crossing position in x
  CrossingAction action = CrossingAction::Free;
  double shift = 0.0;  // change applied to the null coordinate
};

struct TraceResult {
  Chirality chirality = Chirality::Right;
  double start = 0.0;      // null coordinate at the starting point
  double effective = 0.0;  // null coordinate at the target surface
  int wraps = 0;           // slab-side gluings traversed
  int jumps = 0;           // over-the-slab gluings traversed
  std::vector<CrossingEvent> events;
};

namespace detail {

inline void check_on_cut(const Geometry& g, double t, double x) {
  if ((std::abs(t - g.tau) <= kCutTol || std::abs(t + g.tau) <= kCutTol) &&
      std::abs(x) <= g.halfLength + g.criticalTol)
    throw ambiguity_error(
        "point lies on a removed strip; the evaluation is two-valued");
}

inline void check_grazing(const Geometry& g, double xc) {
  if (std::abs(xc - g.halfLength) < g.criticalTol ||
      std::abs(xc + g.halfLength) < g.criticalTol)
    throw critical_ray_error(
        "characteristic passes within the grazing tolerance of a strip "
        "endpoint");
}

}  // namespace detail

inline TraceResult trace_backward(const Geometry& g, Chirality ch, double t,
                                  double x, double targetT) {
  require(targetT <= t, "trace_backward: target surface is above the point");
  detail::check_on_cut(g, t, x);
  TraceResult res;
  res.chirality = ch;
  res.start = (ch == Chirality::Right) ? t - x : t + x;
  double c = res.start;
  double tcur = t;
  const int guard =
      16 + 2 * static_cast<int>(g.halfLength / g.tau + 2.0);
  for (int step = 0; step <= guard; ++step) {
    double line;
    if (tcur > g.tau && targetT < g.tau)
      line = g.tau;
    else if (tcur > -g.tau && targetT < -g.tau)
      line = -g.tau;
    else {
      res.effective = c;
      return res;
    }
    const double xc = (ch == Chirality::Right) ? line - c : c - line;
    detail::check_grazing(g, xc);
    if (std::abs(xc) <= g.halfLength) {
      if (line == -g.tau) {  // slab-side gluing: reappear under t = +tau
        c += 2.0 * g.tau;
        tcur = g.tau;
        ++res.wraps;
        res.events.push_back(
            {line, xc, CrossingAction::Wrap, 2.0 * g.tau});
      } else {  // outer gluing: reappear under t = -tau
        c -= 2.0 * g.tau;
        tcur = -g.tau;
        ++res.jumps;
        res.events.push_back(
            {line, xc, CrossingAction::Jump, -2.0 * g.tau});
      }
    } else {
      res.events.push_back({line, xc, CrossingAction::Free, 0.0});
      tcur = line;
    }
  }
  throw solver_error("trace_backward: crossing guard exceeded");
}

inline TraceResult trace_forward(const Geometry& g, Chirality ch, double t,
                                 double x, double targetT) {
  require(targetT >= t, "trace_forward: target surface is below the point");
  detail::check_on_cut(g, t, x);
  TraceResult res;
  res.chirality = ch;
  res.start = (ch == Chirality::Right) ? t - x : t + x;
  double c = res.start;
  double tcur = t;
  const int guard =
      16 + 2 * static_cast<int>(g.halfLength / g.tau + 2.0);
  for (int step = 0; step <= guard; ++step) {
    double line;
    if (tcur < -g.tau && targetT > -g.tau)
      line = -g.tau;
    else if (tcur < g.tau && targetT > g.tau)
      line = g.tau;
    else {
      res.effective = c;
      return res;
    }
    const double xc = (ch == Chirality::Right) ? line - c : c - line;
    detail::check_grazing(g, xc);
    if (std::abs(xc) <= g.halfLength) {
      if (line == -g.tau) {  // outer gluing, upward: skip over the slab
        c += 2.0 * g.tau;
        tcur = g.tau;
        ++res.jumps;
        res.events.push_back(
            {line, xc, CrossingAction::Jump, 2.0 * g.tau});
      } else {  // slab-side gluing, upward: wind back to t = -tau
        c -= 2.0 * g.tau;
        tcur = -g.tau;
        ++res.wraps;
        res.events.push_back(
            {line, xc, CrossingAction::Wrap, -2.0 * g.tau});
      }
    } else {
      res.events.push_back({line, xc, CrossingAction::Free, 0.0});
      tcur = line;
    }
  }
  throw solver_error("trace_forward: crossing guard exceeded");
}

// The four null-coordinate values whose characteristics graze a strip
// endpoint directly; each applies to both chiralities (8 rays in total).
inline std::array<double, 4> base_critical_coordinates(const Geometry& g) {
  return {-g.tau - g.halfLength, -g.tau + g.halfLength,
          g.tau - g.halfLength, g.tau + g.halfLength};
}

// All candidate critical null coordinates in [lo, hi]: the base values and
// their 2 tau translates (repeated slab windings shift the grazing ray).
inline std::vector<double> critical_candidates(const Geometry& g, double lo,
                                               double hi) {
  require(lo <= hi, "critical_candidates: empty range");
  std::vector<double> out;
  for (double base : base_critical_coordinates(g)) {
    const double mLo = std::floor((lo - base) / (2.0 * g.tau)) - 1.0;
    const double mHi = std::ceil((hi - base) / (2.0 * g.tau)) + 1.0;
    for (double m = mLo; m <= mHi; m += 1.0) {
      const double c = base + 2.0 * g.tau * m;
      if (c >= lo && c <= hi) out.push_back(c);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double a, double b) { return std::abs(a - b) <
                                                        1e-12; }),
            out.end());
  return out;
}

// ---------------------------------------------------------------------------
// A field: initial profiles on t = t0 < -tau plus the geometry.
// ---------------------------------------------------------------------------

struct PolitzerField {
  Geometry geom;
  double t0;
  MoverProfile xiR;  // right-mover data, function of u = t - x
  MoverProfile xiL;  // left-mover data, function of v = t + x

  PolitzerField(Geometry g, double initialT, MoverProfile r, MoverProfile l)
      : geom(g), t0(initialT), xiR(std::move(r)), xiL(std::move(l)) {
    require(t0 < -g.tau, "PolitzerField: initial surface must lie below the "
                         "lower strip");
  }
};

inline double evaluate(const PolitzerField& f, double t, double x) {
  require(t >= f.t0, "evaluate: point lies below the initial surface");
  const auto r = trace_backward(f.geom, Chirality::Right, t, x, f.t0);
  const auto l = trace_backward(f.geom, Chirality::Left, t, x, f.t0);
  return f.xiR(r.effective) + f.xiL(l.effective);
}

// Time derivative; valid away from cut lines and critical rays, where the
// effective coordinates depend on t with unit rate.
inline double evaluate_dt(const PolitzerField& f, double t, double x) {
  require(t >= f.t0, "evaluate_dt: point lies below the initial surface");
  const auto r = trace_backward(f.geom, Chirality::Right, t, x, f.t0);
  const auto l = trace_backward(f.geom, Chirality::Left, t, x, f.t0);
  return f.xiR.derivative(r.effective) + f.xiL.derivative(l.effective);
}

// The same data evolved on plain Minkowski space (no strips).
inline double evaluate_free(const PolitzerField& f, double t, double x) {
  return f.xiR(t - x) + f.xiL(t + x);
}

// Admissible data keeps its non-smooth points (the knots) clear of every
// candidate critical ray, so rim limits are controlled by the profile slopes.
inline bool is_admissible(const PolitzerField& f) {
  for (const MoverProfile* p : {&f.xiR, &f.xiL}) {
    if (p->empty()) continue;
    const double lo = p->knots().front() - 4.0 * f.geom.tau;
    const double hi = p->knots().back() + 4.0 * f.geom.tau;
    const auto cand = critical_candidates(f.geom, lo, hi);
    for (double k : p->knots())
      for (double c : cand)
        if (std::abs(k - c) < f.geom.criticalTol) return false;
  }
  return true;
}

// Mismatch of the two field limits at a glued seam, at finite offset eps.
// outer seam: (tau + eps, x) against (-tau - eps, x);
// inner seam: (-tau + eps, x) against (tau - eps, x).
// Both vanish linearly in eps for admissible data (the traced coordinates
// differ by exactly 2 eps).
inline double rim_mismatch(const PolitzerField& f, double x, double eps,
                           bool outerSeam) {
  require(eps > 10.0 * kCutTol, "rim_mismatch: offset too small");
  const double tau = f.geom.tau;
  if (outerSeam)
    return std::abs(evaluate(f, tau + eps, x) - evaluate(f, -tau - eps, x));
  return std::abs(evaluate(f, -tau + eps, x) - evaluate(f, tau - eps, x));
}

// ---------------------------------------------------------------------------
// Cauchy-data splitting on a surface below the strips.
// ---------------------------------------------------------------------------

struct CauchyData {
  double surfaceT = 0.0;
  double xlo = 0.0;     // leftmost sample position
  double spacing = 0.0;  // uniform grid step
  std::vector<double> phi;  // field values
  std::vector<double> pi;   // time derivatives
};

namespace detail {

// Fourth-order first derivative of uniformly sampled data.
inline std::vector<double> fd_derivative(const std::vector<double>& f,
                                         double h) {
  const size_t n = f.size();
  std::vector<double> d(n);
  for (size_t i = 2; i + 2 < n; ++i)
    d[i] = (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) /
           (12.0 * h);
  d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] -
          3.0 * f[4]) /
         (12.0 * h);
  d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) /
         (12.0 * h);
  d[n - 2] = (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] +
              6.0 * f[n - 4] - f[n - 5]) /
             (12.0 * h);
  d[n - 1] = (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] -
              16.0 * f[n - 4] + 3.0 * f[n - 5]) /
             (12.0 * h);
  return d;
}

// Profile whose derivative interpolates (c_i, d_i) with tangents dd_i and
// whose values are the exact integrals of those cubic pieces from the first
// knot (anchored to zero there).
inline MoverProfile integrate_derivative(const std::vector<double>& c,
                                         const std::vector<double>& d,
                                         const std::vector<double>& dd) {
  const size_t n = c.size();
  std::vector<double> vals(n, 0.0);
  for (size_t i = 0; i + 1 < n; ++i) {
    const double h = c[i + 1] - c[i];
    // Exact integral of the cubic Hermite piece.
    vals[i + 1] = vals[i] + h / 2.0 * (d[i] + d[i + 1]) +
                  h * h / 12.0 * (dd[i] - dd[i + 1]);
  }
  return MoverProfile(c, std::move(vals), d);
}

}  // namespace detail

// Splits Cauchy data (phi, pi) on a uniform grid into mover profiles with
//   xiR'(t - x) = (pi - dphi/dx) / 2,   xiL'(t + x) = (pi + dphi/dx) / 2.
// xiR is anchored to zero at its lowest u, xiL to zero at its highest v; for
// data whose pi has nonzero mean the two profiles then acquire equal and
// opposite constant tails which cancel in the on-surface recomposition.
inline std::pair<MoverProfile, MoverProfile> split_movers(
    const CauchyData& data) {
  const size_t n = data.phi.size();
  require(n >= 7 && data.pi.size() == n,
          "split_movers: need matching phi/pi with at least 7 samples");
  require(data.spacing > 0.0, "split_movers: spacing must be positive");
  const double h = data.spacing;
  const std::vector<double> dphi = detail::fd_derivative(data.phi, h);

  std::vector<double> dR(n), dL(n);
  for (size_t i = 0; i < n; ++i) {
    dR[i] = (data.pi[i] - dphi[i]) / 2.0;
    dL[i] = (data.pi[i] + dphi[i]) / 2.0;
  }

  // Right movers: u = t - x decreases with x; reverse to ascending knots.
  std::vector<double> uKnots(n), dRu(n);
  for (size_t i = 0; i < n; ++i) {
    const size_t j = n - 1 - i;
    uKnots[i] = data.surfaceT - (data.xlo + h * static_cast<double>(j));
    dRu[i] = dR[j];
  }
  const std::vector<double> ddRu = detail::fd_derivative(dRu, h);
  MoverProfile xiR = detail::integrate_derivative(uKnots, dRu, ddRu);

  // Left movers: v = t + x, already ascending; anchor zero at the top end.
  std::vector<double> vKnots(n);
  for (size_t i = 0; i < n; ++i)
    vKnots[i] = data.surfaceT + data.xlo + h * static_cast<double>(i);
  const std::vector<double> ddL = detail::fd_derivative(dL, h);
  MoverProfile xiLraw = detail::integrate_derivative(vKnots, dL, ddL);
  const double top = xiLraw.values().back();
  std::vector<double> shifted = xiLraw.values();
  for (double& y : shifted) y -= top;
  MoverProfile xiL(vKnots, std::move(shifted), dL);
  return {std::move(xiR), std::move(xiL)};
}

// ---------------------------------------------------------------------------
// Symplectic form and Weyl elements.
// ---------------------------------------------------------------------------

namespace detail {

inline double adaptive_simpson(const std::function<double(double)>& f,
                               double a, double b, double fa, double fm,
                               double fb, double whole, double tol,
                               int depth) {
  const double m = (a + b) / 2.0;
  const double lm = (a + m) / 2.0, rm = (m + b) / 2.0;
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol) {
  if (a >= b) return 0.0;
  const double m = (a + b) / 2.0;
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Surface positions where the integrand can lose smoothness: images of the
// profile knots and of the critical candidates under every possible branch
// shift, for both chiralities.
inline std::vector<double> integration_breakpoints(const PolitzerField& f,
                                                   double surfaceT, double lo,
                                                   double hi) {
  std::vector<double> pts;
  const double tau = f.geom.tau;
  const double maxShift =
      2.0 * tau * (std::ceil(f.geom.halfLength / tau) + 2.0);
  auto addCoordinate = [&](double c, Chirality ch) {
    for (double s = -maxShift; s <= maxShift + 1e-12; s += 2.0 * tau) {
      const double x = (ch == Chirality::Right) ? surfaceT - (c + s)
                                                : (c + s) - surfaceT;
      if (x > lo && x < hi) pts.push_back(x);
    }
  };
  const std::array<std::pair<const MoverProfile*, Chirality>, 2> parts{
      {{&f.xiR, Chirality::Right}, {&f.xiL, Chirality::Left}}};
  for (const auto& [profile, ch] : parts) {
    if (profile->empty()) continue;
    for (double k : profile->knots()) addCoordinate(k, ch);
    for (double c : critical_candidates(
             f.geom, profile->knots().front() - maxShift,
             profile->knots().back() + maxShift))
      addCoordinate(c, ch);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](double a, double b) { return b - a < 1e-11; }),
            pts.end());
  return pts;
}

inline void support_hull(const PolitzerField& f, double surfaceT, double& lo,
                         double& hi) {
  const double pad =
      2.0 * f.geom.tau * (std::ceil(f.geom.halfLength / f.geom.tau) + 2.0) +
      1.0;
  lo = surfaceT;  // fallback degenerate hull
  hi = surfaceT;
  bool first = true;
  auto extend = [&](double a, double b) {
    if (first) {
      lo = a;
      hi = b;
      first = false;
    } else {
      lo = std::min(lo, a);
      hi = std::max(hi, b);
    }
  };
  if (!f.xiR.empty())
    extend(surfaceT - f.xiR.knots().back() - pad,
           surfaceT - f.xiR.knots().front() + pad);
  if (!f.xiL.empty())
    extend(f.xiL.knots().front() - surfaceT - pad,
           f.xiL.knots().back() - surfaceT + pad);
}

}  // namespace detail

// sigma(f, g) = integral over the surface t = surfaceT of
//   (d_t phi_f) phi_g - phi_f (d_t phi_g) dx,
// evaluated with adaptive Simpson quadrature split at every point where the
// integrand can lose smoothness.  The value is independent of the surface.
inline double symplectic_form(const PolitzerField& f, const PolitzerField& g,
                              double surfaceT, double quadTol = 1e-10) {
  require(f.geom.same_as(g.geom), "symplectic_form: geometry mismatch");
  require(surfaceT >= f.t0 && surfaceT >= g.t0,
          "symplectic_form: surface below the initial data");
  require(std::abs(surfaceT - f.geom.tau) > 1e-9 &&
              std::abs(surfaceT + f.geom.tau) > 1e-9,
          "symplectic_form: surface must avoid the strip lines");
  double lo1, hi1, lo2, hi2;
  detail::support_hull(f, surfaceT, lo1, hi1);
  detail::support_hull(g, surfaceT, lo2, hi2);
  const double lo = std::min(lo1, lo2), hi = std::max(hi1, hi2);
  // The integrand jumps across critical-ray images, which are used as
  // panel endpoints below.  Integrate with a near-zero grazing guard and
  // nudge panel ends inward so those evaluations stay defined; the omitted
  // mass is O(1e-12) per panel.
  const Geometry probeGeom(f.geom.tau, f.geom.halfLength, 1e-13);
  const PolitzerField fp(probeGeom, f.t0, f.xiR, f.xiL);
  const PolitzerField gp(probeGeom, g.t0, g.xiR, g.xiL);
  auto integrand = [&](double x) {
    return evaluate_dt(fp, surfaceT, x) * evaluate(gp, surfaceT, x) -
           evaluate(fp, surfaceT, x) * evaluate_dt(gp, surfaceT, x);
  };
  std::vector<double> cuts = detail::integration_breakpoints(f, surfaceT, lo,
                                                             hi);
  const auto cutsG = detail::integration_breakpoints(g, surfaceT, lo, hi);
  cuts.insert(cuts.end(), cutsG.begin(), cutsG.end());
  cuts.push_back(lo);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) { return b - a < 1e-11; }),
             cuts.end());
  const double panelTol = std::max(
      quadTol / static_cast<double>(cuts.size()), 1e-14);
  const double nudge = 1e-12;
  double total = 0.0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i)
    total += detail::integrate(integrand, cuts[i] + nudge,
                               cuts[i + 1] - nudge, panelTol);
  return total;
}

// Exponentiated field element: a scalar phase together with the (real,
// classical) solution it is built from.  Products add the solutions exactly
// and pick up the symplectic phase factor
//   w(f) w(g) = e^{ i sigma(f, g) / 2 } w(f + g).
struct WeylElement {
  PolitzerField field;
  cplx phase{1.0, 0.0};
};

inline WeylElement weyl_multiply(const WeylElement& a, const WeylElement& b,
                                 double surfaceT, double quadTol = 1e-10) {
  require(a.field.geom.same_as(b.field.geom) && a.field.t0 == b.field.t0,
          "weyl_multiply: elements live on different backgrounds");
  const double sigma = symplectic_form(a.field, b.field, surfaceT, quadTol);
  PolitzerField sum(a.field.geom, a.field.t0, a.field.xiR + b.field.xiR,
                    a.field.xiL + b.field.xiL);
  return {std::move(sum),
          a.phase * b.phase * std::exp(cplx(0.0, sigma / 2.0))};
}

// ---------------------------------------------------------------------------
// Regions and localization.
// ---------------------------------------------------------------------------

struct SpacetimeRegion {
  double time = 0.0;
  double xlo = 0.0, xhi = 0.0;

  SpacetimeRegion(double t, double lo, double hi)
      : time(t), xlo(lo), xhi(hi) {
    require(lo < hi, "SpacetimeRegion: empty interval");
  }
  double width() const { return xhi - xlo; }
};

struct SurfaceInterval {
  double lo = 0.0, hi = 0.0;
};

struct Localization {
  std::vector<SurfaceInterval> right;  // x-intervals on the initial surface
  std::vector<SurfaceInterval> left;
};

namespace detail {

// True when the backward characteristic from (time, coordinate c) grazes a
// strip endpoint; probed with a reduced tolerance so that only genuine
// branch boundaries split the localization.
inline bool coordinate_is_critical(const Geometry& g, Chirality ch, double t,
                                   double c, double targetT) {
  Geometry probe(g.tau, g.halfLength, 1e-9);
  const double x = (ch == Chirality::Right) ? t - c : c - t;
  try {
    trace_backward(probe, ch, t, x, targetT);
  } catch (const critical_ray_error&) {
    return true;
  } catch (const ambiguity_error&) {
    return true;
  }
  return false;
}

inline std::vector<SurfaceInterval> localize_chirality(
    const Geometry& g, double t0, const SpacetimeRegion& region,
    Chirality ch) {
  // Null-coordinate range spanned by the region.
  const double cLo = (ch == Chirality::Right) ? region.time - region.xhi
                                              : region.time + region.xlo;
  const double cHi = (ch == Chirality::Right) ? region.time - region.xlo
                                              : region.time + region.xhi;
  // Split at genuine branch boundaries.
  std::vector<double> splits{cLo, cHi};
  for (double c : critical_candidates(g, cLo, cHi))
    if (c > cLo && c < cHi &&
        coordinate_is_critical(g, ch, region.time, c, t0))
      splits.push_back(c);
  std::sort(splits.begin(), splits.end());
  std::vector<SurfaceInterval> images;
  for (size_t i = 0; i + 1 < splits.size(); ++i) {
    const double a = splits[i], b = splits[i + 1];
    if (b - a < 1e-12) continue;
    const double mid = (a + b) / 2.0;
    const double x = (ch == Chirality::Right) ? region.time - mid
                                              : mid - region.time;
    // Probe with a reduced grazing tolerance: the midpoint of a narrow
    // branch cell may sit closer to the critical ray than the default.
    Geometry probe(g.tau, g.halfLength, 1e-9);
    const auto tr = trace_backward(probe, ch, region.time, x, t0);
    const double shift = tr.effective - tr.start;  // constant on the branch
    // Effective coords [a+shift, b+shift] land on the surface at
    // x = t0 - u_eff (right movers) or x = v_eff - t0 (left movers).
    SurfaceInterval img;
    if (ch == Chirality::Right) {
      img.lo = t0 - (b + shift);
      img.hi = t0 - (a + shift);
    } else {
      img.lo = (a + shift) - t0;
      img.hi = (b + shift) - t0;
    }
    images.push_back(img);
  }
  std::sort(images.begin(), images.end(),
            [](const SurfaceInterval& a, const SurfaceInterval& b) {
              return a.lo < b.lo;
            });
  // Merge only genuinely overlapping images; abutting intervals keep their
  // split, which records a branch boundary.
  std::vector<SurfaceInterval> merged;
  for (const auto& iv : images) {
    if (!merged.empty() && iv.lo < merged.back().hi - 1e-12)
      merged.back().hi = std::max(merged.back().hi, iv.hi);
    else
      merged.push_back(iv);
  }
  return merged;
}

}  // namespace detail

// Backward image of a constant-time region on the initial surface, for each
// chirality, split wherever the branch (wrap/jump pattern) changes.
inline Localization localize(const Geometry& g, double t0,
                             const SpacetimeRegion& region) {
  require(t0 < -g.tau, "localize: initial surface must lie below the strips");
  require(region.time >= t0, "localize: region below the initial surface");
  detail::check_on_cut(g, region.time,
                       std::clamp(0.0, region.xlo, region.xhi));
  Localization out;
  out.right = detail::localize_chirality(g, t0, region, Chirality::Right);
  out.left = detail::localize_chirality(g, t0, region, Chirality::Left);
  return out;
}

struct RegionComparison {
  bool equal = false;
  double maxDeviation = 0.0;
};

// Samples the field at matching offsets of two equal-width regions.
inline RegionComparison regions_equal(const PolitzerField& f,
                                      const SpacetimeRegion& a,
                                      const SpacetimeRegion& b,
                                      int samples = 101, double tol = 1e-9) {
  require(samples >= 2, "regions_equal: need at least two samples");
  require(std::abs(a.width() - b.width()) <= 1e-9 * (1.0 + a.width()),
          "regions_equal: regions must have equal width");
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double s = static_cast<double>(i) / (samples - 1);
    const double xa = a.xlo + s * a.width();
    const double xb = b.xlo + s * b.width();
    worst = std::max(worst, std::abs(evaluate(f, a.time, xa) -
                                     evaluate(f, b.time, xb)));
  }
  return {worst <= tol, worst};
}

// Largest deviation on the region between the strip evolution and the same
// data evolved on plain Minkowski space.
inline double minkowski_compare(const PolitzerField& f,
                                const SpacetimeRegion& region,
                                int samples = 101) {
  require(samples >= 2, "minkowski_compare: need at least two samples");
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double s = static_cast<double>(i) / (samples - 1);
    const double x = region.xlo + s * region.width();
    worst = std::max(worst, std::abs(evaluate(f, region.time, x) -
                                     evaluate_free(f, region.time, x)));
  }
  return worst;
}

// Max absolute second-order d'Alembertian residual on a sample grid.  The
// rectangle (inflated by the stencil step) must stay clear of the t = +-tau
// lines: stencils straddling a gluing mix branches and are not probing the
// equation.
inline double wave_equation_residual(const PolitzerField& f, double tlo,
                                     double thi, double xlo, double xhi,
                                     int nt, int nx, double h) {
  require(nt >= 2 && nx >= 2 && h > 0.0, "wave_equation_residual: bad grid");
  const double tau = f.geom.tau;
  const bool clear =
      std::abs(tlo - h - tau) > h && std::abs(thi + h - tau) > h &&
      std::abs(tlo - h + tau) > h && std::abs(thi + h + tau) > h &&
      ((tlo - h > tau) == (thi + h > tau)) &&
      ((tlo - h > -tau) == (thi + h > -tau));
  require(clear,
          "wave_equation_residual: stencil rectangle straddles a strip line");
  double worst = 0.0;
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < nx; ++j) {
      const double t = tlo + (thi - tlo) * i / (nt - 1);
      const double x = xlo + (xhi - xlo) * j / (nx - 1);
      const double dtt = evaluate(f, t + h, x) - 2.0 * evaluate(f, t, x) +
                         evaluate(f, t - h, x);
      const double dxx = evaluate(f, t, x + h) - 2.0 * evaluate(f, t, x) +
                         evaluate(f, t, x - h);
      worst = std::max(worst, std::abs(dtt - dxx) / (h * h));
    }
  return worst;
}

// Seeded smooth random field: a few cosine bumps per chirality, re-drawn
// until the knots clear every critical candidate.
inline PolitzerField random_field(const Geometry& g, double t0, Rng& rng,
                                  double amplitude, double coordLo,
                                  double coordHi, int bumps = 3) {
  require(coordLo < coordHi, "random_field: empty coordinate range");
  for (int attempt = 0; attempt < 64; ++attempt) {
    MoverProfile r, l;
    for (int i = 0; i < bumps; ++i) {
      const double spanR = coordHi - coordLo;
      r = r + MoverProfile::bump(coordLo + rng.uniform(0.1, 0.9) * spanR,
                                 rng.uniform(0.3, 0.9),
                                 amplitude * rng.uniform(0.2, 1.0));
      l = l + MoverProfile::bump(coordLo + rng.uniform(0.1, 0.9) * spanR,
                                 rng.uniform(0.3, 0.9),
                                 amplitude * rng.uniform(0.2, 1.0));
    }
    PolitzerField f(g, t0, std::move(r), std::move(l));
    if (is_admissible(f)) return f;
  }
  throw solver_error("random_field: could not draw admissible data");
}

}  // namespace ctclab::politzer

#endif  // CTCLAB_POLITZER_HPP
