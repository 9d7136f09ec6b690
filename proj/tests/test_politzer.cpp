// Strip-spacetime field tests.  The numeric oracles are hand-traced on the
// reference geometry tau = 1, halfLength = 5, initial surface t0 = -3:
// every wrap/jump sequence asserted below was stepped through by hand from
// the gluing rules.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "ctclab/common.hpp"
#include "ctclab/politzer.hpp"
#include "ctclab/rng.hpp"

using namespace ctclab;
using namespace ctclab::politzer;

namespace {

Geometry ref_geometry() { return Geometry(1.0, 5.0); }

constexpr double kT0 = -3.0;

// Closed-form backward wrap count for a trace that starts inside the slab:
// the first crossing of t = -tau sits at x = -tau - u and each winding
// shifts it by -2 tau, so the strip is traversed
//   floor((L - tau - u) / (2 tau)) + 1
// times while the crossing stays inside |x| <= L.
int wrap_count_oracle(const Geometry& g, double u) {
  if (u < -g.tau - g.halfLength || u > g.halfLength - g.tau) return 0;
  return static_cast<int>(
             std::floor((g.halfLength - g.tau - u) / (2.0 * g.tau))) +
         1;
}

bool near_any(double value, const std::vector<double>& set, double tol) {
  for (double s : set)
    if (std::abs(value - s) < tol) return true;
  return false;
}

PolitzerField smooth_field(double amplitude) {
  // Support chosen to cover the effective coordinates reached from the slab
  // (around 4.5 .. 6) as well as direct coordinates near the surface.
  MoverProfile r = MoverProfile::bump(4.9, 2.3, amplitude) +
                   MoverProfile::bump(-1.7, 1.9, 0.6 * amplitude);
  MoverProfile l = MoverProfile::bump(4.7, 2.1, 0.8 * amplitude) +
                   MoverProfile::bump(-1.3, 1.7, 0.5 * amplitude);
  return PolitzerField(ref_geometry(), kT0, std::move(r), std::move(l));
}

}  // namespace

TEST_CASE("profile evaluation matches the cubic Hermite form",
          "[politzer][profile]") {
  const MoverProfile p({0.0, 1.0, 3.0}, {1.0, 2.0, -1.0}, {0.5, -1.0, 0.0});
  // Inside [0,1]: p(s) = h00 y0 + h10 h m0 + h01 y1 + h11 h m1.
  const double s = 0.3, s2 = s * s, s3 = s2 * s;
  const double expected = (2 * s3 - 3 * s2 + 1) * 1.0 +
                          (s3 - 2 * s2 + s) * 0.5 +
                          (-2 * s3 + 3 * s2) * 2.0 + (s3 - s2) * (-1.0);
  CHECK(p(0.3) == Catch::Approx(expected).margin(1e-15));
  // Knots reproduce their data exactly.
  CHECK(p(0.0) == 1.0);
  CHECK(p(1.0) == 2.0);
  CHECK(p(3.0) == -1.0);
  // Constant tails.
  CHECK(p(-5.0) == 1.0);
  CHECK(p(10.0) == -1.0);
  CHECK(p.derivative(-5.0) == 0.0);
  // Derivative against a central difference.
  const double h = 1e-6;
  for (double c : {0.2, 0.7, 1.4, 2.9}) {
    const double fd = (p(c + h) - p(c - h)) / (2.0 * h);
    CHECK(p.derivative(c) == Catch::Approx(fd).margin(1e-7));
  }
}

TEST_CASE("profile addition is exact on the merged knot set",
          "[politzer][profile]") {
  const MoverProfile f = MoverProfile::bump(0.0, 2.0, 1.3, 16);
  const MoverProfile g = MoverProfile::bump(0.7, 1.1, -0.8, 12);
  const MoverProfile sum = f + g;
  Rng rng(77);
  for (int i = 0; i < 200; ++i) {
    const double c = rng.uniform(-3.0, 3.0);
    CHECK(std::abs(sum(c) - (f(c) + g(c))) < 1e-15);
    CHECK(std::abs(sum.derivative(c) - (f.derivative(c) + g.derivative(c))) <
          1e-12);
  }
  // Knots of both operands appear in the sum.
  for (double k : f.knots())
    CHECK(std::abs(sum(k) - (f(k) + g(k))) < 1e-15);
  // f + (-f) vanishes identically.
  const MoverProfile zero = f + (-f);
  CHECK(zero.is_zero_on(-10.0, 10.0, 1e-15));
  CHECK_FALSE(sum.is_zero_on(-10.0, 10.0, 1e-3));
}

TEST_CASE("profile validation rejects malformed data", "[politzer][profile]") {
  CHECK_THROWS_AS(MoverProfile({1.0, 0.5}, {0.0, 0.0}, {0.0, 0.0}),
                  contract_error);
  CHECK_THROWS_AS(MoverProfile({0.0, 1.0}, {0.0}, {0.0, 0.0}),
                  contract_error);
  CHECK_THROWS_AS(MoverProfile({0.0}, {0.0}, {0.0}), contract_error);
}

TEST_CASE("backward trace winds through the slab: hand-traced oracles",
          "[politzer][trace]") {
  const Geometry g = ref_geometry();

  SECTION("right mover from (0.9, 0): two windings") {
    const auto tr = trace_backward(g, Chirality::Right, 0.9, 0.0, kT0);
    CHECK(tr.start == Catch::Approx(0.9).margin(1e-15));
    CHECK(tr.wraps == 2);
    CHECK(tr.jumps == 0);
    CHECK(tr.effective == Catch::Approx(4.9).margin(1e-12));
    REQUIRE(tr.events.size() == 3);
    CHECK(tr.events[0].action == CrossingAction::Wrap);
    CHECK(tr.events[0].xCross == Catch::Approx(-1.9).margin(1e-12));
    CHECK(tr.events[1].action == CrossingAction::Wrap);
    CHECK(tr.events[1].xCross == Catch::Approx(-3.9).margin(1e-12));
    CHECK(tr.events[2].action == CrossingAction::Free);
    CHECK(tr.events[2].xCross == Catch::Approx(-5.9).margin(1e-12));
  }

  SECTION("right mover from (0.9, 2): same exit ray, one more winding") {
    const auto tr = trace_backward(g, Chirality::Right, 0.9, 2.0, kT0);
    CHECK(tr.start == Catch::Approx(-1.1).margin(1e-15));
    CHECK(tr.wraps == 3);
    CHECK(tr.effective == Catch::Approx(4.9).margin(1e-12));
  }

  SECTION("left movers from the same points agree on the exit ray") {
    const auto a = trace_backward(g, Chirality::Left, 0.9, 0.0, kT0);
    CHECK(a.wraps == 2);
    CHECK(a.effective == Catch::Approx(4.9).margin(1e-12));
    const auto b = trace_backward(g, Chirality::Left, 0.9, 2.0, kT0);
    CHECK(b.wraps == 1);
    CHECK(b.effective == Catch::Approx(4.9).margin(1e-12));
    // Left windings march rightward: crossings at 1.9 then 3.9.
    REQUIRE(a.events.size() == 3);
    CHECK(a.events[0].xCross == Catch::Approx(1.9).margin(1e-12));
    CHECK(a.events[1].xCross == Catch::Approx(3.9).margin(1e-12));
  }

  SECTION("point above the strips jumps under the slab") {
    // u = 1.2 - (-1.3) = 2.5; crossing t = +1 at x = 1 - 2.5 = -1.5 lies
    // inside the strip, so the trace reappears under t = -1 with u = 0.5.
    const auto tr = trace_backward(g, Chirality::Right, 1.2, -1.3, kT0);
    CHECK(tr.start == Catch::Approx(2.5).margin(1e-15));
    CHECK(tr.wraps == 0);
    CHECK(tr.jumps == 1);
    CHECK(tr.effective == Catch::Approx(0.5).margin(1e-12));
    REQUIRE(tr.events.size() == 1);
    CHECK(tr.events[0].action == CrossingAction::Jump);
    CHECK(tr.events[0].line == Catch::Approx(1.0));
    CHECK(tr.events[0].xCross == Catch::Approx(-1.5).margin(1e-12));
  }

  SECTION("point below both strips traces freely") {
    const auto tr = trace_backward(g, Chirality::Right, -1.5, 0.7, kT0);
    CHECK(tr.wraps == 0);
    CHECK(tr.jumps == 0);
    CHECK(tr.events.empty());
    CHECK(tr.effective == Catch::Approx(-2.2).margin(1e-15));
  }
}

TEST_CASE("slab wrap count matches the closed form", "[politzer][trace]") {
  const Geometry g = ref_geometry();
  const auto criticals = critical_candidates(g, -11.0, 11.0);
  Rng rng(901);
  int checked = 0;
  while (checked < 400) {
    const double u = rng.uniform(-10.0, 10.0);
    if (near_any(u, criticals, 1e-4)) continue;
    const double t = 0.5;  // inside the slab
    const auto tr = trace_backward(g, Chirality::Right, t, t - u, kT0);
    CHECK(tr.wraps == wrap_count_oracle(g, u));
    CHECK(tr.jumps == 0);
    CHECK(tr.effective ==
          Catch::Approx(u + 2.0 * g.tau * tr.wraps).margin(1e-12));
    ++checked;
  }
  // Left movers follow the same count by mirror symmetry.
  checked = 0;
  while (checked < 200) {
    const double v = rng.uniform(-10.0, 10.0);
    if (near_any(v, criticals, 1e-4)) continue;
    const auto tr = trace_backward(g, Chirality::Left, 0.5, v - 0.5, kT0);
    CHECK(tr.wraps == wrap_count_oracle(g, v));
    ++checked;
  }
}

TEST_CASE("points above the strips jump exactly when the crossing is "
          "covered",
          "[politzer][trace]") {
  const Geometry g = ref_geometry();
  const auto criticals = critical_candidates(g, -16.0, 16.0);
  Rng rng(902);
  int checked = 0;
  while (checked < 300) {
    const double u = rng.uniform(-12.0, 12.0);
    if (near_any(u, criticals, 1e-4)) continue;
    const double t = 2.3;
    const auto tr = trace_backward(g, Chirality::Right, t, t - u, kT0);
    const double xc = g.tau - u;  // crossing position on t = +tau
    if (std::abs(xc) <= g.halfLength) {
      CHECK(tr.jumps == 1);
      CHECK(tr.wraps == 0);
      CHECK(tr.effective == Catch::Approx(u - 2.0 * g.tau).margin(1e-12));
    } else {
      CHECK(tr.jumps == 0);
      CHECK(tr.wraps == wrap_count_oracle(g, u));
    }
    ++checked;
  }
}

TEST_CASE("forward tracing inverts backward tracing above the strips",
          "[politzer][trace]") {
  // A winding characteristic visits slab-level times repeatedly and
  // trace_forward stops at the first visit, so inversion is only sharp for
  // targets above both strips, where every crossing has been processed.
  const Geometry g = ref_geometry();
  const auto criticals = critical_candidates(g, -20.0, 20.0);
  Rng rng(903);
  for (double t1 : {1.9, 2.6, -1.4}) {
    int checked = 0;
    while (checked < 100) {
      const double x = rng.uniform(-9.0, 9.0);
      const double u = t1 - x;
      const double v = t1 + x;
      if (near_any(u, criticals, 1e-4) || near_any(v, criticals, 1e-4))
        continue;
      const auto back = trace_backward(g, Chirality::Right, t1, x, kT0);
      const auto fwd = trace_forward(g, Chirality::Right, kT0,
                                     kT0 - back.effective, t1);
      CHECK(fwd.effective == Catch::Approx(u).margin(1e-12));
      CHECK(fwd.wraps == back.wraps);
      CHECK(fwd.jumps == back.jumps);
      const auto backL = trace_backward(g, Chirality::Left, t1, x, kT0);
      const auto fwdL = trace_forward(g, Chirality::Left, kT0,
                                      backL.effective - kT0, t1);
      CHECK(fwdL.effective == Catch::Approx(v).margin(1e-12));
      ++checked;
    }
  }
}

TEST_CASE("forward tracing to a slab level stops at the first visit",
          "[politzer][trace]") {
  const Geometry g = ref_geometry();
  // The backward trace from (0.9, 0) exits on u_eff = 4.9 at x0 = -7.9.
  // Forward from there, the characteristic first reaches level t = 0.9
  // still on its first pass (u = 4.9, i.e. at x = -4); the original point
  // (0.9, 0) is a later visit of the same winding ray, so both share the
  // field value.
  const auto fwd = trace_forward(g, Chirality::Right, kT0, -7.9, 0.9);
  CHECK(fwd.effective == Catch::Approx(4.9).margin(1e-12));
  CHECK(fwd.wraps == 0);
  const auto later = trace_backward(g, Chirality::Right, 0.9, -4.0, kT0);
  CHECK(later.effective == Catch::Approx(4.9).margin(1e-12));
  CHECK(later.wraps == 0);
}

TEST_CASE("explicit forward jump oracle", "[politzer][trace]") {
  const Geometry g = ref_geometry();
  // From (-3, -3.5): u = 0.5; crossing t = -1 at x = -1.5 is covered, so the
  // ray reappears above t = +1 with u = 2.5.
  const auto tr = trace_forward(g, Chirality::Right, -3.0, -3.5, 1.2);
  CHECK(tr.jumps == 1);
  CHECK(tr.wraps == 0);
  CHECK(tr.effective == Catch::Approx(2.5).margin(1e-15));
  REQUIRE(tr.events.size() == 1);
  CHECK(tr.events[0].xCross == Catch::Approx(-1.5).margin(1e-12));
}

TEST_CASE("grazing characteristics raise critical_ray_error",
          "[politzer][trace]") {
  const Geometry g = ref_geometry();
  // u = -6 crosses t = -1 exactly at x = +5, the strip endpoint.
  CHECK_THROWS_AS(trace_backward(g, Chirality::Right, 0.5, 6.5, kT0),
                  critical_ray_error);
  // Within the grazing tolerance on either side.
  CHECK_THROWS_AS(
      trace_backward(g, Chirality::Right, 0.5, 6.5 - 5e-7, kT0),
      critical_ray_error);
  CHECK_THROWS_AS(
      trace_backward(g, Chirality::Right, 0.5, 6.5 + 5e-7, kT0),
      critical_ray_error);
  // Clearly outside the tolerance: passes freely beside the strip.
  const auto tr =
      trace_backward(g, Chirality::Right, 0.5, 6.5 + 2e-6, kT0);
  CHECK(tr.wraps == 0);
  // A later winding can graze too: u = 0 reaches x = -5 on its third
  // crossing.
  CHECK_THROWS_AS(trace_backward(g, Chirality::Right, 0.5, 0.5, kT0),
                  critical_ray_error);
}

TEST_CASE("evaluation on a removed strip is ambiguous", "[politzer][trace]") {
  const Geometry g = ref_geometry();
  const PolitzerField f = smooth_field(1.0);
  CHECK_THROWS_AS(evaluate(f, 1.0, 0.0), ambiguity_error);
  CHECK_THROWS_AS(evaluate(f, -1.0, 3.0), ambiguity_error);
  CHECK_THROWS_AS(evaluate(f, 1.0, -4.999999), ambiguity_error);
  // On the line but beyond the strip: regular point.
  CHECK_NOTHROW(evaluate(f, 1.0, 6.0));
  // Below the initial surface: contract violation.
  CHECK_THROWS_AS(evaluate(f, -3.5, 0.0), contract_error);
  CHECK_THROWS_AS(trace_backward(g, Chirality::Right, 0.0, 0.0, 0.5),
                  contract_error);
  CHECK_THROWS_AS(trace_forward(g, Chirality::Right, 0.0, 0.0, -0.5),
                  contract_error);
}

TEST_CASE("evaluation composes the traced profiles", "[politzer][field]") {
  const PolitzerField f = smooth_field(1.0);
  // Slab point (0.9, 0): both chiralities exit on coordinate 4.9.
  CHECK(evaluate(f, 0.9, 0.0) ==
        Catch::Approx(f.xiR(4.9) + f.xiL(4.9)).margin(1e-12));
  // The value is genuinely nonzero there (support was chosen to cover 4.9).
  CHECK(std::abs(evaluate(f, 0.9, 0.0)) > 1e-2);
  // Below the slab the evolution is the free one.
  CHECK(evaluate(f, -2.0, 0.3) ==
        Catch::Approx(f.xiR(-2.3) + f.xiL(-1.7)).margin(1e-14));
  CHECK(evaluate(f, -2.0, 0.3) ==
        Catch::Approx(evaluate_free(f, -2.0, 0.3)).margin(1e-14));
  // Above the strips, over the covered window, the field is the initial
  // data displaced by one full period 2 tau in both null coordinates.
  for (double x : {-1.2, 0.3, 1.1}) {
    const double t = 1.3;
    const double expected =
        f.xiR((t - 2.0) - x) + f.xiL((t - 2.0) + x);
    CHECK(evaluate(f, t, x) == Catch::Approx(expected).margin(1e-10));
  }
}

TEST_CASE("rim mismatch equals the profile increment over exactly 2 eps",
          "[politzer][rim]") {
  const PolitzerField f = smooth_field(1.0);
  const double eps = 1e-4;

  SECTION("outer seam") {
    for (double x : {-2.3, -0.7, 0.4, 1.9, 3.6}) {
      // Lower partner (-tau - eps, x): free coordinates.
      const double u = -1.0 - eps - x;
      const double v = -1.0 - eps + x;
      const double expected = std::abs(
          (f.xiR(u + 2.0 * eps) - f.xiR(u)) +
          (f.xiL(v + 2.0 * eps) - f.xiL(v)));
      CHECK(rim_mismatch(f, x, eps, true) ==
            Catch::Approx(expected).margin(1e-12));
    }
  }

  SECTION("inner seam") {
    for (double x : {-0.7, 0.4, 1.9}) {
      const auto r =
          trace_backward(f.geom, Chirality::Right, 1.0 - eps, x, kT0);
      const auto l =
          trace_backward(f.geom, Chirality::Left, 1.0 - eps, x, kT0);
      const double expected = std::abs(
          (f.xiR(r.effective + 2.0 * eps) - f.xiR(r.effective)) +
          (f.xiL(l.effective + 2.0 * eps) - f.xiL(l.effective)));
      CHECK(rim_mismatch(f, x, eps, false) ==
            Catch::Approx(expected).margin(1e-12));
    }
  }

  SECTION("mismatch scales linearly and is not trivially zero") {
    const double m1 = rim_mismatch(f, 0.4, 1e-4, false);
    const double m2 = rim_mismatch(f, 0.4, 1e-5, false);
    CHECK(m1 > 1e-6);  // genuine sensitivity at unit amplitude
    CHECK(m2 > 0.0);
    CHECK(m1 / m2 == Catch::Approx(10.0).epsilon(0.05));
  }

  SECTION("small-amplitude data keeps the seams tight") {
    const PolitzerField tiny = smooth_field(1e-5);
    for (double x : {-3.1, -1.2, 0.8, 2.7}) {
      CHECK(rim_mismatch(tiny, x, 1e-6, true) < 1e-9);
      CHECK(rim_mismatch(tiny, x, 1e-6, false) < 1e-9);
    }
  }
}

TEST_CASE("horizontal 2 tau translates inside the slab carry the same field",
          "[politzer][region]") {
  const PolitzerField f = smooth_field(1.0);
  const SpacetimeRegion a(0.9, -0.4, 0.4);
  const SpacetimeRegion b(0.9, 1.6, 2.4);  // shifted by 2 tau = 2

  const auto cmp = regions_equal(f, a, b, 101, 1e-9);
  CHECK(cmp.equal);
  CHECK(cmp.maxDeviation < 1e-9);

  // Control: a shift by tau (half the period) is not a symmetry.
  const SpacetimeRegion c(0.9, 0.6, 1.4);
  const auto bad = regions_equal(f, a, c, 101, 1e-9);
  CHECK_FALSE(bad.equal);
  CHECK(bad.maxDeviation > 1e-3);

  // Width mismatch is a contract violation.
  const SpacetimeRegion wide(0.9, -1.0, 1.0);
  CHECK_THROWS_AS(regions_equal(f, a, wide), contract_error);
}

TEST_CASE("critical candidate enumeration", "[politzer][localize]") {
  const Geometry g = ref_geometry();
  // Base rays: -tau-L, -tau+L, tau-L, tau+L = -6, 4, -4, 6; all 2 tau
  // translates are the even integers.
  const auto base = base_critical_coordinates(g);
  CHECK(base[0] == -6.0);
  CHECK(base[1] == 4.0);
  CHECK(base[2] == -4.0);
  CHECK(base[3] == 6.0);
  const auto cand = critical_candidates(g, -0.5, 6.5);
  REQUIRE(cand.size() == 4);
  CHECK(cand[0] == Catch::Approx(0.0).margin(1e-12));
  CHECK(cand[1] == Catch::Approx(2.0).margin(1e-12));
  CHECK(cand[2] == Catch::Approx(4.0).margin(1e-12));
  CHECK(cand[3] == Catch::Approx(6.0).margin(1e-12));
  CHECK(critical_candidates(g, 0.5, 1.3).empty());
}

TEST_CASE("localization of a single-branch slab region",
          "[politzer][localize]") {
  const Geometry g = ref_geometry();
  const auto loc = localize(g, kT0, SpacetimeRegion(0.9, -0.4, 0.4));
  // u in [0.5, 1.3], uniformly two windings: u_eff in [4.5, 5.3], surface
  // x = t0 - u_eff in [-8.3, -7.5].
  REQUIRE(loc.right.size() == 1);
  CHECK(loc.right[0].lo == Catch::Approx(-8.3).margin(1e-9));
  CHECK(loc.right[0].hi == Catch::Approx(-7.5).margin(1e-9));
  // v in [0.5, 1.3] with the same shift: surface x = v_eff - t0 in
  // [7.5, 8.3].
  REQUIRE(loc.left.size() == 1);
  CHECK(loc.left[0].lo == Catch::Approx(7.5).margin(1e-9));
  CHECK(loc.left[0].hi == Catch::Approx(8.3).margin(1e-9));
}

TEST_CASE("localization splits at critical rays and merges overlaps",
          "[politzer][localize]") {
  const Geometry g = ref_geometry();
  // u in [-0.3, 2.1] crosses the critical rays u = 0 and u = 2; the three
  // branches carry 3, 2 and 1 windings and their surface images
  // [-9,-8.7], [-9,-7] and [-7.1,-7] overlap pairwise into one interval.
  const auto loc = localize(g, kT0, SpacetimeRegion(0.9, -1.2, 1.2));
  REQUIRE(loc.right.size() == 1);
  CHECK(loc.right[0].lo == Catch::Approx(-9.0).margin(1e-9));
  CHECK(loc.right[0].hi == Catch::Approx(-7.0).margin(1e-9));
  REQUIRE(loc.left.size() == 1);
  CHECK(loc.left[0].lo == Catch::Approx(7.0).margin(1e-9));
  CHECK(loc.left[0].hi == Catch::Approx(9.0).margin(1e-9));
}

TEST_CASE("localizing a surface region is the identity",
          "[politzer][localize]") {
  const Geometry g = ref_geometry();
  const auto loc = localize(g, kT0, SpacetimeRegion(kT0, -8.3, -7.5));
  REQUIRE(loc.right.size() == 1);
  CHECK(loc.right[0].lo == Catch::Approx(-8.3).margin(1e-12));
  CHECK(loc.right[0].hi == Catch::Approx(-7.5).margin(1e-12));
  REQUIRE(loc.left.size() == 1);
  CHECK(loc.left[0].lo == Catch::Approx(-8.3).margin(1e-12));
  CHECK(loc.left[0].hi == Catch::Approx(-7.5).margin(1e-12));
}

TEST_CASE("localization below the strips is the free null projection",
          "[politzer][localize]") {
  const Geometry g = ref_geometry();
  const auto loc = localize(g, kT0, SpacetimeRegion(-2.0, 0.0, 1.0));
  REQUIRE(loc.right.size() == 1);
  CHECK(loc.right[0].lo == Catch::Approx(-1.0).margin(1e-12));
  CHECK(loc.right[0].hi == Catch::Approx(0.0).margin(1e-12));
  // Left movers travel toward -x, so their surface source is displaced by
  // +Delta t.
  REQUIRE(loc.left.size() == 1);
  CHECK(loc.left[0].lo == Catch::Approx(1.0).margin(1e-12));
  CHECK(loc.left[0].hi == Catch::Approx(2.0).margin(1e-12));
  // A region sitting on a removed strip cannot be localized.
  CHECK_THROWS_AS(localize(g, kT0, SpacetimeRegion(1.0, -0.5, 0.5)),
                  ambiguity_error);
}

TEST_CASE("Cauchy data splits into movers and recomposes",
          "[politzer][split]") {
  const double T = kT0;
  const double amplitudeR = 0.7, amplitudeL = 0.3;
  auto trueR = [&](double u) { return amplitudeR * std::exp(-u * u); };
  auto trueRp = [&](double u) { return -2.0 * u * trueR(u); };
  auto trueL = [&](double v) {
    return amplitudeL * std::exp(-(v - 0.5) * (v - 0.5) / 0.8);
  };
  auto trueLp = [&](double v) {
    return -2.0 * (v - 0.5) / 0.8 * trueL(v);
  };

  CauchyData data;
  data.surfaceT = T;
  data.xlo = -12.0;
  data.spacing = 1e-3;
  const int n = 24001;
  data.phi.resize(n);
  data.pi.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = data.xlo + data.spacing * i;
    data.phi[i] = trueR(T - x) + trueL(T + x);
    data.pi[i] = trueRp(T - x) + trueLp(T + x);
  }

  const auto [xiR, xiL] = split_movers(data);

  SECTION("reconstructed profiles match the analytic movers") {
    Rng rng(55);
    for (int i = 0; i < 200; ++i) {
      const double c = rng.uniform(-4.0, 4.0);
      CHECK(xiR(c) == Catch::Approx(trueR(c)).margin(1e-8));
      CHECK(xiL(c) == Catch::Approx(trueL(c)).margin(1e-8));
    }
  }

  SECTION("on-surface recomposition returns the data") {
    for (int i = 100; i < n - 100; i += 37) {
      const double x = data.xlo + data.spacing * i;
      CHECK(xiR(T - x) + xiL(T + x) ==
            Catch::Approx(data.phi[i]).margin(1e-8));
    }
  }
}

TEST_CASE("splitting nonzero-mean momentum produces cancelling tails",
          "[politzer][split]") {
  const double T = kT0;
  CauchyData data;
  data.surfaceT = T;
  data.xlo = -10.0;
  data.spacing = 1e-3;
  const int n = 20001;
  data.phi.assign(n, 0.0);
  data.pi.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = data.xlo + data.spacing * i;
    data.pi[i] = std::exp(-x * x);  // integral sqrt(pi) != 0
  }
  const auto [xiR, xiL] = split_movers(data);
  const double half = std::sqrt(kPi) / 2.0;
  // Equal and opposite constant tails...
  CHECK(xiR.values().back() == Catch::Approx(half).margin(1e-8));
  CHECK(xiR.values().front() == Catch::Approx(0.0).margin(1e-12));
  CHECK(xiL.values().front() == Catch::Approx(-half).margin(1e-8));
  CHECK(xiL.values().back() == Catch::Approx(0.0).margin(1e-12));
  // ...which cancel in the on-surface recomposition.
  for (double x : {-9.0, -4.0, -1.0, 0.0, 0.7, 3.0, 8.5}) {
    CHECK(std::abs(xiR(T - x) + xiL(T + x)) < 1e-8);
  }
}

TEST_CASE("discrete d'Alembertian vanishes to roundoff",
          "[politzer][wave]") {
  const PolitzerField f = smooth_field(1.0);
  // Slab rectangle; grid offsets keep every stencil ray clear of critical
  // coordinates.
  const double slab = wave_equation_residual(f, -0.5, 0.5, -2.03, 1.97, 11,
                                             41, 1e-3);
  CHECK(slab < 1e-8);
  // Above the strips.
  const double above = wave_equation_residual(f, 1.48, 2.48, -2.03, 1.97,
                                              11, 41, 1e-3);
  CHECK(above < 1e-8);
  // A rectangle straddling a strip line is rejected.
  CHECK_THROWS_AS(
      wave_equation_residual(f, 0.5, 1.5, -2.0, 2.0, 5, 5, 1e-3),
      contract_error);
}

TEST_CASE("symplectic form: antisymmetry, chirality decoupling, "
          "bilinearity",
          "[politzer][symplectic]") {
  const Geometry g = ref_geometry();
  Rng rng(321);
  const PolitzerField f = random_field(g, kT0, rng, 0.5, -2.0, 2.0, 2);
  const PolitzerField h = random_field(g, kT0, rng, 0.5, -2.0, 2.0, 2);

  const double sff = symplectic_form(f, f, kT0);
  CHECK(std::abs(sff) < 1e-10);

  const double sfh = symplectic_form(f, h, kT0);
  const double shf = symplectic_form(h, f, kT0);
  CHECK(std::abs(sfh + shf) < 1e-9);
  CHECK(std::abs(sfh) > 1e-6);  // generic pair: the form does not vanish

  // Right movers and left movers never couple: the integrand is a total
  // derivative of a compactly supported product.
  const PolitzerField pureR(g, kT0, MoverProfile::bump(0.1, 1.5, 0.8),
                            MoverProfile{});
  const PolitzerField pureL(g, kT0, MoverProfile{},
                            MoverProfile::bump(0.3, 1.2, 0.5));
  CHECK(std::abs(symplectic_form(pureR, pureL, kT0)) < 1e-8);

  // Bilinearity in the second slot.
  const PolitzerField sum(g, kT0, h.xiR + pureR.xiR, h.xiL + pureR.xiL);
  const double lhs = symplectic_form(f, sum, kT0);
  const double rhs = symplectic_form(f, h, kT0) +
                     symplectic_form(f, pureR, kT0);
  CHECK(lhs == Catch::Approx(rhs).margin(1e-9));
}

TEST_CASE("symplectic form is independent of the evaluation surface",
          "[politzer][symplectic]") {
  const Geometry g = ref_geometry();
  Rng rng(322);
  const PolitzerField f = random_field(g, kT0, rng, 0.5, -2.0, 2.0, 2);
  const PolitzerField h = random_field(g, kT0, rng, 0.5, -2.0, 2.0, 2);
  const double below = symplectic_form(f, h, kT0);
  const double nearStrip = symplectic_form(f, h, -1.5);
  const double above = symplectic_form(f, h, 2.5);
  CHECK(nearStrip == Catch::Approx(below).margin(1e-8));
  CHECK(above == Catch::Approx(below).margin(1e-8));
}

TEST_CASE("Weyl elements compose with the symplectic phase",
          "[politzer][weyl]") {
  const Geometry g = ref_geometry();
  Rng rng(323);
  const WeylElement w1{random_field(g, kT0, rng, 0.4, -2.0, 2.0, 2)};
  const WeylElement w2{random_field(g, kT0, rng, 0.4, -2.0, 2.0, 2)};
  const WeylElement w3{random_field(g, kT0, rng, 0.4, -2.0, 2.0, 2)};

  SECTION("product carries exp(i sigma / 2) and the exact profile sum") {
    const auto p = weyl_multiply(w1, w2, kT0);
    const double s = symplectic_form(w1.field, w2.field, kT0);
    CHECK(std::abs(p.phase - std::exp(cplx(0.0, s / 2.0))) < 1e-10);
    const MoverProfile diffR =
        p.field.xiR + (-(w1.field.xiR + w2.field.xiR));
    const MoverProfile diffL =
        p.field.xiL + (-(w1.field.xiL + w2.field.xiL));
    CHECK(diffR.is_zero_on(-30.0, 30.0, 1e-12));
    CHECK(diffL.is_zero_on(-30.0, 30.0, 1e-12));
  }

  SECTION("exchanging the factors costs exp(i sigma)") {
    const auto p12 = weyl_multiply(w1, w2, kT0);
    const auto p21 = weyl_multiply(w2, w1, kT0);
    const double s = symplectic_form(w1.field, w2.field, kT0);
    CHECK(std::abs(p12.phase * std::conj(p21.phase) -
                   std::exp(cplx(0.0, s))) < 1e-9);
  }

  SECTION("associativity of the phase") {
    const auto left = weyl_multiply(weyl_multiply(w1, w2, kT0), w3, kT0);
    const auto right = weyl_multiply(w1, weyl_multiply(w2, w3, kT0), kT0);
    CHECK(std::abs(left.phase - right.phase) < 1e-9);
    const MoverProfile diff = left.field.xiR + (-right.field.xiR);
    CHECK(diff.is_zero_on(-30.0, 30.0, 1e-12));
  }

  SECTION("inverse element cancels to the identity") {
    const WeylElement inv{
        PolitzerField(g, kT0, -w1.field.xiR, -w1.field.xiL)};
    const auto p = weyl_multiply(w1, inv, kT0);
    CHECK(std::abs(p.phase - cplx(1.0, 0.0)) < 1e-10);
    CHECK(p.field.xiR.is_zero_on(-30.0, 30.0, 1e-12));
    CHECK(p.field.xiL.is_zero_on(-30.0, 30.0, 1e-12));
  }
}

TEST_CASE("far from the strips the evolution is indistinguishable from "
          "Minkowski space",
          "[politzer][region]") {
  const PolitzerField f = smooth_field(1.0);
  // Below both strips: identical by construction.
  CHECK(minkowski_compare(f, SpacetimeRegion(-2.0, -3.0, 3.0)) < 1e-14);
  // Above the strips but far to the side: all crossings miss the strips.
  CHECK(minkowski_compare(f, SpacetimeRegion(1.5, 20.0, 24.0)) < 1e-14);
  // Inside the slab the histories differ at order one.
  CHECK(minkowski_compare(f, SpacetimeRegion(0.5, -1.003, 0.997)) > 1e-3);
}

TEST_CASE("admissibility keeps knots clear of critical rays",
          "[politzer][field]") {
  const Geometry g = ref_geometry();
  CHECK(is_admissible(smooth_field(1.0)));
  // bump(0, 1) has a knot exactly on the critical ray u = 0.
  const PolitzerField bad(g, kT0, MoverProfile::bump(0.0, 1.0, 1.0),
                          MoverProfile{});
  CHECK_FALSE(is_admissible(bad));
  Rng rng(41);
  for (int i = 0; i < 5; ++i)
    CHECK(is_admissible(random_field(g, kT0, rng, 1.0, -2.0, 2.0)));
}

TEST_CASE("geometry and field validation", "[politzer][field]") {
  CHECK_THROWS_AS(Geometry(-1.0, 5.0), contract_error);
  CHECK_THROWS_AS(Geometry(1.0, 0.0), contract_error);
  CHECK_THROWS_AS(Geometry(1.0, 5.0, 2.0), contract_error);
  CHECK_THROWS_AS(
      PolitzerField(ref_geometry(), -0.5, MoverProfile{}, MoverProfile{}),
      contract_error);
  CHECK_THROWS_AS(SpacetimeRegion(0.0, 2.0, 1.0), contract_error);
}
