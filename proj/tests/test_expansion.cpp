#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "droplet/actions.hpp"
#include "droplet/errors.hpp"
#include "droplet/expansion.hpp"
#include "droplet/geometry.hpp"
#include "droplet/specfun.hpp"

using namespace droplet;

namespace {

// Largest a for which the annular phase holds at fixed (c, tau), by bisection
// on the classifier.
double annular_boundary_a(double c, double tau) {
  double lo = 1e-3, hi = 8.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (classify_phase({mid, c, tau}).regime == Regime::I)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("weighted equilibrium energy at reference points") {
  CHECK(energy({0.0, 0.0, 0.0}) == 0.75);
  // Unit charge at the center: 9/4 - 2 log 2.
  CHECK(energy({0.0, 1.0, 0.0}) == doctest::Approx(2.25 - 2.0 * std::log(2.0)).epsilon(1e-15));
  // Zero charge makes the energy potential-independent even in the simply
  // connected phase.
  ModelParams far{2.15, 0.0, 0.3};
  REQUIRE(classify_phase(far).regime == Regime::II);
  CHECK(energy(far) == 0.75);
  CHECK(energy({5.0, 0.0, 0.6}) == 0.75);
}

TEST_CASE("energy with a forced phase label dispatches on the label") {
  const ExteriorMap ell = ellipse_map(1.0, 0.0);
  ModelParams p{0.1, 1.0, 0.0};
  CHECK(energy(p, PhaseLabel{Regime::I, {}}, ell) == energy(p));
  CHECK_THROWS_AS(energy(p, PhaseLabel{Regime::III, {}}, ell), PhaseError);
}

TEST_CASE("energy rejects disconnected droplets") {
  ModelParams split{0.0, 1.0, 0.8};
  REQUIRE(classify_phase(split).regime == Regime::III);
  CHECK_THROWS_AS(energy(split), PhaseError);
}

TEST_CASE("entropy coefficient") {
  CHECK(entropy_coefficient({0.0, 0.0, 0.0}) ==
        doctest::Approx(kHalfLog2Pi - 1.0).epsilon(1e-15));
  CHECK(entropy_coefficient({0.3, 1.0, 0.6}) ==
        doctest::Approx(kHalfLog2Pi - 1.0 + 0.5 * std::log(0.64)).epsilon(1e-14));
  // Strictly decreasing in the asymmetry.
  double prev = entropy_coefficient({0.0, 0.0, 0.0});
  for (double tau = 0.1; tau < 0.95; tau += 0.1) {
    const double v = entropy_coefficient({0.0, 0.0, tau});
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("expansion coefficients in the annular phase") {
  ModelParams p{0.1, 1.0, 0.2};
  const auto rep = expansion_coefficients(p, 5);
  CHECK(rep.C2 == 0.5);
  CHECK(rep.C4 == 0.5);
  CHECK(rep.chi == 0);
  CHECK(rep.C1 == -energy(p));
  CHECK(rep.C3 == entropy_coefficient(p));
  CHECK(rep.liouville ==
        doctest::Approx(2.0 * std::log(0.5)).epsilon(1e-14));
  // No genus contribution: C5 carries only log(2pi)/2 and the action term.
  CHECK(rep.C5 ==
        doctest::Approx(kHalfLog2Pi + std::log(0.5) / 12.0).epsilon(1e-14));
  REQUIRE(rep.tail.size() == 5);
  CHECK(rep.tail[0].first == 1);
  CHECK(rep.tail[0].second == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
  CHECK(rep.tail[1].second == doctest::Approx(1.0 / 320.0).epsilon(1e-14));
  CHECK(rep.tail[2].second == doctest::Approx(-1.0 / 360.0).epsilon(1e-14));
  CHECK(rep.tail[3].second == doctest::Approx(-15.0 / 16128.0).epsilon(1e-13));
  CHECK(rep.tail[4].second == doctest::Approx(1.0 / 1260.0).epsilon(1e-14));
}

TEST_CASE("tail signs alternate in pairs at unit charge") {
  const auto rep = expansion_coefficients({0.1, 1.0, 0.2}, 8);
  REQUIRE(rep.tail.size() == 8);
  // Pattern + + - - + + - - from the Bernoulli signs and the 2^{-k}-1 factor.
  const int sign[8] = {+1, +1, -1, -1, +1, +1, -1, -1};
  for (int k = 0; k < 8; ++k) {
    INFO("k=", k + 1);
    CHECK(sign[k] * rep.tail[k].second > 0.0);
  }
}

TEST_CASE("odd tail coefficients do not depend on the charge") {
  const auto r1 = expansion_coefficients({0.1, 1.0, 0.2}, 3);
  const auto r2 = expansion_coefficients({0.05, 0.4, 0.1}, 3);
  CHECK(r1.tail[0].second == r2.tail[0].second);
  CHECK(r1.tail[2].second == r2.tail[2].second);
  // Even coefficients do.
  CHECK(r1.tail[1].second != r2.tail[1].second);
}

TEST_CASE("expansion coefficients in the simply connected phase") {
  ModelParams p{4.0, 1.0, 0.3};
  REQUIRE(classify_phase(p).regime == Regime::II);
  const auto rep = expansion_coefficients(p, 4);
  CHECK(rep.C2 == 0.5);
  CHECK(rep.C4 == doctest::Approx(5.0 / 12.0).epsilon(1e-15));
  CHECK(rep.chi == 1);
  CHECK(rep.tail.empty());
  const auto lr = liouville_report(p);
  CHECK(rep.liouville == doctest::Approx(lr.explicit_formula).epsilon(1e-13));
  CHECK(rep.C5 == doctest::Approx(kZetaPrimeMinusOne + kHalfLog2Pi +
                                  rep.liouville / 24.0 +
                                  boundary_entropy_term(p, 1))
                      .epsilon(1e-13));
}

TEST_CASE("zero-charge coefficients reduce to the elliptic ensemble") {
  ModelParams p{0.0, 0.0, 0.55};
  const auto rep = expansion_coefficients(p, 6);
  CHECK(rep.C1 == -0.75);
  CHECK(rep.C4 == doctest::Approx(5.0 / 12.0).epsilon(1e-15));
  CHECK(rep.chi == 1);
  CHECK(rep.tail.empty());
  CHECK(rep.liouville == doctest::Approx(-2.0 * std::log1p(-0.55 * 0.55)).epsilon(1e-14));
  // The action and genus boundary terms cancel exactly, leaving a
  // tau-independent constant.
  CHECK(rep.C5 == kZetaPrimeMinusOne + kHalfLog2Pi);
}

TEST_CASE("expansion guards") {
  CHECK_THROWS_AS(expansion_coefficients({0.1, 1.0, 0.2}, -1), DomainError);
  ModelParams split{0.0, 1.0, 0.8};
  CHECK_THROWS_AS(expansion_coefficients(split, 2), PhaseError);
  // Within 1e-6 of the phase boundary the report is refused.
  const double astar = std::sqrt(2.0) - 1.0;
  CHECK_THROWS_AS(expansion_coefficients({astar - 1e-8, 1.0, 0.0}, 2),
                  NearCriticalError);
  CHECK_NOTHROW(expansion_coefficients({astar - 1e-5, 1.0, 0.0}, 2));
}

TEST_CASE("leading coefficient is continuous across the phase transition") {
  // The annular formula, continued across the critical line, must agree with
  // the simply connected formula just inside the other phase.
  const double cs[5] = {0.5, 1.0, 2.0, 1.0, 0.25};
  const double ts[5] = {0.0, 0.0, 0.0, 0.1, 0.05};
  const ExteriorMap dummy = ellipse_map(1.0, 0.0);
  for (int i = 0; i < 5; ++i) {
    INFO("c=", cs[i], " tau=", ts[i]);
    const double astar = annular_boundary_a(cs[i], ts[i]);
    if (ts[i] == 0.0) {
      // Rotationally symmetric case: the critical line is explicit.
      CHECK(astar == doctest::Approx(std::sqrt(1.0 + cs[i]) - std::sqrt(cs[i]))
                         .epsilon(1e-10));
    }
    ModelParams pr{astar + 1e-4, cs[i], ts[i]};
    REQUIRE(classify_phase(pr).regime == Regime::II);
    const double e_simply = energy(pr);
    const double e_continued = energy(pr, PhaseLabel{Regime::I, {}}, dummy);
    CHECK(std::fabs(e_simply - e_continued) < 1e-6);
  }
}

TEST_CASE("energy and action limits for a distant charge") {
  // As the insertion recedes, the action tends to the elliptic value and the
  // renormalized energy to 3/4, both at an O(1/a) rate or better.
  double d1[3], d2[3];
  const double as[3] = {20.0, 40.0, 80.0};
  for (int i = 0; i < 3; ++i) {
    ModelParams p{as[i], 1.0, 0.3};
    REQUIRE(classify_phase(p).regime == Regime::II);
    const auto rep = expansion_coefficients(p, 0);
    d1[i] = std::fabs(rep.liouville + 2.0 * std::log1p(-0.09));
    d2[i] = std::fabs(-rep.C1 + 2.0 * std::log(as[i]) - 0.75);
  }
  for (int i = 0; i + 1 < 3; ++i) {
    const double rate = std::log2(d1[i] / d1[i + 1]);
    CHECK(rate >= 1.0);
    const double rate2 = std::log2(d2[i] / d2[i + 1]);
    CHECK(rate2 >= 1.0);
  }
  CHECK(d1[2] < 1e-7);
  CHECK(d2[2] < 2e-4);
}

TEST_CASE("reference free energies match an independent high-precision oracle") {
  ModelParams unit{0.0, 1.0, 0.0};
  CHECK(log_z_reference(ReferenceKind::induced, 12, unit) ==
        doctest::Approx(-108.3263156116292008).epsilon(1e-14));
  CHECK(std::fabs(log_z_reference(ReferenceKind::induced, 100, unit) -
                  (-8411.7394311770235778)) < 2e-11);
  ModelParams e4{0.0, 0.0, 0.4};
  CHECK(log_z_reference(ReferenceKind::elliptic, 6, e4) ==
        doctest::Approx(-21.120305580295395356).epsilon(1e-14));
  ModelParams e3{0.0, 0.0, 0.3};
  CHECK(std::fabs(log_z_reference(ReferenceKind::elliptic, 100, e3) -
                  (-7279.8900001394587424)) < 1e-11);
}

TEST_CASE("elliptic reference vanishes for a single particle") {
  CHECK(log_z_reference(ReferenceKind::elliptic, 1, {0.0, 0.0, 0.0}) == 0.0);
}

TEST_CASE("zero charge collapses the induced reference to the elliptic one") {
  for (int N = 1; N <= 50; ++N) {
    const double ind = log_z_reference(ReferenceKind::induced, N, {0.0, 0.0, 0.0});
    const double ell = log_z_reference(ReferenceKind::elliptic, N, {0.0, 0.0, 0.0});
    CHECK(std::fabs(ind - ell) <= 1e-12 * std::max(1.0, std::fabs(ell)));
  }
}

TEST_CASE("induced reference: factorial product route matches the closed route") {
  CHECK(std::fabs(log_z_induced_gamma_product(20, 1.0) -
                  log_z_reference(ReferenceKind::induced, 20, {0.0, 1.0, 0.0})) < 1e-12);
  CHECK(std::fabs(log_z_induced_gamma_product(10, 0.5) -
                  log_z_reference(ReferenceKind::induced, 10, {0.0, 0.5, 0.0})) < 1e-12);
  // Non-integer total charge only has the product route; it must still agree
  // with itself under the dispatching wrapper.
  CHECK(log_z_reference(ReferenceKind::induced, 7, {0.0, 0.371, 0.0}) ==
        log_z_induced_gamma_product(7, 0.371));
}

TEST_CASE("reference guards") {
  ModelParams p{0.0, 1.0, 0.0};
  CHECK_THROWS_AS(log_z_reference(ReferenceKind::induced, 0, p), DomainError);
  CHECK_THROWS_AS(log_z_reference(ReferenceKind::elliptic, -3, p), DomainError);
  CHECK_THROWS_AS(log_z_reference(ReferenceKind::induced, 10001, p), DomainError);
  CHECK_THROWS_AS(log_z_induced_gamma_product(5, -0.25), DomainError);
}

TEST_CASE("elliptic reference matches its truncated asymptotic form") {
  // Truncation error of the Barnes series at order 3 is far below 1e-10 here.
  ModelParams p{0.0, 0.0, 0.3};
  const double ref = log_z_reference(ReferenceKind::elliptic, 100, p);
  const double trunc = 50.0 * std::log1p(-0.09) +
                       static_cast<double>(log_barnes_g_asymptotic(101.0L, 3)) -
                       5050.0 * std::log(100.0);
  CHECK(std::fabs(ref - trunc) < 1e-10);
}

TEST_CASE("predicted free energy reproduces the induced reference at the origin") {
  ModelParams p{0.0, 1.0, 0.0};
  const double pred = log_z_predicted(p, 100, 7);
  const double ref = log_z_reference(ReferenceKind::induced, 100, p);
  CHECK(std::fabs(pred - ref) < 1e-9);
}

TEST_CASE("predicted free energy at zero charge tracks the elliptic reference") {
  // Coefficients agree term by term, so the gap is the genuine O(1/N)
  // remainder of the truncated expansion.
  ModelParams p{0.0, 0.0, 0.4};
  double gap[3];
  const int ns[3] = {100, 200, 400};
  for (int i = 0; i < 3; ++i)
    gap[i] = log_z_predicted(p, ns[i], 5) -
             log_z_reference(ReferenceKind::elliptic, ns[i], p);
  for (int i = 0; i + 1 < 3; ++i) {
    const double ratio = gap[i] / gap[i + 1];
    CHECK(ratio > 1.98);
    CHECK(ratio < 2.02);
  }
  CHECK(std::fabs(gap[2]) < 3e-4);
}

TEST_CASE("truncation remainder scales with the first dropped tail term") {
  ModelParams p{0.1, 1.0, 0.2};
  const double diff = log_z_predicted(p, 10, 2) - log_z_predicted(p, 10, 8);
  const double lead = (1.0 / 360.0) * 1e-3;  // |E_3| / N^3
  CHECK(std::fabs(diff) > 0.5 * lead);
  CHECK(std::fabs(diff) < 2.0 * lead);
}

TEST_CASE("characteristic polynomial moment") {
  // Zero charge gives the trivial moment exactly.
  CHECK(char_poly_moment_log({0.0, 0.0, 0.35}, 50, 4) == 0.0);
  // The quadratic growth rate is the energy gap to the elliptic ensemble.
  ModelParams p{0.2, 0.5, 0.15};
  const double target = -energy(p) + 0.75;
  double dev[3];
  const int ns[3] = {100, 200, 400};
  for (int i = 0; i < 3; ++i) {
    const double ch = char_poly_moment_log(p, ns[i], 3);
    dev[i] = std::fabs(ch / (static_cast<double>(ns[i]) * ns[i]) - target);
  }
  CHECK(dev[0] < 1e-4);
  CHECK(dev[1] < dev[0]);
  CHECK(dev[2] < dev[1]);
  CHECK(dev[2] < 1e-5);
}

TEST_CASE("predicted free energy guards") {
  CHECK_THROWS_AS(log_z_predicted({0.1, 1.0, 0.2}, 0, 3), DomainError);
  CHECK_THROWS_AS(log_z_predicted({0.0, 1.0, 0.8}, 10, 3), PhaseError);
}
