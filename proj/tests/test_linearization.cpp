#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pinball/linearization.hpp"
#include "support.hpp"

using namespace pinball;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("eigenvalues from trace and determinant") {
  auto [a, b] = eigenvalues_from_trace_det(3.0, 2.0);
  CHECK(a.real() == doctest::Approx(2.0));
  CHECK(b.real() == doctest::Approx(1.0));
  std::tie(a, b) = eigenvalues_from_trace_det(-1e8, 1.0);
  CHECK(a.real() == doctest::Approx(-1e8));
  CHECK(b.real() == doctest::Approx(-1e-8));
  std::tie(a, b) = eigenvalues_from_trace_det(0.0, 4.0);
  CHECK(a.imag() == doctest::Approx(2.0));
  CHECK(b.imag() == doctest::Approx(-2.0));
}

TEST_CASE("stability classification") {
  CHECK(analyse_matrix(Jacobian2{{0.5, 0.0}, {0.0, 0.2}}).classification == Stability::stable_node);
  CHECK(analyse_matrix(Jacobian2{{0.0, -0.5}, {0.5, 0.0}}).classification == Stability::stable_focus);
  CHECK(analyse_matrix(Jacobian2{{0.0, -1.0}, {1.0, 0.0}}).classification == Stability::neutral);
  CHECK(analyse_matrix(Jacobian2{{-1.2, 0.0}, {0.0, 0.1}}).classification == Stability::unstable);
}

TEST_CASE("flight jacobian matches finite differences") {
  for (const Table& table : {Table::circle(), Table::ellipse(1.5), Table::cardioid(),
                             Table::cuspless_cardioid(), Table::three_pointed_egg(0.08)}) {
    CAPTURE(table.name());
    Rng rng(3, 0);
    int done = 0;
    double worst = 0.0, worst_det = 0.0;
    while (done < 500) {
      const Lambda l(rng.uniform(0.0, 1.0));
      const auto x = testing::well_posed_state(l, table, rng);
      if (!x) continue;
      const auto r = testing::check_jacobian(l, table, *x);
      worst = std::max(worst, r.relative_error);
      worst_det = std::max(worst_det, r.det_error);
      ++done;
    }
    CHECK(worst < 1e-5);
    CHECK(worst_det < 1e-10);
  }
}

TEST_CASE("conservative map preserves area in Birkhoff coordinates") {
  for (const Table& table : {Table::ellipse(1.5), Table::cardioid(), Table::three_pointed_egg(0.08)}) {
    Rng rng(4, 0);
    for (int k = 0; k < 200;) {
      const auto x = testing::well_posed_state(Lambda(1.0), table, rng);
      if (!x) continue;
      const auto [next, rec] = step(Lambda(1.0), table, *x);
      const Jacobian2 b = to_birkhoff(flight_jacobian(Lambda(1.0), rec, departure_record(table, *x)),
                                      x->phi, next.phi);
      CHECK(b.determinant() == doctest::Approx(1.0).epsilon(1e-9));
      ++k;
    }
  }
}

TEST_CASE("closed-form period-2 monodromies match the composed ones") {
  for (double l : {0.1, 0.5, 0.9}) {
    for (double a : {1.2, 1.5, 5.0}) {
      const StabilityReport s =
          orbit_monodromy(Lambda(l), Table::ellipse(a), {{kPi / 2.0, 0.0}, {-kPi / 2.0, 0.0}});
      const Jacobian2 m = ellipse_minor_matrix(a, l);
      CHECK(s.trace == doctest::Approx(m.trace()).epsilon(1e-9));
      CHECK(s.det == doctest::Approx(m.determinant()).epsilon(1e-9));
    }
    const Table cl = Table::cuspless_cardioid();
    const StabilityReport c = orbit_monodromy(Lambda(l), cl, {{0.0, 0.0}, {CusplessCardioid::kHalfLength, 0.0}});
    CHECK(c.trace == doctest::Approx(cuspless_period2_matrix(l).trace()).epsilon(1e-9));
    CHECK(c.det == doctest::Approx(l * l).epsilon(1e-9));
    for (double alpha : {0.05, 0.08}) {
      const StabilityReport e = orbit_monodromy(Lambda(l), Table::three_pointed_egg(alpha), {{0.0, 0.0}, {-kPi, 0.0}});
      const Jacobian2 m = egg_period2_matrix(alpha, l);
      CHECK(e.trace == doctest::Approx(m.trace()).epsilon(1e-9));
      CHECK(e.det == doctest::Approx(m.determinant()).epsilon(1e-9));
    }
  }
}

TEST_CASE("ellipse eigenvalue formula agrees with the matrix") {
  for (double a : {1.2, 1.5, 5.0}) {
    for (double l : {0.0, 0.3, 0.7, 1.0}) {
      const Jacobian2 m = ellipse_minor_matrix(a, l);
      const auto [p, q] = eigenvalues_from_trace_det(m.trace(), m.determinant());
      const auto [r, s] = ellipse_minor_eigs(a, l);
      CHECK(std::abs(p * q - r * s) < 1e-12);
      CHECK(std::abs((p + q) - (r + s)) < 1e-12);
    }
  }
}

TEST_CASE("threshold values") {
  const double lc = cuspless_lambda_c();
  CHECK(lc == doctest::Approx(0.0934003354313602).epsilon(1e-14));
  CHECK(cuspless_period2_eigs(lc).second == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(cuspless_period2_eigs(0.5 * lc).second > -1.0);
  CHECK(egg_alpha_tilde(0.0) == doctest::Approx(0.0780883326836350).epsilon(1e-12));
  CHECK(egg_alpha_tilde(1.0) == doctest::Approx(0.0553851381374166).epsilon(1e-12));
  CHECK(ellipse_lambda_minus(5.0) == doctest::Approx(0.4368658817454903).epsilon(1e-12));
  CHECK(ellipse_lambda_minus(std::sqrt(2.0)) == doctest::Approx(0.0).scale(1.0));
  CHECK_FALSE(egg_alpha_hat(1.0).has_value());
  // At alpha_tilde -1 is an eigenvalue of the egg period-2 orbit: 1 + tr + det = 0.
  for (double l : {0.0, 0.4, 1.0}) {
    const Jacobian2 m = egg_period2_matrix(egg_alpha_tilde(l), l);
    CHECK(std::abs(1.0 + m.trace() + m.determinant()) < 1e-10);
  }
}

TEST_CASE("non-periodic input is rejected") {
  CHECK_THROWS_AS((void)orbit_monodromy(Lambda(0.5), Table::circle(), {{0.1, 0.3}, {2.0, 0.0}}), NotPeriodic);
}
