#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pinball/analysis.hpp"

using namespace pinball;

namespace {
constexpr double kPi = std::numbers::pi;

PhasePoint ic(const Table& t, std::uint64_t stream) {
  Rng rng(99, stream);
  return random_initial_condition(t, rng);
}
}  // namespace

TEST_CASE("lyapunov sum matches the mean log determinant") {
  for (const Table& t : {Table::cardioid(), Table::three_pointed_egg(0.08), Table::cuspless_cardioid()}) {
    for (double l : {0.2, 0.6, 1.0}) {
      const LyapunovEstimate e = lyapunov(Lambda(l), t, ic(t, 1), 20000, 1000);
      CHECK_FALSE(e.terminated_early);
      CHECK(std::abs(e.nu_plus + e.nu_minus - e.mean_log_det) < 1e-6);
    }
  }
}

TEST_CASE("ellipse exponents equal the orbit's eigenvalue exponents") {
  // |mu| of the minor-axis orbit at a = 1.5, lambda = 0.9, halved per collision.
  const double expect = -0.0526802578289131;
  const LyapunovEstimate e = lyapunov(Lambda(0.9), Table::ellipse(1.5), ic(Table::ellipse(1.5), 2), 100000, 5000);
  CHECK(e.nu_plus < 0.0);
  CHECK(e.nu_plus == doctest::Approx(expect).epsilon(1e-4 / 0.0527));
  CHECK(e.nu_minus == doctest::Approx(expect).epsilon(1e-4 / 0.0527));
}

TEST_CASE("exponents of a periodic attractor match its monodromy") {
  const Table egg = Table::three_pointed_egg(0.08);
  const OrbitRecord o = egg_period3_orbit(0.08, 0.7, 1);
  const LyapunovEstimate e = lyapunov(Lambda(0.7), egg, o.points.front(), 30000, 0);
  const double expect = std::log(o.stability.max_modulus()) / 3.0;
  CHECK(e.nu_plus == doctest::Approx(expect).epsilon(1e-4 / std::abs(expect)));
}

TEST_CASE("cardioid: chaotic for lambda < 1, conservative at lambda = 1") {
  const Table c = Table::cardioid();
  const LyapunovEstimate e = lyapunov(Lambda(0.5), c, ic(c, 3), 50000, 5000);
  CHECK(e.nu_plus > 0.0);
  CHECK(e.nu_plus + e.nu_minus < 0.0);
  const LyapunovEstimate h = lyapunov(Lambda(1.0), c, ic(c, 4), 100000, 5000);
  CHECK(std::abs(h.nu_plus + h.nu_minus) < 2e-3);
}

TEST_CASE("slap limit collapses the second exponent") {
  const LyapunovEstimate e = lyapunov(Lambda(0.0), Table::circle(), {0.2, 0.4}, 100, 0);
  CHECK(e.nu_plus == doctest::Approx(0.0).scale(1.0));
  CHECK(std::isinf(e.nu_minus));
  CHECK(e.nu_minus < 0.0);
}

TEST_CASE("period detection") {
  const Table c = Table::circle();
  std::vector<PhasePoint> pts;
  for (int i = 0; i < 200; ++i) pts.push_back({c.wrap(0.3 + kPi * (i % 3)), 0.1 * (i % 3)});
  CHECK(detect_period(c, pts) == 3u);
  std::vector<PhasePoint> fixed(200, PhasePoint{0.5, 0.0});
  CHECK(detect_period(c, fixed) == 1u);
  std::vector<PhasePoint> drift;
  for (int i = 0; i < 200; ++i) drift.push_back({0.01 * i, 0.0});
  CHECK_FALSE(detect_period(c, drift).has_value());
  CHECK_FALSE(detect_period(c, std::vector<PhasePoint>(10)).has_value());
}

TEST_CASE("phase distance wraps the boundary coordinate") {
  const Table c = Table::circle();
  CHECK(phase_distance(c, {kPi - 0.01, 0.0}, {-kPi + 0.01, 0.0}) == doctest::Approx(0.02));
}

TEST_CASE("random initial conditions are reproducible") {
  const Table t = Table::three_pointed_egg(0.08);
  const PhasePoint a = ic(t, 7), b = ic(t, 7), c = ic(t, 8);
  CHECK(a.u == b.u);
  CHECK(a.phi == b.phi);
  CHECK(a.u != c.u);
  CHECK(std::abs(a.phi) < kPi / 2.0);
}

TEST_CASE("newton finds the ellipse minor-axis orbit") {
  const Table e = Table::ellipse(1.5);
  const OrbitRecord o = find_periodic_orbit(Lambda(0.5), e, 2, {{1.5, 0.05}, {-1.6, -0.02}});
  CHECK(o.residual < kNewtonTolerance);
  CHECK(std::abs(std::abs(o.points[0].u) - kPi / 2.0) < 1e-9);
  CHECK(std::abs(o.points[0].phi) < 1e-9);
  const Jacobian2 m = ellipse_minor_matrix(1.5, 0.5);
  CHECK(o.stability.trace == doctest::Approx(m.trace()).epsilon(1e-8));
  CHECK_THROWS_AS((void)find_periodic_orbit(Lambda(0.5), e, 3, {{1.5, 0.0}}), std::invalid_argument);
}

TEST_CASE("egg period-3 orbits") {
  const OrbitRecord tri = egg_period3_orbit(0.08, 1.0, 1);
  for (const auto& p : tri.points) CHECK(std::sin(p.phi) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(tri.stability.max_modulus() == doctest::Approx(1.0).epsilon(1e-6));
  const OrbitRecord att = egg_period3_orbit(0.08, 0.45, -1);
  CHECK(att.stability.max_modulus() < 1.0);
  for (const auto& p : att.points) CHECK(std::sin(p.phi) < 0.0);
}

TEST_CASE("slap map has no period-3 orbit") {
  const Period3Gap g = period3_gap(Lambda(0.0), Table::three_pointed_egg(0.08), 4000, 1);
  CHECK_FALSE(g.crossing);
  CHECK(g.gap > 0.1);
  CHECK(g.evaluated == 4000);
}

TEST_CASE("cuspless shooting from the upper join") {
  const double join = -CusplessCardioid::kHalfWall;
  CHECK(std::abs(cuspless_shoot(0.0712173, -0.0289796) - join) < 1e-6);
  // Below the critical lambda the fourth collision stays on the wall, above it
  // lands on the arc past the join.
  const auto [low, phi_low] = cuspless_shoot_min(0.05, -0.06, 0.0);
  CHECK(low > 0.0);
  CHECK(std::abs(cuspless_shoot(0.05, phi_low)) < CusplessCardioid::kHalfWall);
  const auto [high, phi_high] = cuspless_shoot_min(0.09, -0.06, 0.0);
  CHECK(high < 0.0);
  CHECK(cuspless_shoot(0.09, phi_high) < join);
  const ShootingCritical c = cuspless_critical(0.05, 0.09, -0.06, 0.0);
  CHECK(c.lambda == doctest::Approx(0.0712173).epsilon(1e-5));
  CHECK(c.phi == doctest::Approx(-0.0289796).epsilon(1e-3));
}

TEST_CASE("basin labels") {
  const Table cl = Table::cuspless_cardioid();
  BasinOptions opt;
  opt.threads = 1;
  const auto cells = classify_basin(Lambda(0.05), cl, {6, 6}, opt);
  CHECK(cells.size() == 36);
  for (const auto& c : cells) CHECK(c.label == BasinLabel::periodic);
  CHECK(cells[0].coord < cells[1].coord);
  CHECK(cells[0].sin_phi < cells[6].sin_phi);
  CHECK_THROWS_AS((void)classify_basin(Lambda(0.05), cl, {1, 4}, opt), std::invalid_argument);
}

TEST_CASE("basin labels are stable under longer runs") {
  const Table egg = Table::three_pointed_egg(0.08);
  BasinOptions a;
  BasinOptions b;
  b.n = 2 * a.n;
  const auto ca = classify_basin(Lambda(0.5), egg, {10, 10}, a);
  const auto cb = classify_basin(Lambda(0.5), egg, {10, 10}, b);
  std::size_t same = 0, chaotic = 0;
  for (std::size_t i = 0; i < ca.size(); ++i) {
    same += ca[i].label == cb[i].label;
    chaotic += ca[i].label == BasinLabel::chaotic;
  }
  CHECK(same == ca.size());
  CHECK(chaotic > 0);
  CHECK(chaotic < ca.size());
}
