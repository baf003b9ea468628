#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pinball/analysis.hpp"
#include "pinball/pinball_map.hpp"

using namespace pinball;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("lambda outside [0, 1] is rejected") {
  CHECK_THROWS_AS(Lambda(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(Lambda(1.0001), std::invalid_argument);
  CHECK_THROWS_AS(Lambda(std::nan("")), std::invalid_argument);
  CHECK(Lambda(0.0).value() == 0.0);
  CHECK(Lambda(1.0).value() == 1.0);
}

TEST_CASE("reflection contracts the incidence angle toward the normal") {
  const BoundaryFrame f = frame_at(Table::circle(), 0.3);
  for (double l : {0.0, 0.25, 0.5, 1.0}) {
    for (double eta : {-1.3, -0.4, 0.0, 0.2, 1.1}) {
      // Incoming with tangential component sin(eta) along t, moving outward.
      const Vec2 v_in = -std::cos(eta) * f.n + std::sin(eta) * f.t;
      const Reflection r = reflect(Lambda(l), v_in, f);
      CHECK(r.eta == doctest::Approx(std::abs(eta)).epsilon(1e-12));
      CHECK(r.phi == doctest::Approx(l * std::abs(eta)).epsilon(1e-12));
      CHECK(r.v_out.norm() == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(r.v_out.dot(f.n) == doctest::Approx(std::cos(l * eta)).epsilon(1e-12));
      CHECK(r.v_out.dot(f.t) == doctest::Approx(std::sin(l * eta)).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("grazing incidence is a tangent hit") {
  const BoundaryFrame f = frame_at(Table::circle(), 0.0);
  CHECK_THROWS_AS((void)reflect(Lambda(0.5), f.t, f), TangentHit);
}

TEST_CASE("circle angles decay geometrically") {
  const Table c = Table::circle();
  for (double l : {0.1, 0.5, 0.9, 1.0}) {
    PhasePoint x{0.7, 1.2};
    for (int k = 0; k < 30; ++k) {
      const auto [next, rec] = step(Lambda(l), c, x);
      // Chord directions carry absolute rounding of order 1e-16.
      CHECK(std::abs(std::abs(next.phi) - l * std::abs(x.phi)) <= 1e-12 * std::abs(x.phi) + 1e-14);
      CHECK(std::abs(rec.eta - std::abs(x.phi)) <= 1e-12 * std::abs(x.phi) + 1e-14);
      // The angle keeps its sign and the step advances by pi - 2 |phi|.
      if (std::abs(x.phi) > 1e-12) CHECK((next.phi > 0) == (x.phi > 0));
      CHECK(c.param_difference(next.u, x.u) ==
            doctest::Approx(c.wrap(kPi - 2.0 * x.phi)).epsilon(1e-12));
      x = next;
    }
  }
}

TEST_CASE("stepper and step agree") {
  const Table egg = Table::three_pointed_egg(0.08);
  PhasePoint x{0.4, 0.3};
  Stepper s(Lambda(0.6), egg, x);
  for (int k = 0; k < 200; ++k) {
    x = step(Lambda(0.6), egg, x).first;
    s.advance();
    CHECK(std::abs(egg.param_difference(s.state().u, x.u)) < 1e-9);
    CHECK(s.state().phi == doctest::Approx(x.phi).epsilon(1e-9).scale(1e-9));
  }
  CHECK(s.count() == 200);
}

TEST_CASE("outgoing velocity encodes the angle convention") {
  const Table t = Table::ellipse(1.5);
  const BoundaryFrame f = frame_at(t, 1.0);
  const Vec2 v = outgoing_velocity(f, 0.4);
  CHECK(v.dot(f.t) == doctest::Approx(std::sin(0.4)));
  CHECK(v.dot(f.n) == doctest::Approx(std::cos(0.4)));
}

TEST_CASE("slap map sends each point along its inward normal") {
  const Table c = Table::circle();
  CHECK(c.wrap(slap_map(c, 0.3)) == doctest::Approx(c.wrap(0.3 + kPi)));
  CHECK(slap_derivative(c, 0.3) == doctest::Approx(1.0));
  for (const Table& t : {Table::ellipse(1.5), Table::cardioid(), Table::three_pointed_egg(0.08)}) {
    CAPTURE(t.name());
    for (double u : {-2.0, -0.5, 0.4, 1.9}) {
      const double h = 1e-6;
      const double fd = t.param_difference(slap_map(t, u + h), slap_map(t, u - h)) / (2.0 * h);
      CHECK(slap_derivative(t, u) == doctest::Approx(fd).epsilon(1e-6));
      const PhasePoint next = step(Lambda(0.0), t, {u, 0.0}).first;
      CHECK(std::abs(t.param_difference(next.u, slap_map(t, u))) < 1e-12);
      CHECK(next.phi == 0.0);
    }
  }
}

TEST_CASE("trajectories record terminations instead of throwing") {
  const Table card = Table::cardioid();
  // Launch along the symmetry axis straight into the cusp.
  const Trajectory tr = trajectory(Lambda(0.5), card, {0.0, 0.0}, 10, 0);
  CHECK(tr.termination == Termination::cusp_hit);
  CHECK(tr.terminated());
  CHECK_FALSE(tr.reason.empty());
  CHECK(to_string(Termination::cusp_hit) == "cusp_hit");

  const Trajectory ok = trajectory(Lambda(0.9), Table::ellipse(1.5), {0.3, 0.2}, 50, 20);
  CHECK(ok.records.size() == 50);
  CHECK(ok.completed == 70);
  CHECK_FALSE(ok.terminated());
}

TEST_CASE("elastic launch starts on the boundary with an elastic angle") {
  const Table c = Table::circle();
  const PhasePoint x = launch_elastic(c, Vec2(0.0, 0.0), 0.0);
  CHECK(x.u == doctest::Approx(0.0));
  CHECK(x.phi == doctest::Approx(0.0));
  const PhasePoint y = launch_elastic(c, Vec2(0.0, 0.5), 0.0);
  // Hits at angle pi/6 with incidence pi/6; elastic reflection keeps it.
  CHECK(y.u == doctest::Approx(kPi / 6.0));
  CHECK(std::abs(y.phi) == doctest::Approx(kPi / 6.0));
}
