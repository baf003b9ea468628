#pragma once

// Shared helpers for the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "pinball/linearization.hpp"
#include "pinball/pinball_map.hpp"
#include "pinball/random.hpp"

namespace pinball::testing {

inline constexpr double kPi = std::numbers::pi;

struct JacobianCheck {
  double relative_error = 0.0;
  double det_error = 0.0;  // |det J - lambda cos phi0 / cos eta1| relative to the value
};

/// Random state away from grazing, from the cusp and from the cuspless joins,
/// where the map is not differentiable or the derivative is ill-conditioned.
inline std::optional<PhasePoint> well_posed_state(Lambda lambda, const Table& table, Rng& rng) {
  const auto [lo, hi] = table.plot_range();
  const PhasePoint x{table.param_from_plot_coordinate(rng.uniform(lo, hi)), rng.uniform(-1.3, 1.3)};
  auto near_join = [&](double u) {
    return table.kind() == TableKind::cuspless_cardioid &&
           std::abs(std::abs(u) - CusplessCardioid::kHalfWall) < 1e-4;
  };
  auto near_cusp = [&](double u) { return table.kind() == TableKind::cardioid && std::abs(u) > kPi - 0.05; };
  if (near_join(x.u) || near_cusp(x.u)) return std::nullopt;
  try {
    const auto [next, rec] = step(lambda, table, x);
    if (std::cos(rec.eta) < 0.05 || near_join(next.u) || near_cusp(next.u)) return std::nullopt;
  } catch (const GeometryError&) {
    return std::nullopt;
  }
  return x;
}

/// flight_jacobian against central differences of the map in the canonical
/// parameter, plus the determinant identity in arc length.
inline JacobianCheck check_jacobian(Lambda lambda, const Table& table, const PhasePoint& x,
                                    double h = 1e-6) {
  const auto [next, rec] = step(lambda, table, x);
  const CollisionRecord dep = departure_record(table, x);
  const Jacobian2 arc = flight_jacobian(lambda, rec, dep);
  const Jacobian2 j = to_canonical(table, arc, x.u, next.u);
  Jacobian2 fd;
  for (int c = 0; c < 2; ++c) {
    PhasePoint a = x, b = x;
    (c == 0 ? a.u : a.phi) += h;
    (c == 0 ? b.u : b.phi) -= h;
    const PhasePoint fa = step(lambda, table, a).first;
    const PhasePoint fb = step(lambda, table, b).first;
    fd(0, c) = table.param_difference(fa.u, fb.u) / (2.0 * h);
    fd(1, c) = (fa.phi - fb.phi) / (2.0 * h);
  }
  JacobianCheck out;
  out.relative_error = (fd - j).cwiseAbs().maxCoeff() / std::max(1.0, j.cwiseAbs().maxCoeff());
  const double expect = lambda.value() * std::cos(x.phi) / std::cos(rec.eta);
  out.det_error = std::abs(arc.determinant() - expect) / std::max(1.0, std::abs(expect));
  return out;
}

// Membership written from the shape definitions alone, independent of the
// library's residuals.
inline bool oracle_inside(const Table& table, const Vec2& p) {
  const double r = p.norm();
  const double th = std::atan2(p.y(), p.x());
  switch (table.kind()) {
    case TableKind::circle:
      return r < 1.0;
    case TableKind::ellipse: {
      const double a = std::get<Ellipse>(table.shape()).a;
      return p.x() * p.x() / (a * a) + p.y() * p.y() < 1.0;
    }
    case TableKind::cardioid:
      return r < 1.0 + std::cos(th);
    case TableKind::cuspless_cardioid:
      if (std::abs(th) >= 2.0 * kPi / 3.0) return p.x() > -0.25;
      return r < 1.0 + std::cos(th);
    case TableKind::three_pointed_egg:
      return r < 1.0 + std::get<ThreePointedEgg>(table.shape()).alpha * std::cos(3.0 * th);
  }
  return false;
}

// First exit along the ray by marching in steps of `h` and bisecting.
inline double oracle_exit(const Table& table, const Vec2& q, const Vec2& v, double start, double h) {
  double lo = start;
  double hi = start;
  for (;;) {
    hi = lo + h;
    if (!oracle_inside(table, q + hi * v)) break;
    lo = hi;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (oracle_inside(table, q + mid * v) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct OracleStats {
  std::size_t rays = 0;
  std::size_t matched = 0;
  std::size_t thin = 0;  // exits through excursions narrower than the oracle step
  double worst = 0.0;
};

inline OracleStats compare_with_oracle(const Table& table, std::size_t rays, std::uint64_t seed) {
  OracleStats st;
  Rng rng(seed, 0);
  const double r = table.bounding_radius();
  while (st.rays < rays) {
    Vec2 q;
    Vec2 v;
    std::optional<double> from;
    double start = 0.0;
    if (st.rays % 2 == 0) {
      q = Vec2(rng.uniform(-r, r), rng.uniform(-r, r));
      if (!oracle_inside(table, q)) continue;
      const double heading = rng.uniform(0.0, 2.0 * kPi);
      v = Vec2(std::cos(heading), std::sin(heading));
    } else {
      const auto [lo, hi] = table.plot_range();
      const double u = table.param_from_plot_coordinate(rng.uniform(lo, hi));
      if (table.kind() == TableKind::cardioid && std::abs(u) > kPi - 1e-3) continue;
      const BoundaryFrame f = frame_at(table, u);
      q = f.q;
      v = outgoing_velocity(f, rng.uniform(-1.5, 1.5));
      from = u;
      start = 1e-7;
      if (!oracle_inside(table, q + start * v)) continue;
    }
    ++st.rays;
    Flight flight;
    try {
      flight = next_collision(table, q, v, from);
    } catch (const CuspHit&) {
      ++st.matched;
      continue;
    }
    const double expect = oracle_exit(table, q, v, start, 1e-3);
    const double err = std::abs(flight.time - expect);
    if (err <= 1e-9) {
      ++st.matched;
      st.worst = std::max(st.worst, err);
      continue;
    }
    // The solver may legitimately stop earlier at an exit the marching oracle
    // stepped over; confirm it is a genuine crossing.
    const Vec2 p = q + flight.time * v;
    const bool crossing = flight.time < expect && oracle_inside(table, p - 1e-9 * v) &&
                          !oracle_inside(table, p + 1e-9 * v);
    if (crossing) {
      ++st.thin;
    } else {
      st.worst = std::max(st.worst, err);
    }
  }
  return st;
}

}  // namespace pinball::testing
