#include "pinball/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "pinball/parallel.hpp"

namespace pinball {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

LyapunovEstimate lyapunov(Lambda lambda, const Table& table, const PhasePoint& x0, std::size_t n,
                          std::size_t discard) {
  LyapunovEstimate out;
  out.final_state = x0;
  Stepper stepper(lambda, table, x0);
  Eigen::Vector2d e1(1.0, 0.0), e2(0.0, 1.0);
  double sum1 = 0.0, sum2 = 0.0, sum_det = 0.0;
  const double l = lambda.value();
  try {
    for (std::size_t k = 0; k < discard; ++k) stepper.advance();
    CollisionRecord prev = stepper.current();
    for (std::size_t k = 0; k < n; ++k) {
      const CollisionRecord& rec = stepper.advance();
      const Jacobian2 j = flight_jacobian(lambda, rec, prev);
      Eigen::Vector2d a = j * e1;
      const double n1 = a.norm();
      e1 = a / n1;
      Eigen::Vector2d b = j * e2;
      b -= b.dot(e1) * e1;
      const double n2 = b.norm();
      // lambda = 0 collapses the plane onto a line; keep e2 orthogonal to e1.
      e2 = n2 > 0.0 ? Eigen::Vector2d(b / n2) : Eigen::Vector2d(-e1.y(), e1.x());
      sum1 += std::log(n1);
      sum2 += std::log(n2);
      sum_det += std::log(l * std::cos(prev.phi) / std::cos(rec.eta));
      prev = rec;
      ++out.n_used;
    }
  } catch (const GeometryError& e) {
    out.terminated_early = true;
    out.reason = e.what();
  }
  out.final_state = stepper.state();
  if (out.n_used > 0) {
    const double m = static_cast<double>(out.n_used);
    out.nu_plus = sum1 / m;
    out.nu_minus = sum2 / m;
    out.mean_log_det = sum_det / m;
  }
  return out;
}

PhaseCloud sample_attractor(Lambda lambda, const Table& table, const PhasePoint& x0, std::size_t n,
                            std::size_t discard) {
  const Trajectory traj = trajectory(lambda, table, x0, n, discard);
  PhaseCloud cloud;
  cloud.termination = traj.termination;
  cloud.reason = traj.reason;
  cloud.points.reserve(traj.records.size());
  for (const auto& rec : traj.records) {
    cloud.points.push_back({table.plot_coordinate(rec.frame.u), std::sin(rec.signed_phi())});
  }
  return cloud;
}

double phase_distance(const Table& table, const PhasePoint& a, const PhasePoint& b) {
  const auto [lo, hi] = table.plot_range();
  const double width = hi - lo;
  double d = table.plot_coordinate(a.u) - table.plot_coordinate(b.u);
  d -= width * std::floor(d / width + 0.5);
  return std::hypot(d, std::sin(a.phi) - std::sin(b.phi));
}

std::optional<std::size_t> detect_period(const Table& table, const std::vector<PhasePoint>& points,
                                         double tol, std::size_t max_period) {
  const std::size_t n = points.size();
  if (n < 2 * max_period) return std::nullopt;
  for (std::size_t p = 1; p <= max_period; ++p) {
    bool recurs = true;
    for (std::size_t i = n - max_period - p; i + p < n && recurs; ++i) {
      recurs = phase_distance(table, points[i], points[i + p]) < tol;
    }
    if (recurs) return p;
  }
  return std::nullopt;
}

PhasePoint random_initial_condition(const Table& table, Rng& rng) {
  const double r = table.bounding_radius();
  for (;;) {
    const Vec2 p(rng.uniform(-r, r), rng.uniform(-r, r));
    const double heading = rng.uniform(0.0, 2.0 * kPi);
    if (!table.contains(p)) continue;
    try {
      return launch_elastic(table, p, heading);
    } catch (const GeometryError&) {
      // Launch into the cusp or tangentially: draw again.
    }
  }
}

std::string to_string(BasinLabel label) {
  switch (label) {
    case BasinLabel::chaotic:
      return "chaotic";
    case BasinLabel::periodic:
      return "periodic";
    case BasinLabel::escaped:
      return "escaped";
  }
  return "unknown";
}

std::vector<BasinCell> classify_basin(Lambda lambda, const Table& table, const BasinGrid& grid,
                                      const BasinOptions& options) {
  if (grid.width < 2 || grid.height < 2) throw std::invalid_argument("basin grid must be at least 2x2");
  const auto [lo, hi] = table.plot_range();
  std::vector<BasinCell> cells(grid.width * grid.height);
  parallel_for(cells.size(), options.threads, [&](std::size_t idx) {
    const std::size_t i = idx % grid.width;
    const std::size_t j = idx / grid.width;
    BasinCell& cell = cells[idx];
    cell.coord = lo + (static_cast<double>(i) + 0.5) * (hi - lo) / static_cast<double>(grid.width);
    cell.sin_phi = -1.0 + (static_cast<double>(j) + 0.5) * 2.0 / static_cast<double>(grid.height);
    const PhasePoint x0{table.param_from_plot_coordinate(cell.coord), std::asin(cell.sin_phi)};
    LyapunovEstimate est;
    try {
      est = lyapunov(lambda, table, x0, options.n, options.discard);
    } catch (const GeometryError&) {
      est.terminated_early = true;
    }
    cell.nu_plus = est.nu_plus;
    if (est.terminated_early) {
      cell.label = BasinLabel::escaped;
      return;
    }
    cell.label = est.nu_plus > kChaosThreshold ? BasinLabel::chaotic : BasinLabel::periodic;
    if (cell.label != BasinLabel::periodic) return;
    double best = options.match_tol;
    for (std::size_t a = 0; a < options.attractors.size(); ++a) {
      for (const auto& p : options.attractors[a]) {
        const double d = phase_distance(table, est.final_state, p);
        if (d < best) {
          best = d;
          cell.attractor = static_cast<int>(a);
        }
      }
    }
  });
  return cells;
}

namespace {

struct ShootingEval {
  Eigen::VectorXd residual;
  Eigen::MatrixXd jacobian;
};

ShootingEval evaluate_shooting(Lambda lambda, const Table& table, const std::vector<PhasePoint>& x,
                               bool with_jacobian) {
  const std::size_t p = x.size();
  ShootingEval ev;
  ev.residual.resize(2 * p);
  if (with_jacobian) ev.jacobian = Eigen::MatrixXd::Zero(2 * p, 2 * p);
  for (std::size_t i = 0; i < p; ++i) {
    const PhasePoint& target = x[(i + 1) % p];
    const auto [next, rec] = step(lambda, table, x[i]);
    ev.residual(2 * i) = table.param_difference(next.u, target.u);
    ev.residual(2 * i + 1) = next.phi - target.phi;
    if (!with_jacobian) continue;
    const Jacobian2 j = to_canonical(table, flight_jacobian(lambda, rec, departure_record(table, x[i])),
                                     x[i].u, next.u);
    const std::size_t c = 2 * ((i + 1) % p);
    ev.jacobian.block<2, 2>(2 * i, 2 * i) += j;
    ev.jacobian.block<2, 2>(2 * i, c) -= Eigen::Matrix2d::Identity();
  }
  return ev;
}

double max_norm(const Eigen::VectorXd& v) { return v.lpNorm<Eigen::Infinity>(); }

}  // namespace

OrbitRecord find_periodic_orbit(Lambda lambda, const Table& table, std::size_t period,
                                const std::vector<PhasePoint>& guess) {
  if (period == 0 || guess.size() != period) {
    throw std::invalid_argument("guess length must equal the period");
  }
  constexpr std::size_t kMaxIterations = 100;
  constexpr int kMaxHalvings = 40;
  std::vector<PhasePoint> x = guess;
  for (auto& p : x) p.u = table.wrap(p.u);
  ShootingEval ev = evaluate_shooting(lambda, table, x, true);
  double res = max_norm(ev.residual);
  std::size_t iter = 0;
  int polish = 0;
  while (iter < kMaxIterations) {
    if (res < kNewtonTolerance && (polish >= 3 || res < 1e-14)) break;
    ++iter;
    const Eigen::VectorXd dx = ev.jacobian.partialPivLu().solve(-ev.residual);
    if (!dx.allFinite()) throw NoConvergence("singular shooting jacobian");
    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h < kMaxHalvings && !accepted; ++h, t *= 0.5) {
      std::vector<PhasePoint> trial = x;
      bool valid = true;
      for (std::size_t i = 0; i < period; ++i) {
        trial[i].u = table.wrap(trial[i].u + t * dx(2 * i));
        trial[i].phi += t * dx(2 * i + 1);
        valid = valid && std::abs(trial[i].phi) < 0.5 * kPi - kTangentGuard;
      }
      if (!valid) continue;
      try {
        ShootingEval trial_ev = evaluate_shooting(lambda, table, trial, true);
        const double trial_res = max_norm(trial_ev.residual);
        if (trial_res < res) {
          x = std::move(trial);
          ev = std::move(trial_ev);
          res = trial_res;
          accepted = true;
        }
      } catch (const GeometryError&) {
        // Outside the domain of the map: shorten the step.
      }
    }
    if (!accepted) {
      if (res < kNewtonTolerance) break;
      throw NoConvergence("damped newton step failed to reduce the residual");
    }
    if (res < kNewtonTolerance) ++polish;
  }
  if (!(res < kNewtonTolerance)) {
    throw NoConvergence("newton iteration did not converge in " + std::to_string(kMaxIterations) +
                        " iterations");
  }
  OrbitRecord out;
  out.period = period;
  out.points = x;
  out.residual = res;
  out.iterations = iter;
  out.stability = orbit_monodromy(lambda, table, x, std::max(1e-9, 10.0 * res));
  return out;
}

OrbitRecord continue_orbit(const Table& table, const OrbitRecord& orbit, double from, double to,
                           double max_step) {
  OrbitRecord current = orbit;
  double l = from;
  double h = std::min(max_step, std::abs(to - from));
  const double dir = to >= from ? 1.0 : -1.0;
  while (dir * (to - l) > 0.0) {
    const double next = dir * (to - l) <= h ? to : l + dir * h;
    try {
      current = find_periodic_orbit(Lambda(next), table, current.period, current.points);
      l = next;
      h = std::min(max_step, 2.0 * h);
    } catch (const std::exception&) {
      h *= 0.5;
      if (h < 1e-7) throw;
    }
  }
  return current;
}

std::vector<PhasePoint> egg_triangle_orbit(int sign) {
  const double phi = sign >= 0 ? kPi / 6.0 : -kPi / 6.0;
  if (sign >= 0) return {{kPi / 3.0, phi}, {-kPi, phi}, {-kPi / 3.0, phi}};
  return {{kPi / 3.0, phi}, {-kPi / 3.0, phi}, {-kPi, phi}};
}

OrbitRecord egg_period3_orbit(double alpha, double lambda, int sign) {
  const Table egg = Table::three_pointed_egg(alpha);
  const OrbitRecord start = find_periodic_orbit(Lambda(1.0), egg, 3, egg_triangle_orbit(sign));
  if (lambda == 1.0) return start;
  return continue_orbit(egg, start, 1.0, lambda, 0.01);
}

namespace {

// Largest |phi| reachable after k collisions, iterated to a fixed point over
// the grid. Periodic orbits lie in every forward image of phase space, so
// their angles obey the limiting bound.
double trapped_phi_bound(Lambda lambda, const Table& table, std::size_t theta_cells,
                         std::size_t phi_cells, unsigned threads) {
  double bound = lambda.value() * 0.5 * kPi * (1.0 - 1e-3);
  for (int iter = 0; iter < 60 && bound > 0.0; ++iter) {
    std::vector<double> row_max(theta_cells, 0.0);
    parallel_for(theta_cells, threads, [&](std::size_t i) {
      const double theta = -kPi + (static_cast<double>(i) + 0.5) * 2.0 * kPi / static_cast<double>(theta_cells);
      for (std::size_t j = 0; j < phi_cells; ++j) {
        const double phi = -bound + 2.0 * bound * static_cast<double>(j) / static_cast<double>(phi_cells - 1);
        try {
          row_max[i] = std::max(row_max[i], std::abs(step(lambda, table, {theta, phi}).first.phi));
        } catch (const GeometryError&) {
        }
      }
    });
    // Pad for the maximum falling between grid points.
    const double next = std::min(bound, *std::max_element(row_max.begin(), row_max.end()) * (1.0 + 1e-3));
    const bool settled = bound - next <= 1e-6 * bound;
    bound = next;
    if (settled) break;
  }
  return bound;
}

}  // namespace

Period3Gap period3_gap(Lambda lambda, const Table& table, std::size_t theta_cells,
                       std::size_t phi_cells, unsigned threads) {
  if (theta_cells < 2) throw std::invalid_argument("period3_gap needs at least 2 theta cells");
  const double l = lambda.value();
  const std::size_t nphi = l == 0.0 ? 1 : std::max<std::size_t>(phi_cells, 2);
  const double phi_max = nphi == 1 ? 0.0 : trapped_phi_bound(lambda, table, theta_cells, nphi, threads);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> d(theta_cells * nphi, nan);
  parallel_for(theta_cells, threads, [&](std::size_t i) {
    const double theta = -kPi + (static_cast<double>(i) + 0.5) * 2.0 * kPi / static_cast<double>(theta_cells);
    for (std::size_t j = 0; j < nphi; ++j) {
      const double phi = nphi == 1 ? 0.0 : -phi_max + 2.0 * phi_max * static_cast<double>(j) / static_cast<double>(nphi - 1);
      try {
        PhasePoint x{theta, phi};
        for (int k = 0; k < 3; ++k) x = step(lambda, table, x).first;
        d[i * nphi + j] = table.param_difference(x.u, theta);
      } catch (const GeometryError&) {
        // Counted as skipped below.
      }
    }
  });
  Period3Gap out;
  out.phi_bound = phi_max;
  out.gap = std::numeric_limits<double>::infinity();
  auto crosses = [](double a, double b) {
    return std::isfinite(a) && std::isfinite(b) && ((a <= 0.0) != (b <= 0.0)) && std::abs(a - b) < kPi;
  };
  for (std::size_t i = 0; i < theta_cells; ++i) {
    for (std::size_t j = 0; j < nphi; ++j) {
      const double v = d[i * nphi + j];
      if (!std::isfinite(v)) {
        ++out.skipped;
        continue;
      }
      ++out.evaluated;
      out.gap = std::min(out.gap, std::abs(v));
      const double right = d[((i + 1) % theta_cells) * nphi + j];
      if (crosses(v, right)) out.crossing = true;
      if (j + 1 < nphi && crosses(v, d[i * nphi + j + 1])) out.crossing = true;
    }
  }
  if (out.crossing) out.gap = 0.0;
  return out;
}

double cuspless_shoot(double lambda, double phi0) {
  const Table table = Table::cuspless_cardioid();
  PhasePoint x{CusplessCardioid::kHalfWall, -phi0};
  for (int k = 0; k < 4; ++k) x = step(Lambda(lambda), table, x).first;
  return -x.u;
}

std::pair<double, double> cuspless_shoot_min(double lambda, double phi_lo, double phi_hi) {
  constexpr int kSamples = 400;
  const double target = -CusplessCardioid::kHalfWall;
  auto g = [&](double phi) {
    try {
      return cuspless_shoot(lambda, phi) - target;
    } catch (const GeometryError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  const double h = (phi_hi - phi_lo) / kSamples;
  int best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= kSamples; ++k) {
    const double v = g(phi_lo + k * h);
    if (v < best_val) {
      best_val = v;
      best = k;
    }
  }
  // Golden-section refinement on the bracketing cells.
  double a = phi_lo + std::max(0, best - 1) * h;
  double b = phi_lo + std::min(kSamples, best + 1) * h;
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = g(c), fd = g(d);
  while (b - a > 1e-13) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = g(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = g(d);
    }
  }
  const double arg = 0.5 * (a + b);
  const double val = g(arg);
  if (best_val < val) return {best_val, phi_lo + best * h};
  return {val, arg};
}

ShootingCritical cuspless_critical(double lambda_lo, double lambda_hi, double phi_lo, double phi_hi,
                                   double tol) {
  double g_lo = cuspless_shoot_min(lambda_lo, phi_lo, phi_hi).first;
  double g_hi = cuspless_shoot_min(lambda_hi, phi_lo, phi_hi).first;
  if (!((g_lo > 0.0) != (g_hi > 0.0))) {
    throw NoConvergence("tangency is not bracketed by the lambda interval");
  }
  while (lambda_hi - lambda_lo > tol) {
    const double mid = 0.5 * (lambda_lo + lambda_hi);
    const double g_mid = cuspless_shoot_min(mid, phi_lo, phi_hi).first;
    if ((g_mid > 0.0) == (g_lo > 0.0)) {
      lambda_lo = mid;
      g_lo = g_mid;
    } else {
      lambda_hi = mid;
    }
  }
  ShootingCritical out;
  out.lambda = 0.5 * (lambda_lo + lambda_hi);
  out.phi = cuspless_shoot_min(out.lambda, phi_lo, phi_hi).second;
  return out;
}

}  // namespace pinball
