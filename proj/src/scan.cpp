#include "pinball/scan.hpp"

#include <algorithm>
#include <array>
#include <bitset>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "pinball/parallel.hpp"

namespace pinball {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

std::vector<double> grid_values(double lo, double hi, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("grid step must be positive");
  if (!(hi >= lo)) throw std::invalid_argument("grid upper bound below lower bound");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo + static_cast<double>(i) * step;
  if (std::abs(out.back() - hi) < 1e-9 * step) out.back() = hi;
  return out;
}

void SweepSpec::validate() const {
  if (lambdas.empty()) throw std::invalid_argument("empty lambda grid");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] >= 0.0 && lambdas[i] <= 1.0)) throw std::invalid_argument("lambda outside [0, 1]");
    if (i > 0 && !(lambdas[i] > lambdas[i - 1])) throw std::invalid_argument("lambda grid not increasing");
  }
  if (ics == 0) throw std::invalid_argument("need at least one initial condition");
  if (n == 0) throw std::invalid_argument("need at least one collision");
}

IcRun run_initial_condition(Lambda lambda, const Table& table, std::uint64_t seed,
                            std::uint64_t stream, std::size_t n, std::size_t discard,
                            std::size_t tail) {
  IcRun out;
  Rng rng(seed, stream);
  const PhasePoint x0 = random_initial_condition(table, rng);
  const LyapunovEstimate est = lyapunov(lambda, table, x0, n, discard);
  out.nu_plus = est.nu_plus;
  if (est.terminated_early) {
    out.escaped = true;
    return out;
  }
  if (tail == 0) return out;
  const Trajectory traj = trajectory(lambda, table, est.final_state, tail, 0);
  if (traj.terminated()) {
    out.escaped = true;
    return out;
  }
  out.tail.reserve(traj.records.size());
  for (const auto& rec : traj.records) out.tail.push_back(rec.state());
  out.period = detect_period(table, out.tail).value_or(0);
  return out;
}

BifurcationScan bifurcation_scan(const SweepSpec& spec, std::size_t points) {
  spec.validate();
  const std::size_t tail = std::max(points, 2 * kMaxDetectedPeriod);
  const std::size_t tasks = spec.lambdas.size() * spec.ics;
  std::vector<IcRun> runs(tasks);
  parallel_for(tasks, spec.threads, [&](std::size_t k) {
    runs[k] = run_initial_condition(Lambda(spec.lambdas[k / spec.ics]), spec.table, spec.seed, k,
                                    spec.n, spec.discard, tail);
  });
  BifurcationScan out;
  for (std::size_t li = 0; li < spec.lambdas.size(); ++li) {
    bool any = false;
    for (std::size_t ic = 0; ic < spec.ics; ++ic) {
      const IcRun& run = runs[li * spec.ics + ic];
      if (run.escaped) continue;
      any = true;
      for (std::size_t k = run.tail.size() - points; k < run.tail.size(); ++k) {
        out.rows.push_back({spec.lambdas[li], ic, spec.table.plot_coordinate(run.tail[k].u),
                            std::sin(run.tail[k].phi), run.period, run.nu_plus});
      }
    }
    if (!any) out.all_escaped.push_back(spec.lambdas[li]);
  }
  return out;
}

namespace {

// Smallest real eigenvalue; +inf for a complex pair, which cannot cross -1.
double lowest_real_eigenvalue(const StabilityReport& s) {
  if (s.eigenvalues.first.imag() != 0.0) return std::numeric_limits<double>::infinity();
  return std::min(s.eigenvalues.first.real(), s.eigenvalues.second.real());
}

bool past_doubling(const OrbitRecord& o) { return lowest_real_eigenvalue(o.stability) < -1.0; }

bool is_stable(const OrbitRecord& o) { return o.stability.max_modulus() < 1.0; }

// Eigenvector of a real eigenvalue of a 2x2 matrix.
Eigen::Vector2d eigenvector(const Jacobian2& m, double mu) {
  const Eigen::Vector2d a(m(0, 1), mu - m(0, 0));
  const Eigen::Vector2d b(mu - m(1, 1), m(1, 0));
  const Eigen::Vector2d v = a.norm() >= b.norm() ? a : b;
  return v / v.norm();
}

// Largest separation between x_i and x_{i+p}; zero for a repeated p-orbit.
double doubling_split(const Table& table, const OrbitRecord& o) {
  const std::size_t p = o.period / 2;
  double split = 0.0;
  for (std::size_t i = 0; i < p; ++i) split = std::max(split, phase_distance(table, o.points[i], o.points[i + p]));
  return split;
}

std::optional<OrbitRecord> doubled_orbit(const Table& table, const OrbitRecord& base, Lambda lambda) {
  const double mu = lowest_real_eigenvalue(base.stability);
  const Eigen::Vector2d v = eigenvector(base.stability.monodromy, mu);
  const PhasePoint x0 = base.points.front();
  const std::size_t p2 = 2 * base.period;
  for (double eps : {1e-3, 3e-3, 1e-2, 3e-4, 3e-2}) {
    try {
      // The monodromy acts on arc length; shift the parameter accordingly.
      PhasePoint x{table.wrap(x0.u + eps * v.x() / table.speed(x0.u)), x0.phi + eps * v.y()};
      std::vector<PhasePoint> guess{x};
      for (std::size_t k = 1; k < p2; ++k) guess.push_back(x = step(lambda, table, x).first);
      OrbitRecord o = find_periodic_orbit(lambda, table, p2, guess);
      if (doubling_split(table, o) > 1e-7 && is_stable(o)) return o;
    } catch (const std::exception&) {
      // Try the next amplitude.
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<DoublingThreshold> period_doubling_cascade(const Table& table, const OrbitRecord& orbit,
                                                       double lambda_start, double lambda_max,
                                                       const CascadeOptions& options) {
  if (past_doubling(orbit)) throw std::invalid_argument("starting orbit is already past doubling");
  std::vector<DoublingThreshold> out;
  OrbitRecord cur = orbit;
  double l = lambda_start;
  double previous = std::numeric_limits<double>::quiet_NaN();
  while (out.size() < options.levels && l < lambda_max) {
    const double l1 = std::min(l + options.step, lambda_max);
    OrbitRecord next = continue_orbit(table, cur, l, l1, options.step);
    if (!past_doubling(next)) {
      cur = std::move(next);
      l = l1;
      continue;
    }
    double lo = l;
    double hi = l1;
    while (hi - lo > options.tol) {
      const double mid = 0.5 * (lo + hi);
      OrbitRecord o = find_periodic_orbit(Lambda(mid), table, cur.period, cur.points);
      if (past_doubling(o)) {
        hi = mid;
      } else {
        lo = mid;
        cur = std::move(o);
      }
    }
    out.push_back({2 * cur.period, hi});
    if (out.size() == options.levels) break;
    const double spacing = std::isnan(previous) ? options.step : hi - previous;
    previous = hi;
    double delta = std::clamp(spacing / 8.0, 20.0 * options.tol, options.step);
    std::optional<OrbitRecord> child;
    for (int attempt = 0; attempt < 6 && !child; ++attempt, delta *= 0.5) {
      try {
        const OrbitRecord base = find_periodic_orbit(Lambda(hi + delta), table, cur.period, cur.points);
        child = doubled_orbit(table, base, Lambda(hi + delta));
      } catch (const std::exception&) {
      }
      if (child) l = hi + delta;
    }
    if (!child) break;
    cur = std::move(*child);
  }
  return out;
}

std::optional<OrbitRecord> attracting_orbit(Lambda lambda, const Table& table, std::size_t period,
                                            std::uint64_t seed, std::size_t attempts) {
  for (std::uint64_t stream = 0; stream < attempts; ++stream) {
    Rng rng(seed, stream);
    const Trajectory traj = trajectory(lambda, table, random_initial_condition(table, rng),
                                       2 * kMaxDetectedPeriod, 20000);
    if (traj.terminated()) continue;
    std::vector<PhasePoint> pts;
    for (const auto& rec : traj.records) pts.push_back(rec.state());
    if (detect_period(table, pts) != period) continue;
    try {
      OrbitRecord o = find_periodic_orbit(lambda, table, period,
                                          std::vector<PhasePoint>(pts.end() - period, pts.end()));
      if (is_stable(o)) return o;
    } catch (const std::exception&) {
    }
  }
  return std::nullopt;
}

std::vector<CrisisRow> crisis_scan(const SweepSpec& spec) {
  spec.validate();
  if (spec.table.kind() != TableKind::three_pointed_egg) {
    throw std::invalid_argument("crisis scan needs the three-pointed egg");
  }
  constexpr std::size_t kBins = 72;
  const std::size_t tasks = spec.lambdas.size() * spec.ics;
  struct Visit {
    bool chaotic = false;
    bool escaped = false;
    std::bitset<kBins> bins;
  };
  std::vector<Visit> visits(tasks);
  parallel_for(tasks, spec.threads, [&](std::size_t k) {
    const IcRun run = run_initial_condition(Lambda(spec.lambdas[k / spec.ics]), spec.table, spec.seed,
                                            k, spec.n, spec.discard, spec.n);
    Visit& v = visits[k];
    v.escaped = run.escaped;
    v.chaotic = !run.escaped && run.nu_plus > kChaosThreshold;
    if (!v.chaotic) return;
    std::array<std::size_t, kBins> counts{};
    for (const auto& x : run.tail) {
      const auto b = static_cast<std::size_t>((x.u + kPi) / (2.0 * kPi) * kBins);
      ++counts[std::min(b, kBins - 1)];
    }
    // Ignore bins visited by fewer than 0.1% of the samples.
    for (std::size_t b = 0; b < kBins; ++b) v.bins[b] = counts[b] * 1000 >= run.tail.size();
  });
  std::vector<CrisisRow> out;
  for (std::size_t li = 0; li < spec.lambdas.size(); ++li) {
    const Visit* row = &visits[li * spec.ics];
    std::vector<std::size_t> parent(spec.ics);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t a) {
      while (parent[a] != a) a = parent[a] = parent[parent[a]];
      return a;
    };
    std::size_t chaotic = 0;
    std::size_t valid = 0;
    for (std::size_t i = 0; i < spec.ics; ++i) {
      if (row[i].escaped) continue;
      ++valid;
      if (!row[i].chaotic) continue;
      ++chaotic;
      for (std::size_t j = 0; j < i; ++j) {
        if (row[j].chaotic && (row[i].bins & row[j].bins).any()) parent[find(i)] = find(j);
      }
    }
    std::size_t components = 0;
    for (std::size_t i = 0; i < spec.ics; ++i) components += row[i].chaotic && find(i) == i;
    out.push_back({spec.lambdas[li], components,
                   valid == 0 ? 0.0 : static_cast<double>(chaotic) / static_cast<double>(valid)});
  }
  return out;
}

std::vector<PhaseDiagramCell> phase_diagram(const std::vector<double>& alphas, const SweepSpec& spec) {
  spec.validate();
  if (alphas.empty()) throw std::invalid_argument("empty alpha grid");
  const std::size_t nl = spec.lambdas.size();
  const std::size_t cells = alphas.size() * nl;
  std::vector<Table> tables;
  tables.reserve(alphas.size());
  for (double a : alphas) tables.push_back(Table::three_pointed_egg(a));
  std::vector<double> nu(cells * spec.ics, -std::numeric_limits<double>::infinity());
  parallel_for(cells * spec.ics, spec.threads, [&](std::size_t k) {
    const std::size_t cell = k / spec.ics;
    const IcRun run = run_initial_condition(Lambda(spec.lambdas[cell % nl]), tables[cell / nl],
                                            spec.seed, k, spec.n, spec.discard, 0);
    if (!run.escaped) nu[k] = run.nu_plus;
  });
  std::vector<PhaseDiagramCell> out(cells);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    PhaseDiagramCell& c = out[cell];
    c.alpha = alphas[cell / nl];
    c.lambda = spec.lambdas[cell % nl];
    c.max_nu_plus = *std::max_element(nu.begin() + static_cast<std::ptrdiff_t>(cell * spec.ics),
                                      nu.begin() + static_cast<std::ptrdiff_t>((cell + 1) * spec.ics));
    c.any_chaotic = c.max_nu_plus > kChaosThreshold || (c.lambda == 1.0 && c.alpha > 0.0);
  }
  return out;
}

std::vector<PortraitPoint> hamiltonian_portrait(double alpha, std::size_t ics, std::size_t n,
                                                std::uint64_t seed, unsigned threads) {
  const Table egg = Table::three_pointed_egg(alpha);
  std::vector<std::vector<PortraitPoint>> per_ic(ics);
  parallel_for(ics, threads, [&](std::size_t ic) {
    Rng rng(seed, ic);
    const Trajectory traj = trajectory(Lambda(1.0), egg, random_initial_condition(egg, rng), n, 0);
    for (const auto& rec : traj.records) {
      per_ic[ic].push_back({ic, egg.plot_coordinate(rec.frame.u), std::sin(rec.signed_phi())});
    }
  });
  std::vector<PortraitPoint> out;
  for (auto& v : per_ic) out.insert(out.end(), v.begin(), v.end());
  return out;
}

double basin_boundary_fraction(const std::vector<BasinCell>& cells, const BasinGrid& grid) {
  if (cells.size() != grid.width * grid.height) throw std::invalid_argument("basin grid mismatch");
  std::size_t tagged = 0;
  std::size_t mixed = 0;
  auto at = [&](std::size_t i, std::size_t j) { return cells[j * grid.width + i].attractor; };
  for (std::size_t j = 0; j < grid.height; ++j) {
    for (std::size_t i = 0; i < grid.width; ++i) {
      const int a = at(i, j);
      if (a < 0) continue;
      ++tagged;
      // The boundary coordinate is periodic, sin phi is not.
      const std::array<int, 4> nb{at((i + 1) % grid.width, j), at((i + grid.width - 1) % grid.width, j),
                                  j + 1 < grid.height ? at(i, j + 1) : -1, j > 0 ? at(i, j - 1) : -1};
      mixed += std::any_of(nb.begin(), nb.end(), [a](int b) { return b >= 0 && b != a; });
    }
  }
  return tagged == 0 ? 0.0 : static_cast<double>(mixed) / static_cast<double>(tagged);
}

}  // namespace pinball
