#pragma once

// Parameter sweeps over lambda (and alpha for the egg), with per-initial-
// condition random streams so that results do not depend on thread count.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pinball/analysis.hpp"

namespace pinball {

/// Inclusive grid lo, lo + step, ..., hi. Throws on step <= 0 or hi < lo.
[[nodiscard]] std::vector<double> grid_values(double lo, double hi, double step);

struct SweepSpec {
  Table table = Table::circle();
  std::vector<double> lambdas;
  std::size_t ics = 100;
  std::size_t n = kDefaultSamples;
  std::size_t discard = kDefaultDiscard;
  std::uint64_t seed = 1;
  unsigned threads = 0;

  /// Throws std::invalid_argument unless the lambda grid is nonempty,
  /// strictly increasing and inside [0, 1], and ics > 0.
  void validate() const;
};

/// Outcome of one random initial condition.
struct IcRun {
  bool escaped = false;
  double nu_plus = 0.0;
  std::size_t period = 0;  // 0 when no period <= kMaxDetectedPeriod was detected
  std::vector<PhasePoint> tail;
};

/// Random initial condition from stream `stream`, a Lyapunov run over
/// `n` collisions after `discard`, then `tail` further states for period detection.
[[nodiscard]] IcRun run_initial_condition(Lambda lambda, const Table& table, std::uint64_t seed,
                                          std::uint64_t stream, std::size_t n, std::size_t discard,
                                          std::size_t tail);

struct BifurcationRow {
  double lambda = 0.0;
  std::size_t ic = 0;
  double coord = 0.0;
  double sin_phi = 0.0;
  std::size_t period = 0;
  double nu_plus = 0.0;
};

struct BifurcationScan {
  std::vector<BifurcationRow> rows;
  std::vector<double> all_escaped;  // lambdas at which every initial condition escaped
};

/// For each lambda and initial condition, `points` attractor samples.
[[nodiscard]] BifurcationScan bifurcation_scan(const SweepSpec& spec, std::size_t points = 64);

struct DoublingThreshold {
  std::size_t period = 0;  // period of the orbit born at `lambda`
  double lambda = 0.0;
};

struct CascadeOptions {
  double step = 2e-3;
  double tol = 1e-7;
  std::size_t levels = 3;
};

/// Follows `orbit` upward from `lambda_start` and bisects on the loss of
/// stability through an eigenvalue -1. At each threshold the doubled orbit
/// is located and followed in turn.
[[nodiscard]] std::vector<DoublingThreshold> period_doubling_cascade(const Table& table,
                                                                     const OrbitRecord& orbit,
                                                                     double lambda_start,
                                                                     double lambda_max,
                                                                     const CascadeOptions& options = {});

/// Attracting periodic orbit reached from a random initial condition; the
/// first stream whose trajectory settles on `period` is polished by Newton.
[[nodiscard]] std::optional<OrbitRecord> attracting_orbit(Lambda lambda, const Table& table,
                                                          std::size_t period, std::uint64_t seed,
                                                          std::size_t attempts = 64);

struct CrisisRow {
  double lambda = 0.0;
  std::size_t component_count = 0;
  double chaotic_fraction = 0.0;
};

/// For each lambda, the fraction of chaotic initial conditions and the number
/// of distinct chaotic attractors among them. Two trajectories share an
/// attractor when their boundary-angle occupancy (72 bins) overlaps.
[[nodiscard]] std::vector<CrisisRow> crisis_scan(const SweepSpec& spec);

struct PhaseDiagramCell {
  double alpha = 0.0;
  double lambda = 0.0;
  bool any_chaotic = false;
  double max_nu_plus = 0.0;
};

/// Egg (alpha, lambda) lattice, alpha-major. The lambda = 1 column is
/// chaotic for every alpha > 0 by rule.
[[nodiscard]] std::vector<PhaseDiagramCell> phase_diagram(const std::vector<double>& alphas,
                                                          const SweepSpec& spec);

struct PortraitPoint {
  std::size_t ic = 0;
  double coord = 0.0;
  double sin_phi = 0.0;
};

/// Conservative (lambda = 1) egg trajectories from `ics` random initial conditions.
[[nodiscard]] std::vector<PortraitPoint> hamiltonian_portrait(double alpha, std::size_t ics,
                                                              std::size_t n, std::uint64_t seed,
                                                              unsigned threads = 0);

/// Fraction of attractor-tagged basin cells with a 4-neighbour tagged with a
/// different attractor.
[[nodiscard]] double basin_boundary_fraction(const std::vector<BasinCell>& cells,
                                             const BasinGrid& grid);

}  // namespace pinball
