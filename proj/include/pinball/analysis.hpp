#pragma once

// Lyapunov exponents, attractor sampling, basin classification, periodic
// orbit search and the two specialized existence tests.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pinball/linearization.hpp"
#include "pinball/pinball_map.hpp"
#include "pinball/random.hpp"

namespace pinball {

/// Threshold on nu_plus above which a trajectory counts as chaotic.
inline constexpr double kChaosThreshold = 1e-3;
/// Newton convergence threshold on the multiple-shooting residual.
inline constexpr double kNewtonTolerance = 1e-10;
/// Recurrence tolerance for period detection.
inline constexpr double kPeriodTolerance = 1e-6;
inline constexpr std::size_t kMaxDetectedPeriod = 64;

inline constexpr std::size_t kDefaultDiscard = 5000;
inline constexpr std::size_t kDefaultSamples = 100000;

class NoConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LyapunovEstimate {
  double nu_plus = 0.0;
  double nu_minus = 0.0;
  std::size_t n_used = 0;
  bool terminated_early = false;
  std::string reason;
  /// Mean of log(lambda cos phi0 / cos eta1) over the same collisions.
  double mean_log_det = 0.0;
  PhasePoint final_state;
};

/// Two exponents from tangent vectors propagated by flight_jacobian, with
/// Gram-Schmidt renormalization after every collision.
[[nodiscard]] LyapunovEstimate lyapunov(Lambda lambda, const Table& table, const PhasePoint& x0,
                                        std::size_t n, std::size_t discard);

struct PhaseCloud {
  std::vector<std::array<double, 2>> points;  // (plot coordinate, sin phi)
  Termination termination = Termination::none;
  std::string reason;
};

[[nodiscard]] PhaseCloud sample_attractor(Lambda lambda, const Table& table, const PhasePoint& x0,
                                          std::size_t n, std::size_t discard);

/// Phase-space distance using the plot coordinate (wrapped) and sin phi.
[[nodiscard]] double phase_distance(const Table& table, const PhasePoint& a, const PhasePoint& b);

/// Smallest p <= max_period such that the tail of `points` recurs under p
/// steps within tol. Needs at least 2 * max_period points.
[[nodiscard]] std::optional<std::size_t> detect_period(const Table& table,
                                                       const std::vector<PhasePoint>& points,
                                                       double tol = kPeriodTolerance,
                                                       std::size_t max_period = kMaxDetectedPeriod);

/// Uniform interior point, uniform heading, first boundary hit reflected elastically.
[[nodiscard]] PhasePoint random_initial_condition(const Table& table, Rng& rng);

enum class BasinLabel { chaotic, periodic, escaped };
[[nodiscard]] std::string to_string(BasinLabel label);

struct BasinGrid {
  std::size_t width = 2;   // cells along the boundary coordinate
  std::size_t height = 2;  // cells along sin phi
};

struct BasinCell {
  double coord = 0.0;
  double sin_phi = 0.0;
  BasinLabel label = BasinLabel::escaped;
  double nu_plus = 0.0;
  int attractor = -1;  // index into the known attractors, -1 if none matched
};

struct BasinOptions {
  std::size_t n = 2000;
  std::size_t discard = kDefaultDiscard;
  unsigned threads = 0;
  /// Known periodic attractors; a terminal point within `match_tol` of one of
  /// their points tags the cell with its index.
  std::vector<std::vector<PhasePoint>> attractors;
  double match_tol = 1e-4;
};

/// Cell centres in row-major order: row j is sin phi, column i the coordinate.
[[nodiscard]] std::vector<BasinCell> classify_basin(Lambda lambda, const Table& table,
                                                    const BasinGrid& grid,
                                                    const BasinOptions& options);

struct OrbitRecord {
  std::size_t period = 0;
  std::vector<PhasePoint> points;
  double residual = 0.0;
  std::size_t iterations = 0;
  StabilityReport stability;
};

/// Multiple-shooting Newton on x_{i+1} = T(x_i), damped by halving the step
/// whenever the residual grows.
[[nodiscard]] OrbitRecord find_periodic_orbit(Lambda lambda, const Table& table, std::size_t period,
                                              const std::vector<PhasePoint>& guess);

/// Follows an orbit from `from` to `to` in parameter steps of at most `max_step`,
/// seeding each Newton solve with the previous solution.
[[nodiscard]] OrbitRecord continue_orbit(const Table& table, const OrbitRecord& orbit, double from,
                                         double to, double max_step);

/// Elliptic period-3 orbit of the egg at lambda = 1, joining the three flat
/// points with |sin phi| = 1/2; `sign` selects the orientation.
[[nodiscard]] std::vector<PhasePoint> egg_triangle_orbit(int sign);

/// Attracting period-3 orbit of the egg, found by continuation from lambda = 1.
[[nodiscard]] OrbitRecord egg_period3_orbit(double alpha, double lambda, int sign = 1);

struct Period3Gap {
  double gap = 0.0;  // min |pi T^3 - theta0| over the grid; 0 when a crossing is bracketed
  bool crossing = false;
  double phi_bound = 0.0;  // |phi| range searched
  std::size_t skipped = 0;
  std::size_t evaluated = 0;
};

/// Distance between the projected third iterate and the diagonal over a
/// (theta, phi) grid. The phi grid spans the angles that survive repeated
/// application of the map, starting from |phi| <= lambda pi / 2 and shrinking
/// to a fixed point; lambda = 0 reduces to the slap map.
[[nodiscard]] Period3Gap period3_gap(Lambda lambda, const Table& table, std::size_t theta_cells,
                                     std::size_t phi_cells, unsigned threads = 0);

/// Fourth-collision arc position for a launch from the upper join of the
/// cuspless cardioid. Angles and arc lengths use the counterclockwise
/// convention in which that join sits at s = -sqrt(3)/4.
[[nodiscard]] double cuspless_shoot(double lambda, double phi0);

struct ShootingCritical {
  double lambda = 0.0;
  double phi = 0.0;
};

/// Minimum over phi in [phi_lo, phi_hi] of s4 - s_join, with its argmin.
[[nodiscard]] std::pair<double, double> cuspless_shoot_min(double lambda, double phi_lo,
                                                           double phi_hi);

/// Bisection on lambda for the tangency of s4(phi) with the join.
[[nodiscard]] ShootingCritical cuspless_critical(double lambda_lo, double lambda_hi, double phi_lo,
                                                 double phi_hi, double tol = 1e-9);

}  // namespace pinball
