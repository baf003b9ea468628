#pragma once

// Derivative of the pinball map along single flights and around periodic
// orbits, plus closed-form stability results for three period-2 orbits.

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "pinball/pinball_map.hpp"

namespace pinball {

/// Tangent map in (arc length, signed phi) coordinates.
using Jacobian2 = Eigen::Matrix2d;
using EigenPair = std::pair<std::complex<double>, std::complex<double>>;

class NotPeriodic : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Derivative of one flight from `prev` (departure) to `rec` (arrival).
///   -[[A, B], [lambda (K1 A + K0), lambda (K1 B + 1)]],
///   A = (t K0 + cos phi0) / cos eta1,  B = t / cos eta1.
[[nodiscard]] Jacobian2 flight_jacobian(Lambda lambda, const CollisionRecord& rec,
                                        const CollisionRecord& prev);

/// Rewrites an arc-length Jacobian in the table's canonical parameter.
[[nodiscard]] Jacobian2 to_canonical(const Table& table, const Jacobian2& j, double u0, double u1);
/// Rewrites an arc-length Jacobian in Birkhoff coordinates (s, sin phi).
[[nodiscard]] Jacobian2 to_birkhoff(const Jacobian2& j, double phi0, double phi1);

/// Eigenvalues of a 2x2 matrix from its trace and determinant; the larger
/// modulus comes first.
[[nodiscard]] EigenPair eigenvalues_from_trace_det(double trace, double det);

enum class Stability { stable_node, stable_focus, unstable, neutral };
[[nodiscard]] std::string to_string(Stability s);

struct StabilityReport {
  Jacobian2 monodromy = Jacobian2::Identity();
  double trace = 0.0;
  double det = 0.0;
  EigenPair eigenvalues;
  Stability classification = Stability::neutral;

  [[nodiscard]] double max_modulus() const;
};

/// Classifies a monodromy matrix; |mu| within `tol` of 1 counts as neutral.
[[nodiscard]] StabilityReport analyse_matrix(const Jacobian2& m, double tol = 1e-9);

/// Monodromy around the orbit x_0 -> ... -> x_{p-1} -> x_0, in arc-length
/// coordinates. Throws NotPeriodic when a step misses the next point by more
/// than `closure_tol`.
[[nodiscard]] StabilityReport orbit_monodromy(Lambda lambda, const Table& table,
                                              const std::vector<PhasePoint>& orbit,
                                              double closure_tol = 1e-10);

// Ellipse: period-2 orbit along the minor axis.
[[nodiscard]] Jacobian2 ellipse_minor_matrix(double a, double lambda);
[[nodiscard]] EigenPair ellipse_minor_eigs(double a, double lambda);
/// Lower boundary of the complex-eigenvalue region. Zero at a = sqrt(2).
[[nodiscard]] double ellipse_lambda_minus(double a);

// Cuspless cardioid: horizontal period-2 orbit along y = 0.
[[nodiscard]] Jacobian2 cuspless_period2_matrix(double lambda);
/// (mu_plus, mu_minus), both real.
[[nodiscard]] std::pair<double, double> cuspless_period2_eigs(double lambda);
[[nodiscard]] double cuspless_lambda_c();

// Three-pointed egg: period-2 orbit joining a vertex to the opposite flat point.
[[nodiscard]] Jacobian2 egg_period2_matrix(double alpha, double lambda);
[[nodiscard]] EigenPair egg_period2_eigs(double alpha, double lambda);
/// alpha at which an eigenvalue of the period-2 orbit crosses -1.
[[nodiscard]] double egg_alpha_tilde(double lambda);
/// alpha above which the eigenvalues become complex; no value at lambda = 1.
[[nodiscard]] std::optional<double> egg_alpha_hat(double lambda);

}  // namespace pinball
