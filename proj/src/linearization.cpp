#include "pinball/linearization.hpp"

#include <algorithm>
#include <cmath>

namespace pinball {

Jacobian2 flight_jacobian(Lambda lambda, const CollisionRecord& rec, const CollisionRecord& prev) {
  const double cos_eta = std::cos(rec.eta);
  if (cos_eta < kTangentGuard) throw TangentHit("degenerate flight jacobian");
  const double t = rec.flight_time;
  const double k0 = prev.frame.curvature;
  const double k1 = rec.frame.curvature;
  const double l = lambda.value();
  const double a = (t * k0 + std::cos(prev.phi)) / cos_eta;
  const double b = t / cos_eta;
  Jacobian2 j;
  j << -a, -b, -l * (k1 * a + k0), -l * (k1 * b + 1.0);
  return j;
}

Jacobian2 to_canonical(const Table& table, const Jacobian2& j, double u0, double u1) {
  const Eigen::Vector2d pre(table.speed(u0), 1.0);
  const Eigen::Vector2d post(1.0 / table.speed(u1), 1.0);
  return post.asDiagonal() * j * pre.asDiagonal();
}

Jacobian2 to_birkhoff(const Jacobian2& j, double phi0, double phi1) {
  const Eigen::Vector2d pre(1.0, 1.0 / std::cos(phi0));
  const Eigen::Vector2d post(1.0, std::cos(phi1));
  return post.asDiagonal() * j * pre.asDiagonal();
}

EigenPair eigenvalues_from_trace_det(double trace, double det) {
  const double half = 0.5 * trace;
  const double disc = half * half - det;
  if (disc >= 0.0) {
    const double root = std::sqrt(disc);
    const double big = half >= 0.0 ? half + root : half - root;
    const double small = big != 0.0 ? det / big : 0.0;
    return {std::complex<double>(big), std::complex<double>(small)};
  }
  const double im = std::sqrt(-disc);
  return {std::complex<double>(half, im), std::complex<double>(half, -im)};
}

std::string to_string(Stability s) {
  switch (s) {
    case Stability::stable_node:
      return "stable-node";
    case Stability::stable_focus:
      return "stable-focus";
    case Stability::unstable:
      return "unstable";
    case Stability::neutral:
      return "neutral";
  }
  return "unknown";
}

double StabilityReport::max_modulus() const {
  return std::max(std::abs(eigenvalues.first), std::abs(eigenvalues.second));
}

StabilityReport analyse_matrix(const Jacobian2& m, double tol) {
  StabilityReport r;
  r.monodromy = m;
  r.trace = m.trace();
  r.det = m.determinant();
  r.eigenvalues = eigenvalues_from_trace_det(r.trace, r.det);
  const double top = r.max_modulus();
  if (top > 1.0 + tol) {
    r.classification = Stability::unstable;
  } else if (top >= 1.0 - tol) {
    r.classification = Stability::neutral;
  } else if (r.eigenvalues.first.imag() != 0.0) {
    r.classification = Stability::stable_focus;
  } else {
    r.classification = Stability::stable_node;
  }
  return r;
}

StabilityReport orbit_monodromy(Lambda lambda, const Table& table,
                                const std::vector<PhasePoint>& orbit, double closure_tol) {
  if (orbit.empty()) throw NotPeriodic("empty orbit");
  Jacobian2 m = Jacobian2::Identity();
  for (std::size_t i = 0; i < orbit.size(); ++i) {
    const PhasePoint& x = orbit[i];
    const PhasePoint& target = orbit[(i + 1) % orbit.size()];
    const auto [next, rec] = step(lambda, table, x);
    const double du = std::abs(table.param_difference(next.u, target.u));
    const double dphi = std::abs(next.phi - target.phi);
    if (du > closure_tol || dphi > closure_tol) {
      throw NotPeriodic("orbit does not close at point " + std::to_string(i));
    }
    m = flight_jacobian(lambda, rec, departure_record(table, x)) * m;
  }
  return analyse_matrix(m);
}

Jacobian2 ellipse_minor_matrix(double a, double lambda) {
  const double a2 = a * a;
  const double a4 = a2 * a2;
  const double l = lambda;
  Jacobian2 m;
  m << (4.0 * (1.0 + l) * (1.0 - a2) + a4) / a4, 2.0 * (1.0 + l) * (a2 - 2.0) / a2,
      -2.0 * l * (1.0 + l) * (a2 - 1.0) * (a2 - 2.0) / (a4 * a2),
      l * (4.0 * (1.0 - a2) * (1.0 + l) + l * a4) / a4;
  return m;
}

EigenPair ellipse_minor_eigs(double a, double lambda) {
  const double a2 = a * a;
  const double a4 = a2 * a2;
  const double l = lambda;
  const double g = (a2 - 2.0) * (a2 - 2.0);
  const double p1 = g * l * l - 8.0 * (a2 - 1.0) * l + g;
  const double p2 = (1.0 + l) * (1.0 + l) * g * (g * l * l - 2.0 * (a4 + 4.0 * a2 - 4.0) * l + g);
  const std::complex<double> root = std::sqrt(std::complex<double>(p2));
  return {(p1 + root) / (2.0 * a4), (p1 - root) / (2.0 * a4)};
}

double ellipse_lambda_minus(double a) {
  // (a^4 + 4a^2 - 4 - 4a^2 sqrt(a^2 - 1)) / (a^2 - 2)^2, rationalized so that
  // a = sqrt(2) gives 0 instead of 0/0.
  const double a2 = a * a;
  const double g = (a2 - 2.0) * (a2 - 2.0);
  return g / (a2 * a2 + 4.0 * a2 - 4.0 + 4.0 * a2 * std::sqrt(a2 - 1.0));
}

Jacobian2 cuspless_period2_matrix(double lambda) {
  const double l = lambda;
  Jacobian2 m;
  m << -4.0 * (27.0 * l + 11.0), 144.0 * (l + 1.0), 33.0 * l * (l + 1.0), -4.0 * l * (11.0 * l + 27.0);
  return m / 64.0;
}

std::pair<double, double> cuspless_period2_eigs(double lambda) {
  const double l = lambda;
  const double base = -11.0 - 54.0 * l - 11.0 * l * l;
  const double root = std::sqrt(11.0) * (1.0 + l) * std::sqrt(11.0 + 86.0 * l + 11.0 * l * l);
  return {(base + root) / 32.0, (base - root) / 32.0};
}

double cuspless_lambda_c() { return (27.0 - 8.0 * std::sqrt(11.0)) / 5.0; }

Jacobian2 egg_period2_matrix(double alpha, double lambda) {
  const double s = alpha;
  const double s2 = s * s;
  const double s4 = s2 * s2;
  const double l = lambda;
  const double q = (s2 - 1.0) * (s2 - 1.0);
  const double m1 = (s - 1.0) * (s - 1.0);
  const double p1 = (s + 1.0) * (s + 1.0);
  Jacobian2 m;
  m << (1.0 + s4 - 2.0 * s2 * (163.0 + 162.0 * l)) / q,
      2.0 * (s2 + 18.0 * s - 1.0) * (1.0 + l) / m1,
      -162.0 * s2 * (s2 - 18.0 * s - 1.0) * l * (l + 1.0) / (m1 * p1 * p1),
      (l * l + s4 * l * l - 2.0 * s2 * l * (162.0 + 163.0 * l)) / q;
  return m;
}

EigenPair egg_period2_eigs(double alpha, double lambda) {
  const Jacobian2 m = egg_period2_matrix(alpha, lambda);
  return eigenvalues_from_trace_det(m.trace(), m.determinant());
}

double egg_alpha_tilde(double lambda) {
  const double l = lambda;
  const double num = 82.0 + 162.0 * l + 82.0 * l * l - 9.0 * (1.0 + l) * std::sqrt(83.0 + 162.0 * l + 83.0 * l * l);
  return std::sqrt(num / (1.0 + l * l));
}

std::optional<double> egg_alpha_hat(double lambda) {
  const double l = lambda;
  if (l == 1.0) return std::nullopt;
  return (9.0 * (1.0 + l) - std::sqrt(82.0 + 160.0 * l + 82.0 * l * l)) / (l - 1.0);
}

}  // namespace pinball
