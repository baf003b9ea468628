#include "pinball/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace pinball {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kWallX = -0.25;
constexpr double kJoinAngle = 2.0 * std::numbers::pi / 3.0;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double wrap_angle(double u) { return u - kTwoPi * std::floor((u + kPi) / kTwoPi); }

double check_cusp(double theta) {
  const double w = wrap_angle(theta);
  if (kPi - std::abs(w) < kCuspGuard) throw CuspHit("collision at the cardioid cusp");
  return w;
}

// Cardioid pieces shared by the cusped and cuspless tables. With c = cos(theta/2)
// the unit counterclockwise tangent is exactly (-sin(3theta/2), cos(3theta/2)).
Vec2 cardioid_point(double theta) {
  const double c = std::cos(0.5 * theta);
  const double rho = 2.0 * c * c;
  return {rho * std::cos(theta), rho * std::sin(theta)};
}

double cardioid_curvature(double theta) { return -3.0 / (4.0 * std::cos(0.5 * theta)); }

Vec2 cardioid_ccw_tangent(double theta) {
  return {-std::sin(1.5 * theta), std::cos(1.5 * theta)};
}

// Arc-side polar angle of a cuspless-cardioid arc length |s| > sqrt(3)/4.
double cuspless_theta(double s) {
  const double mag = 2.0 * std::asin((CusplessCardioid::kHalfLength - std::abs(s)) / 4.0);
  return s >= 0.0 ? mag : -mag;
}

double cuspless_rho(double theta) {
  if (std::abs(theta) <= kJoinAngle) return 1.0 + std::cos(theta);
  return -1.0 / (4.0 * std::cos(theta));
}

double cuspless_rho_prime(double theta) {
  if (std::abs(theta) <= kJoinAngle) return -std::sin(theta);
  const double c = std::cos(theta);
  return -std::sin(theta) / (4.0 * c * c);
}

struct EggRadius {
  double rho, d1, d2;
};

EggRadius egg_radius(double alpha, double theta) {
  const double c3 = std::cos(3.0 * theta);
  const double s3 = std::sin(3.0 * theta);
  return {1.0 + alpha * c3, -3.0 * alpha * s3, -9.0 * alpha * c3};
}

BoundaryFrame make_frame(const Vec2& q, const Vec2& t, bool counterclockwise, double k, double u) {
  BoundaryFrame f;
  f.q = q;
  f.t = t;
  f.n = counterclockwise ? Vec2(-t.y(), t.x()) : Vec2(t.y(), -t.x());
  f.curvature = k;
  f.u = u;
  return f;
}

BoundaryFrame frame_of(const Circle&, double u) {
  u = wrap_angle(u);
  const Vec2 q(std::cos(u), std::sin(u));
  return make_frame(q, Vec2(-q.y(), q.x()), true, -1.0, u);
}

BoundaryFrame frame_of(const Ellipse& e, double u) {
  u = wrap_angle(u);
  const double s = std::sin(u), c = std::cos(u);
  const Vec2 d(-e.a * s, c);
  const double speed = d.norm();
  return make_frame(Vec2(e.a * c, s), d / speed, true, -e.a / (speed * speed * speed), u);
}

BoundaryFrame frame_of(const Cardioid&, double u) {
  u = check_cusp(u);
  return make_frame(cardioid_point(u), cardioid_ccw_tangent(u), true, cardioid_curvature(u), u);
}

BoundaryFrame frame_of(const CusplessCardioid&, double s) {
  constexpr double h = CusplessCardioid::kHalfWall;
  if (std::abs(s) <= h) return make_frame(Vec2(kWallX, s), Vec2(0.0, 1.0), false, 0.0, s);
  const double theta = cuspless_theta(s);
  return make_frame(cardioid_point(theta), -cardioid_ccw_tangent(theta), false,
                    cardioid_curvature(theta), s);
}

BoundaryFrame frame_of(const ThreePointedEgg& egg, double u) {
  u = wrap_angle(u);
  const auto [rho, d1, d2] = egg_radius(egg.alpha, u);
  const double c = std::cos(u), s = std::sin(u);
  const Vec2 d(d1 * c - rho * s, d1 * s + rho * c);
  const double g = rho * rho + d1 * d1;
  const double k = -(rho * rho + 2.0 * d1 * d1 - rho * d2) / (g * std::sqrt(g));
  return make_frame(Vec2(rho * c, rho * s), d / std::sqrt(g), true, k, u);
}

double wrap_cuspless(double s) {
  constexpr double c = CusplessCardioid::kHalfLength;
  const double r = std::fmod(c - s, 2.0 * c);
  return c - (r < 0.0 ? r + 2.0 * c : r);
}

// Safeguarded Newton on a bracket with f(lo) <= 0 <= f(hi).
template <class F, class DF>
double refine_root(F&& f, DF&& df, double lo, double hi, double f_lo, double f_hi) {
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  double x = lo - f_lo * (hi - lo) / (f_hi - f_lo);
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double fx = f(x);
    if (fx == 0.0) return x;
    if (fx < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double width = hi - lo;
    if (width <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) {
      return x;
    }
    const double d = df(x);
    double next = d != 0.0 ? x - fx / d : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-16 * std::max(1.0, std::abs(x)) && std::abs(fx) < 1e-12) {
      return next;
    }
    x = next;
  }
  return x;
}

// Near the cusp the exterior is a thin sliver around the negative x-axis and
// the ray residual has two roots closer together than its rounding noise.
// A ray crossing that axis must enter the sliver through the branch facing
// it, so the crossing is solved on that branch in the parameter instead.
double cusp_branch_param(const Vec2& q, const Vec2& v, const Vec2& p) {
  const double guess = std::atan2(p.y(), p.x());
  if (v.y() == 0.0) return guess;
  const double side = v.y() < 0.0 ? 1.0 : -1.0;
  auto g = [&](double eps) {
    const Vec2 d = cardioid_point(side * (kPi - eps)) - q;
    return d.x() * v.y() - d.y() * v.x();
  };
  const double eps0 = std::max(std::sqrt(2.0 * p.norm()), 1e-12);
  double lo = 0.0, hi = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int k = -12; k < 12; ++k) {
    const double a = eps0 * std::ldexp(1.0, k);
    const double b = 2.0 * a;
    if (b > 0.5) break;
    if ((g(a) < 0.0) != (g(b) < 0.0)) {
      const double dist = std::abs(std::log(a / eps0) + std::log(b / eps0));
      if (dist < best) {
        best = dist;
        lo = a;
        hi = b;
      }
    }
  }
  if (!std::isfinite(best)) return guess;
  const bool lo_negative = g(lo) < 0.0;
  for (int iter = 0; iter < 200 && hi - lo > 1e-16 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if ((g(mid) < 0.0) == lo_negative) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return side * (kPi - 0.5 * (lo + hi));
}

constexpr double kCuspRadius = 1e-2;

Flight finish_at(const Table& table, const Vec2& q, double u, const Vec2& v) {
  Flight out;
  out.frame = frame_at(table, u);
  if (-v.dot(out.frame.n) < kTangentGuard) throw TangentHit("tangential collision");
  out.time = (out.frame.q - q).norm();
  return out;
}

Flight finish(const Table& table, const Vec2& q, const Vec2& p, const Vec2& v) {
  return finish_at(table, q, table.param_of(p), v);
}

// Where the ray meets the negative x-axis close to the cusp before reaching the
// candidate root, or the candidate itself lies by the cusp, the true collision
// is the sliver entry.
std::optional<Flight> cusp_sliver_hit(const Table& table, const Vec2& q, const Vec2& v, double tau) {
  if (table.kind() != TableKind::cardioid) return std::nullopt;
  if (v.y() == 0.0) {
    if (q.y() == 0.0 && q.x() > 0.0 && v.x() < 0.0) throw CuspHit("ray along the axis into the cusp");
    return std::nullopt;
  }
  const double tau_axis = -q.y() / v.y();
  const bool by_cusp = (q + tau * v).squaredNorm() < kCuspRadius * kCuspRadius;
  if (!(tau_axis > kDepartGuard && (tau_axis <= tau || by_cusp))) return std::nullopt;
  const double x_axis = q.x() + tau_axis * v.x();
  if (!(x_axis < 0.0 && x_axis > -kCuspRadius)) return std::nullopt;
  return finish_at(table, q, cusp_branch_param(q, v, Vec2(x_axis, 0.0)), v);
}

double far_circle_root(const Vec2& q, const Vec2& v, double radius) {
  const double b = q.dot(v);
  const double disc = b * b - (q.squaredNorm() - radius * radius);
  if (disc < 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double root = std::sqrt(disc);
  if (b <= 0.0) return -b + root;
  return (radius * radius - q.squaredNorm()) / (b + root);
}

// Step scale for the convex tables. A ray crosses their boundary once, so an
// overlong step still brackets the right root.
double residual_lipschitz(const Table& table) {
  switch (table.kind()) {
    case TableKind::circle:
    case TableKind::ellipse:
      return 2.2;
    default:
      return 1.5;
  }
}

Flight conic_collision(const Table& table, double a, const Vec2& q, const Vec2& v, bool on_boundary) {
  const Vec2 p(q.x() / a, q.y());
  const Vec2 w(v.x() / a, v.y());
  const double qa = w.squaredNorm();
  const double qb = p.dot(w);
  const double qc = p.squaredNorm() - 1.0;
  const double disc = std::max(0.0, qb * qb - qa * qc);
  const double root = std::sqrt(disc);
  const double tau = qb <= 0.0 ? (-qb + root) / qa : -qc / (qb + root);
  if (on_boundary && !(tau > kDepartGuard)) throw TangentHit("grazing departure");
  return finish(table, q, q + tau * v, v);
}

Flight cardioid_collision(const Table& table, const Vec2& q, const Vec2& v) {
  // residual((q + tau v)) = tau * (tau^3 + c2 tau^2 + c1 tau + c0) for boundary q.
  const double qv = q.dot(v);
  const double w0 = q.squaredNorm() - q.x();
  const double w1 = 2.0 * qv - v.x();
  const double c0 = 2.0 * w0 * w1 - 2.0 * qv;
  const double c1 = w1 * w1 + 2.0 * w0 - 1.0;
  const double c2 = 2.0 * w1;
  if (!(c0 < 0.0)) throw TangentHit("grazing departure");
  auto cubic = [&](double x) { return ((x + c2) * x + c1) * x + c0; };
  auto dcubic = [&](double x) { return (3.0 * x + 2.0 * c2) * x + c1; };

  std::array<double, 4> knots{};
  std::size_t count = 0;
  knots[count++] = 0.0;
  const double disc = c2 * c2 - 3.0 * c1;
  if (disc > 0.0) {
    const double r = std::sqrt(disc);
    for (double crit : {(-c2 - r) / 3.0, (-c2 + r) / 3.0}) {
      if (crit > 0.0) knots[count++] = crit;
    }
  }
  knots[count++] = far_circle_root(q, v, 2.05);

  double lo = knots[0];
  double f_lo = c0;
  for (std::size_t i = 1; i < count; ++i) {
    const double hi = knots[i];
    const double f_hi = cubic(hi);
    if (f_hi >= 0.0) {
      const double tau = refine_root(cubic, dcubic, lo, hi, f_lo, f_hi);
      if (!(tau > kDepartGuard)) throw TangentHit("grazing departure");
      if (auto hit = cusp_sliver_hit(table, q, v, tau)) return *hit;
      // A root by the cusp that the axis test rejects is rounding noise.
      if ((q + tau * v).squaredNorm() < kCuspRadius * kCuspRadius) break;
      return finish(table, q, q + tau * v, v);
    }
    lo = hi;
    f_lo = f_hi;
  }
  return next_collision_generic(table, q, v, table.param_of(q));
}

// Convex, star-shaped tables: the residual changes sign once along the ray,
// between the departure and the bounding circle.
Flight convex_collision(const Table& table, const Vec2& q, const Vec2& v, bool on_boundary) {
  auto f = [&](double tau) { return table.residual(q + tau * v); };
  auto df = [&](double tau) { return table.residual_gradient(q + tau * v).dot(v); };
  const double lo = on_boundary ? kDepartGuard : 0.0;
  const double hi = far_circle_root(q, v, table.bounding_radius() * (1.0 + 1e-12));
  const double f_lo = f(lo);
  const double f_hi = f(hi);
  if (!(f_lo < 0.0 && f_hi >= 0.0)) {
    return next_collision_generic(table, q, v, on_boundary ? std::optional<double>(0.0) : std::nullopt);
  }
  return finish(table, q, q + refine_root(f, df, lo, hi, f_lo, f_hi) * v, v);
}

Flight egg_collision(const Table& table, double alpha, const Vec2& q, const Vec2& v,
                     bool on_boundary) {
  auto f = [&](double tau) { return table.residual(q + tau * v); };
  auto df = [&](double tau) { return table.residual_gradient(q + tau * v).dot(v); };
  const double start = on_boundary ? kDepartGuard : 0.0;
  double hi = far_circle_root(q, v, (1.0 + alpha) * (1.0 + 1e-13));
  double lo = far_circle_root(q, v, 1.0 - alpha);
  if (!(lo > start)) lo = start;
  const double f_lo = f(lo);
  const double f_hi = f(hi);
  if (!(f_lo <= 0.0 && f_hi >= 0.0 && lo <= hi)) {
    return next_collision_generic(table, q, v, on_boundary ? std::optional<double>(0.0) : std::nullopt);
  }
  if (on_boundary && lo == start && f_lo == 0.0) throw TangentHit("grazing departure");
  const double tau = refine_root(f, df, lo, hi, f_lo, f_hi);
  return finish(table, q, q + tau * v, v);
}

}  // namespace

Table Table::circle() { return Table(Circle{}); }

Table Table::ellipse(double a) {
  if (!(a >= 1.0) || !std::isfinite(a)) throw std::invalid_argument("ellipse requires a >= 1");
  return Table(Ellipse{a});
}

Table Table::cardioid() { return Table(Cardioid{}); }

Table Table::cuspless_cardioid() { return Table(CusplessCardioid{}); }

Table Table::three_pointed_egg(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 0.1)) {
    throw std::invalid_argument("three-pointed egg requires 0 <= alpha <= 0.1");
  }
  return Table(ThreePointedEgg{alpha});
}

Table Table::from_name(std::string_view name, double a, double alpha) {
  if (name == "circle") return circle();
  if (name == "ellipse") return ellipse(a);
  if (name == "cardioid") return cardioid();
  if (name == "cuspless") return cuspless_cardioid();
  if (name == "egg") return three_pointed_egg(alpha);
  throw std::invalid_argument("unknown table '" + std::string(name) + "'");
}

TableKind Table::kind() const {
  return std::visit(Overloaded{[](const Circle&) { return TableKind::circle; },
                               [](const Ellipse&) { return TableKind::ellipse; },
                               [](const Cardioid&) { return TableKind::cardioid; },
                               [](const CusplessCardioid&) { return TableKind::cuspless_cardioid; },
                               [](const ThreePointedEgg&) { return TableKind::three_pointed_egg; }},
                    shape_);
}

std::string Table::name() const {
  switch (kind()) {
    case TableKind::circle:
      return "circle";
    case TableKind::ellipse:
      return "ellipse";
    case TableKind::cardioid:
      return "cardioid";
    case TableKind::cuspless_cardioid:
      return "cuspless";
    case TableKind::three_pointed_egg:
      return "egg";
  }
  return "unknown";
}

double Table::period() const {
  return kind() == TableKind::cuspless_cardioid ? 2.0 * CusplessCardioid::kHalfLength : kTwoPi;
}

double Table::wrap(double u) const {
  return kind() == TableKind::cuspless_cardioid ? wrap_cuspless(u) : wrap_angle(u);
}

double Table::param_difference(double to, double from) const {
  const double p = period();
  const double d = to - from;
  return d - p * std::floor(d / p + 0.5);
}

bool Table::plots_arc_length() const {
  const auto k = kind();
  return k == TableKind::circle || k == TableKind::cardioid || k == TableKind::cuspless_cardioid;
}

double Table::plot_coordinate(double u) const {
  if (kind() == TableKind::cardioid) return 4.0 * std::sin(0.5 * wrap(u));
  return wrap(u);
}

double Table::param_from_plot_coordinate(double c) const {
  if (kind() == TableKind::cardioid) return 2.0 * std::asin(std::clamp(c / 4.0, -1.0, 1.0));
  return wrap(c);
}

std::pair<double, double> Table::plot_range() const {
  switch (kind()) {
    case TableKind::cardioid:
      return {-4.0, 4.0};
    case TableKind::cuspless_cardioid:
      return {-CusplessCardioid::kHalfLength, CusplessCardioid::kHalfLength};
    default:
      return {-kPi, kPi};
  }
}

double Table::residual(const Vec2& p) const {
  return std::visit(
      Overloaded{[&](const Circle&) { return p.squaredNorm() - 1.0; },
                 [&](const Ellipse& e) {
                   const double x = p.x() / e.a;
                   return x * x + p.y() * p.y() - 1.0;
                 },
                 [&](const Cardioid&) {
                   // (r^2 - x)^2 - r^2 = (r^2 + (r - x)) (r^2 - (r + x)), with the
                   // cancelling sum rewritten so the sign is exact near the cusp.
                   const double r = p.norm();
                   const double y2 = p.y() * p.y();
                   const double r_minus_x = p.x() > 0.0 ? y2 / (r + p.x()) : r - p.x();
                   const double r_plus_x = p.x() < 0.0 ? y2 / (r - p.x()) : r + p.x();
                   return (r * r + r_minus_x) * (r * r - r_plus_x);
                 },
                 [&](const CusplessCardioid&) {
                   return p.norm() - cuspless_rho(std::atan2(p.y(), p.x()));
                 },
                 [&](const ThreePointedEgg& egg) {
                   return p.norm() - egg_radius(egg.alpha, std::atan2(p.y(), p.x())).rho;
                 }},
      shape_);
}

Vec2 Table::residual_gradient(const Vec2& p) const {
  auto polar = [&](double rho_prime) -> Vec2 {
    const double r2 = p.squaredNorm();
    if (r2 == 0.0) return Vec2::Zero();
    const double r = std::sqrt(r2);
    return p / r - rho_prime * Vec2(-p.y(), p.x()) / r2;
  };
  return std::visit(
      Overloaded{[&](const Circle&) -> Vec2 { return 2.0 * p; },
                 [&](const Ellipse& e) -> Vec2 {
                   return {2.0 * p.x() / (e.a * e.a), 2.0 * p.y()};
                 },
                 [&](const Cardioid&) -> Vec2 {
                   const double w = p.squaredNorm() - p.x();
                   return {2.0 * w * (2.0 * p.x() - 1.0) - 2.0 * p.x(), 4.0 * w * p.y() - 2.0 * p.y()};
                 },
                 [&](const CusplessCardioid&) -> Vec2 {
                   return polar(cuspless_rho_prime(std::atan2(p.y(), p.x())));
                 },
                 [&](const ThreePointedEgg& egg) -> Vec2 {
                   return polar(egg_radius(egg.alpha, std::atan2(p.y(), p.x())).d1);
                 }},
      shape_);
}

double Table::bounding_radius() const {
  return std::visit(Overloaded{[](const Circle&) { return 1.0; },
                               [](const Ellipse& e) { return e.a; },
                               [](const Cardioid&) { return 2.0; },
                               [](const CusplessCardioid&) { return 2.0; },
                               [](const ThreePointedEgg& egg) { return 1.0 + egg.alpha; }},
                    shape_);
}

double Table::param_of(const Vec2& p) const {
  return std::visit(
      Overloaded{[&](const Circle&) { return std::atan2(p.y(), p.x()); },
                 [&](const Ellipse& e) { return std::atan2(p.y(), p.x() / e.a); },
                 [&](const Cardioid&) { return std::atan2(p.y(), p.x()); },
                 [&](const CusplessCardioid&) {
                   constexpr double h = CusplessCardioid::kHalfWall;
                   const double theta = std::atan2(p.y(), p.x());
                   if (std::abs(theta) > kJoinAngle) return std::clamp(p.y(), -h, h);
                   const double mag =
                       CusplessCardioid::kHalfLength - 4.0 * std::sin(0.5 * std::abs(theta));
                   return theta < 0.0 ? -mag : mag;
                 },
                 [&](const ThreePointedEgg&) { return std::atan2(p.y(), p.x()); }},
      shape_);
}

double Table::speed(double u) const {
  return std::visit(Overloaded{[](const Circle&) { return 1.0; },
                               [&](const Ellipse& e) {
                                 const double s = std::sin(u), c = std::cos(u);
                                 return std::sqrt(e.a * e.a * s * s + c * c);
                               },
                               [&](const Cardioid&) { return 2.0 * std::cos(0.5 * wrap_angle(u)); },
                               [](const CusplessCardioid&) { return 1.0; },
                               [&](const ThreePointedEgg& egg) {
                                 const auto r = egg_radius(egg.alpha, u);
                                 return std::sqrt(r.rho * r.rho + r.d1 * r.d1);
                               }},
                    shape_);
}

Vec2 boundary_point(const Table& table, double u) { return frame_at(table, u).q; }

BoundaryFrame frame_at(const Table& table, double u) {
  return std::visit([&](const auto& shape) { return frame_of(shape, u); }, table.shape());
}

double arc_length(const Table& table, double u) {
  switch (table.kind()) {
    case TableKind::circle:
    case TableKind::cuspless_cardioid:
      return table.wrap(u);
    case TableKind::cardioid:
      return 4.0 * std::sin(0.5 * check_cusp(u));
    default:
      throw Unsupported("exact arc length is not available for " + table.name() +
                        "; use the angle coordinate");
  }
}

double param_from_arc(const Table& table, double s) {
  switch (table.kind()) {
    case TableKind::circle:
    case TableKind::cuspless_cardioid:
      return table.wrap(s);
    case TableKind::cardioid:
      if (!(std::abs(s) < 4.0)) throw CuspHit("arc length at or beyond the cardioid cusp");
      return 2.0 * std::asin(s / 4.0);
    default:
      throw Unsupported("exact arc length is not available for " + table.name() +
                        "; use the angle coordinate");
  }
}

Flight next_collision_generic(const Table& table, const Vec2& q, const Vec2& v,
                              std::optional<double> from_u) {
  auto f = [&](double tau) { return table.residual(q + tau * v); };
  auto df = [&](double tau) { return table.residual_gradient(q + tau * v).dot(v); };
  const double lip = residual_lipschitz(table);
  const double reach = 2.0 * table.bounding_radius() + 1.0;
  const double h_max = table.bounding_radius();
  const bool cusped = table.kind() == TableKind::cardioid;
  // For the cardioid the step is the first zero of the quadratic Taylor bound
  // f + f' h + H h^2 / 2, with H bounding the Hessian of the quartic residual
  // for |p| <= 2. It stays rigorous where the gradient vanishes at the cusp.
  constexpr double kCardioidHessian = 80.0;
  auto step_from = [&](double tau, double f_tau) {
    if (!cusped) return std::clamp(-f_tau / lip, 1e-7, h_max);
    const double d = df(tau);
    const double h = (-d + std::sqrt(d * d - 2.0 * kCardioidHessian * f_tau)) / kCardioidHessian;
    return std::clamp(h, 1e-13, h_max);
  };

  double lo = 0.0;
  double f_lo = f(lo);
  if (from_u) {
    // A departure at grazing incidence may need a few guard lengths to enter.
    lo = kDepartGuard;
    f_lo = f(lo);
    while (f_lo >= 0.0 && lo < 1e-6) {
      lo *= 10.0;
      f_lo = f(lo);
    }
    if (f_lo >= 0.0) throw TangentHit("grazing departure");
  } else if (f_lo >= 0.0) {
    throw GeometryError("launch point is not inside the table");
  }

  double hi = lo;
  double f_hi = f_lo;
  for (;;) {
    hi = lo + step_from(lo, f_lo);
    f_hi = f(hi);
    if (f_hi >= 0.0) break;
    lo = hi;
    f_lo = f_hi;
    if (lo > reach) throw GeometryError("no boundary intersection along the ray");
  }
  const double tau = refine_root(f, df, lo, hi, f_lo, f_hi);
  if (auto hit = cusp_sliver_hit(table, q, v, tau)) return *hit;
  return finish(table, q, q + tau * v, v);
}

Flight next_collision(const Table& table, const Vec2& q, const Vec2& v, std::optional<double> from_u) {
  const bool on_boundary = from_u.has_value();
  return std::visit(
      Overloaded{[&](const Circle&) { return conic_collision(table, 1.0, q, v, on_boundary); },
                 [&](const Ellipse& e) { return conic_collision(table, e.a, q, v, on_boundary); },
                 [&](const Cardioid&) {
                   return on_boundary ? cardioid_collision(table, q, v)
                                      : next_collision_generic(table, q, v, from_u);
                 },
                 [&](const CusplessCardioid&) { return convex_collision(table, q, v, on_boundary); },
                 [&](const ThreePointedEgg& egg) {
                   return egg_collision(table, egg.alpha, q, v, on_boundary);
                 }},
      table.shape());
}

}  // namespace pinball
