#pragma once

// Billiard tables: parametrization, local frames, curvature and ray/boundary
// intersection for the five supported boundary shapes.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include <Eigen/Core>

namespace pinball {

using Vec2 = Eigen::Vector2d;

/// Arc-distance guard: the departure point is never returned as the arrival.
inline constexpr double kDepartGuard = 1e-10;
/// Parameter distance to the cardioid cusp below which a collision is rejected.
inline constexpr double kCuspGuard = 1e-8;
/// Minimum |cos eta| accepted at a collision.
inline constexpr double kTangentGuard = 1e-9;

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The trajectory reaches the cardioid cusp where the normal is undefined.
class CuspHit : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

/// The trajectory meets the boundary (numerically) tangentially.
class TangentHit : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

/// Operation not available for this table (e.g. exact arc length of an ellipse).
class Unsupported : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

struct Circle {};

struct Ellipse {
  double a = 1.0;  // semi-axis along x; the y semi-axis is 1
};

struct Cardioid {};

/// Cardioid with the cusp sector |theta| >= 2pi/3 replaced by the wall x = -1/4.
struct CusplessCardioid {
  static constexpr double kHalfWall = 0.43301270189221932;   // sqrt(3)/4
  static constexpr double kHalfLength = 3.8971143170299740;  // 9 sqrt(3)/4
};

struct ThreePointedEgg {
  double alpha = 0.0;  // rho(theta) = 1 + alpha cos(3 theta)
};

enum class TableKind { circle, ellipse, cardioid, cuspless_cardioid, three_pointed_egg };

/// A billiard table. Value type; all queries are pure.
///
/// Canonical boundary parameter `u` per table:
///   circle, ellipse, egg : angle in [-pi, pi) (ellipse: the parameter t of (a cos t, sin t))
///   cardioid             : polar angle theta in (-pi, pi), cusp at +-pi
///   cuspless cardioid    : signed arc length s in (-C, C], s = y on the wall
class Table {
 public:
  using Shape = std::variant<Circle, Ellipse, Cardioid, CusplessCardioid, ThreePointedEgg>;

  static Table circle();
  static Table ellipse(double a);
  static Table cardioid();
  static Table cuspless_cardioid();
  static Table three_pointed_egg(double alpha);

  /// Parses "circle", "ellipse", "cardioid", "cuspless", "egg".
  static Table from_name(std::string_view name, double a, double alpha);

  [[nodiscard]] const Shape& shape() const { return shape_; }
  [[nodiscard]] TableKind kind() const;
  [[nodiscard]] std::string name() const;

  /// Length of the canonical parameter range; u and u + period() name the same point.
  [[nodiscard]] double period() const;
  /// Maps u into the canonical range.
  [[nodiscard]] double wrap(double u) const;
  /// Signed difference to - from, reduced to [-period/2, period/2).
  [[nodiscard]] double param_difference(double to, double from) const;

  /// True when the canonical parameter is an arc length (or the plot uses arc length).
  [[nodiscard]] bool plots_arc_length() const;
  /// Abscissa used in phase-space output: arc length where exact, otherwise the angle.
  [[nodiscard]] double plot_coordinate(double u) const;
  [[nodiscard]] double param_from_plot_coordinate(double c) const;
  /// Range of plot_coordinate, as (lo, hi).
  [[nodiscard]] std::pair<double, double> plot_range() const;

  /// Implicit residual: negative inside, zero on the boundary, positive outside.
  [[nodiscard]] double residual(const Vec2& p) const;
  [[nodiscard]] Vec2 residual_gradient(const Vec2& p) const;
  [[nodiscard]] bool contains(const Vec2& p) const { return residual(p) < 0.0; }
  /// Radius of a disc about the origin containing the table.
  [[nodiscard]] double bounding_radius() const;

  /// Canonical parameter of a point on (or within rounding of) the boundary.
  [[nodiscard]] double param_of(const Vec2& p) const;
  /// |dq/du|, the arc length per unit canonical parameter.
  [[nodiscard]] double speed(double u) const;

 private:
  explicit Table(Shape shape) : shape_(shape) {}
  Shape shape_;
};

/// Collision-point geometry. `t` points along increasing u, `n` points inward.
struct BoundaryFrame {
  Vec2 q = Vec2::Zero();
  Vec2 n = Vec2::Zero();
  Vec2 t = Vec2::Zero();
  double curvature = 0.0;  // <= 0 (focusing negative, flat zero)
  double u = 0.0;
};

struct Flight {
  BoundaryFrame frame;
  double time = 0.0;  // Euclidean length of the flight (unit speed)
};

[[nodiscard]] Vec2 boundary_point(const Table& table, double u);
[[nodiscard]] BoundaryFrame frame_at(const Table& table, double u);

/// Exact arc length from the table's reference point. Throws Unsupported for
/// the ellipse and the egg, whose phase plots use the angle instead.
[[nodiscard]] double arc_length(const Table& table, double u);
[[nodiscard]] double param_from_arc(const Table& table, double s);

/// First boundary intersection strictly ahead of q along the unit direction v.
/// `from_u` marks q as a boundary point (the departure is then excluded).
/// Dispatches to a closed-form or specialized solver where one exists.
[[nodiscard]] Flight next_collision(const Table& table, const Vec2& q, const Vec2& v,
                                    std::optional<double> from_u);

/// Table-independent solver: adaptive marching on the implicit residual,
/// bracketing of the first sign change, safeguarded Newton refinement.
[[nodiscard]] Flight next_collision_generic(const Table& table, const Vec2& q, const Vec2& v,
                                            std::optional<double> from_u);

}  // namespace pinball
