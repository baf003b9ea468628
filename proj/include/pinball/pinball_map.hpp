#pragma once

// The pinball billiard map: the outgoing angle at each collision is the
// incidence angle contracted by a constant factor lambda in [0, 1].

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "pinball/geometry.hpp"

namespace pinball {

/// Contraction factor of the collision rule, restricted to [0, 1].
class Lambda {
 public:
  explicit Lambda(double value);
  [[nodiscard]] double value() const { return value_; }

 private:
  double value_;
};

/// Billiard-map state: boundary parameter and signed outgoing angle.
/// sin(phi) = <v, t>, cos(phi) = <v, n>.
struct PhasePoint {
  double u = 0.0;
  double phi = 0.0;
};

struct CollisionRecord {
  std::size_t index = 0;
  BoundaryFrame frame;
  double eta = 0.0;  // unsigned incidence angle
  double phi = 0.0;  // unsigned outgoing angle, lambda * eta
  double flight_time = 0.0;
  int side = 1;  // sign of the tangential velocity component along frame.t

  [[nodiscard]] double signed_phi() const { return side * phi; }
  [[nodiscard]] PhasePoint state() const { return {frame.u, signed_phi()}; }
};

/// The record for a state taken as the departure point of the next flight.
/// Its eta is NaN and its index 0.
[[nodiscard]] CollisionRecord departure_record(const Table& table, const PhasePoint& x);

struct Reflection {
  Vec2 v_out = Vec2::Zero();
  double eta = 0.0;
  double phi = 0.0;
  int side = 1;
};

/// Applies the collision rule at `frame` to the incoming unit velocity `v_in`.
/// Throws TangentHit when the incidence is within kTangentGuard of grazing.
[[nodiscard]] Reflection reflect(Lambda lambda, const Vec2& v_in, const BoundaryFrame& frame);

/// Outgoing unit velocity of a state.
[[nodiscard]] Vec2 outgoing_velocity(const BoundaryFrame& frame, double signed_phi);

/// One application of the map. Propagates CuspHit and TangentHit.
[[nodiscard]] std::pair<PhasePoint, CollisionRecord> step(Lambda lambda, const Table& table,
                                                          const PhasePoint& x);

enum class Termination { none, cusp_hit, tangent_hit, geometry_error };

[[nodiscard]] std::string to_string(Termination t);

struct Trajectory {
  std::vector<CollisionRecord> records;  // collisions after the discarded transient
  Termination termination = Termination::none;
  std::string reason;
  std::size_t completed = 0;  // collisions performed, including the discarded ones
  PhasePoint final_state;

  [[nodiscard]] bool terminated() const { return termination != Termination::none; }
};

/// Iterates the map `discard + n` times from x0 and records the last n collisions.
/// A cusp or tangential hit ends the trajectory with the reason recorded.
[[nodiscard]] Trajectory trajectory(Lambda lambda, const Table& table, const PhasePoint& x0,
                                    std::size_t n, std::size_t discard);

/// Incremental iteration of the map; the building block for trajectories,
/// Lyapunov exponents and shooting.
class Stepper {
 public:
  Stepper(Lambda lambda, const Table& table, const PhasePoint& x0);

  /// Performs one collision and returns its record. Throws on domain exit.
  const CollisionRecord& advance();

  [[nodiscard]] const CollisionRecord& current() const { return current_; }
  [[nodiscard]] PhasePoint state() const { return current_.state(); }
  [[nodiscard]] const Vec2& velocity() const { return velocity_; }
  [[nodiscard]] std::size_t count() const { return current_.index; }

 private:
  Lambda lambda_;
  const Table* table_;
  CollisionRecord current_;
  Vec2 velocity_;
};

/// Slap map: the lambda = 0 map, a circle map on the boundary parameter.
[[nodiscard]] double slap_map(const Table& table, double u);
/// d(slap_map)/du in the canonical parameter.
[[nodiscard]] double slap_derivative(const Table& table, double u);
/// -(t K0 + 1) / cos(eta1): the slap-map derivative with respect to arc length.
[[nodiscard]] double slap_derivative_arc(const Table& table, double u);

/// Fires a ray from the interior point p along `heading` and reflects it
/// elastically at the first boundary hit; the resulting state starts a run.
[[nodiscard]] PhasePoint launch_elastic(const Table& table, const Vec2& p, double heading);

}  // namespace pinball
