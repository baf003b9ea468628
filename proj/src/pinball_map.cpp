#include "pinball/pinball_map.hpp"

#include <cmath>
#include <limits>

namespace pinball {

Lambda::Lambda(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::invalid_argument("lambda must lie in [0, 1]");
  }
}

CollisionRecord departure_record(const Table& table, const PhasePoint& x) {
  CollisionRecord r;
  r.frame = frame_at(table, x.u);
  r.eta = std::numeric_limits<double>::quiet_NaN();
  r.phi = std::abs(x.phi);
  r.side = x.phi < 0.0 ? -1 : 1;
  return r;
}

Reflection reflect(Lambda lambda, const Vec2& v_in, const BoundaryFrame& frame) {
  const double vt = v_in.dot(frame.t);
  const double vn = -v_in.dot(frame.n);  // component along the outward normal
  if (vn < kTangentGuard) throw TangentHit("tangential collision");
  Reflection r;
  r.side = vt < 0.0 ? -1 : 1;
  r.eta = std::atan2(std::abs(vt), vn);
  r.phi = lambda.value() * r.eta;
  Vec2 out = frame.n * std::cos(r.phi) + frame.t * (r.side * std::sin(r.phi));
  r.v_out = out / out.norm();
  return r;
}

Vec2 outgoing_velocity(const BoundaryFrame& frame, double signed_phi) {
  Vec2 v = frame.n * std::cos(signed_phi) + frame.t * std::sin(signed_phi);
  return v / v.norm();
}

namespace {

CollisionRecord collide(Lambda lambda, const Table& table, const BoundaryFrame& from,
                        const Vec2& v, std::size_t index, Vec2& v_out) {
  const Flight flight = next_collision(table, from.q, v, from.u);
  const Reflection r = reflect(lambda, v, flight.frame);
  v_out = r.v_out;
  CollisionRecord rec;
  rec.index = index;
  rec.frame = flight.frame;
  rec.eta = r.eta;
  rec.phi = r.phi;
  rec.flight_time = flight.time;
  rec.side = r.side;
  return rec;
}

}  // namespace

std::pair<PhasePoint, CollisionRecord> step(Lambda lambda, const Table& table, const PhasePoint& x) {
  const BoundaryFrame from = frame_at(table, x.u);
  Vec2 v_out;
  CollisionRecord rec = collide(lambda, table, from, outgoing_velocity(from, x.phi), 1, v_out);
  return {rec.state(), rec};
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::none:
      return "none";
    case Termination::cusp_hit:
      return "cusp_hit";
    case Termination::tangent_hit:
      return "tangent_hit";
    case Termination::geometry_error:
      return "geometry_error";
  }
  return "unknown";
}

Stepper::Stepper(Lambda lambda, const Table& table, const PhasePoint& x0)
    : lambda_(lambda), table_(&table), current_(departure_record(table, x0)) {
  velocity_ = outgoing_velocity(current_.frame, x0.phi);
}

const CollisionRecord& Stepper::advance() {
  Vec2 v_out;
  current_ = collide(lambda_, *table_, current_.frame, velocity_, current_.index + 1, v_out);
  velocity_ = v_out;
  return current_;
}

Trajectory trajectory(Lambda lambda, const Table& table, const PhasePoint& x0, std::size_t n,
                      std::size_t discard) {
  Trajectory out;
  out.final_state = x0;
  out.records.reserve(n);
  Stepper stepper(lambda, table, x0);
  try {
    for (std::size_t k = 0; k < discard + n; ++k) {
      const CollisionRecord& rec = stepper.advance();
      ++out.completed;
      if (k >= discard) out.records.push_back(rec);
    }
  } catch (const CuspHit& e) {
    out.termination = Termination::cusp_hit;
    out.reason = e.what();
  } catch (const TangentHit& e) {
    out.termination = Termination::tangent_hit;
    out.reason = e.what();
  } catch (const GeometryError& e) {
    out.termination = Termination::geometry_error;
    out.reason = e.what();
  }
  out.final_state = stepper.state();
  return out;
}

double slap_map(const Table& table, double u) { return step(Lambda(0.0), table, {u, 0.0}).first.u; }

double slap_derivative_arc(const Table& table, double u) {
  const BoundaryFrame from = frame_at(table, u);
  const auto rec = step(Lambda(0.0), table, {u, 0.0}).second;
  return -(rec.flight_time * from.curvature + 1.0) / std::cos(rec.eta);
}

double slap_derivative(const Table& table, double u) {
  const double u1 = slap_map(table, u);
  return slap_derivative_arc(table, u) * table.speed(u) / table.speed(u1);
}

PhasePoint launch_elastic(const Table& table, const Vec2& p, double heading) {
  const Vec2 v(std::cos(heading), std::sin(heading));
  const Flight flight = next_collision(table, p, v, std::nullopt);
  const Reflection r = reflect(Lambda(1.0), v, flight.frame);
  return {flight.frame.u, r.side * r.phi};
}

}  // namespace pinball
