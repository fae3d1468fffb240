#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vil/config.hpp"

namespace vil {

// One speed-limit zone along the circuit. Zones partition
// [0, circuit_length) with no gaps or overlaps.
struct SpeedZone {
  double start_s = 0.0;  // [m]
  double end_s = 0.0;    // [m]
  double v_limit = 0.0;  // [m/s]

  double length() const { return end_s - start_s; }
  bool contains(double s) const { return s >= start_s && s < end_s; }
};

struct PlanarPose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // [rad], wrapped to (-pi, pi]
};

// Longitudinal state of one vehicle on the circuit. Dynamics are 1-D in
// arc length; planar coordinates exist only at the wire boundary.
struct VehicleState {
  double s = 0.0;        // arc-length position in [0, circuit_length)
  double v = 0.0;        // [m/s], >= 0
  double a = 0.0;        // [m/s^2]
  double heading = 0.0;  // [rad]
  int64_t lap = 0;
  bool brake_on = false;
  double timestamp = 0.0;  // [s]

  double unwrapped_s(double circuit_length) const {
    return static_cast<double>(lap) * circuit_length + s;
  }
};

// Closed test circuit: two straights joined by semicircular U-turns, with
// per-zone speed limits and the comfortable deceleration used by the
// speed-limit switching logic.
class TrackMap {
 public:
  TrackMap(double straight_length, double turn_diameter, double v_straight,
           double v_turn, double comfortable_decel, double vehicle_length);

  static TrackMap from_config(const Config& cfg);

  double circuit_length() const { return circuit_length_; }
  double comfortable_decel() const { return a_c_; }
  double vehicle_length() const { return vehicle_length_; }
  double straight_length() const { return straight_length_; }
  double turn_radius() const { return turn_radius_; }
  const std::vector<SpeedZone>& zones() const { return zones_; }

  // Zone containing arc position s (s taken mod circuit length).
  const SpeedZone& zone_at(double s) const;
  double limit_at(double s) const { return zone_at(s).v_limit; }

  double wrap(double s) const;

  // Ring distance from follower to leader, center to center, in
  // [0, circuit_length).
  double distance_ahead(double s_follower, double s_leader) const;

  // Signed ring offset from `from` to `to` in (-L/2, L/2].
  double signed_offset(double s_from, double s_to) const;

  // Largest speed at arc position s that still allows slowing to every
  // downstream zone limit at the comfortable deceleration. Equals the
  // local zone limit away from transitions and follows the square-root
  // braking envelope upstream of slower zones.
  double envelope_speed(double s) const;

  // Distance from s to the next boundary where the limit drops, together
  // with the limit beyond it. Returns false if no slower zone exists.
  bool next_slowdown(double s, double* distance, double* v_downstream) const;

  PlanarPose pose_at(double s) const;

  // Project planar coordinates back to arc length (nearest point on the
  // centerline). Inverse of pose_at up to projection tolerance.
  double project_xy(double x, double y) const;

 private:
  double straight_length_;
  double turn_radius_;
  double circuit_length_;
  double a_c_;
  double vehicle_length_;
  std::vector<SpeedZone> zones_;
};

// Track per Fig-8-style geometry: 1550 m straights at 22.3 m/s joined by
// 95 m diameter U-turns at 7.0 m/s, comfortable deceleration -2.0 m/s^2.
TrackMap default_track();

// Bumper-to-bumper gap from follower to the vehicle ahead, wrapping the
// ring. Coincident centers give zero.
double gap_ahead(const VehicleState& follower, const VehicleState& leader,
                 const TrackMap& track);

// Distance needed to slow from v_hi to v_lo at constant deceleration a_c
// (a_c < 0). delta_s = (v_lo^2 - v_hi^2) / (2 a_c), positive.
double decel_distance(double v_hi, double v_lo, double a_c);

// Advance a state by ds meters of arc, updating lap count on wrap.
VehicleState advance(const VehicleState& st, double ds, const TrackMap& track);

}  // namespace vil
