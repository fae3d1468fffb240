#include "vil/track.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vil {

namespace {
constexpr double kPi = 3.14159265358979323846;

double wrap_angle(double a) {
  while (a > kPi) a -= 2.0 * kPi;
  while (a <= -kPi) a += 2.0 * kPi;
  return a;
}
}  // namespace

TrackMap::TrackMap(double straight_length, double turn_diameter, double v_straight,
                   double v_turn, double comfortable_decel, double vehicle_length)
    : straight_length_(straight_length),
      turn_radius_(turn_diameter / 2.0),
      a_c_(comfortable_decel),
      vehicle_length_(vehicle_length) {
  if (straight_length <= 0 || turn_diameter <= 0)
    throw std::invalid_argument("track: geometry must be positive");
  if (v_straight <= 0 || v_turn <= 0)
    throw std::invalid_argument("track: speed limits must be positive");
  if (a_c_ >= 0) throw std::invalid_argument("track: comfortable decel must be negative");
  if (vehicle_length_ < 0) throw std::invalid_argument("track: vehicle length must be >= 0");

  const double turn_len = kPi * turn_radius_;
  circuit_length_ = 2.0 * straight_length_ + 2.0 * turn_len;
  zones_ = {
      {0.0, straight_length_, v_straight},
      {straight_length_, straight_length_ + turn_len, v_turn},
      {straight_length_ + turn_len, 2.0 * straight_length_ + turn_len, v_straight},
      {2.0 * straight_length_ + turn_len, circuit_length_, v_turn},
  };
}

TrackMap TrackMap::from_config(const Config& cfg) {
  return TrackMap(cfg.get_double("track.straight_length", 1550.0),
                  cfg.get_double("track.turn_diameter", 95.0),
                  cfg.get_double("track.v_straight", 22.3),
                  cfg.get_double("track.v_turn", 7.0),
                  cfg.get_double("track.a_c", -2.0),
                  cfg.get_double("track.vehicle_length", 5.0));
}

TrackMap default_track() { return TrackMap(1550.0, 95.0, 22.3, 7.0, -2.0, 5.0); }

double TrackMap::wrap(double s) const {
  double r = std::fmod(s, circuit_length_);
  if (r < 0) r += circuit_length_;
  return r;
}

const SpeedZone& TrackMap::zone_at(double s) const {
  double sw = wrap(s);
  for (const SpeedZone& z : zones_) {
    if (z.contains(sw)) return z;
  }
  return zones_.back();  // sw == circuit_length within fp error
}

double TrackMap::distance_ahead(double s_follower, double s_leader) const {
  return wrap(s_leader - s_follower);
}

double TrackMap::signed_offset(double s_from, double s_to) const {
  double d = wrap(s_to - s_from);
  if (d > circuit_length_ / 2.0) d -= circuit_length_;
  return d;
}

bool TrackMap::next_slowdown(double s, double* distance, double* v_downstream) const {
  const double here = limit_at(s);
  double sw = wrap(s);
  // Walk zone boundaries ahead (at most one full ring).
  double best = -1.0, best_v = 0.0;
  for (const SpeedZone& z : zones_) {
    if (z.v_limit >= here) continue;
    double d = wrap(z.start_s - sw);
    if (d < 1e-9) continue;  // own zone start behind us
    if (best < 0 || d < best) {
      best = d;
      best_v = z.v_limit;
    }
  }
  if (best < 0) return false;
  *distance = best;
  *v_downstream = best_v;
  return true;
}

double TrackMap::envelope_speed(double s) const {
  double v = limit_at(s);
  double sw = wrap(s);
  for (const SpeedZone& z : zones_) {
    if (z.v_limit >= v) continue;
    double d = wrap(z.start_s - sw);
    if (d < 1e-9) continue;
    // Braking envelope upstream of the slower zone: v_allow^2 = v_z^2 - 2 a_c d.
    double cap = std::sqrt(z.v_limit * z.v_limit - 2.0 * a_c_ * d);
    v = std::min(v, cap);
  }
  return v;
}

PlanarPose TrackMap::pose_at(double s) const {
  const double L = straight_length_;
  const double r = turn_radius_;
  const double turn_len = kPi * r;
  double sw = wrap(s);
  PlanarPose p;
  if (sw < L) {  // lower straight, +x
    p.x = sw;
    p.y = 0.0;
    p.heading = 0.0;
  } else if (sw < L + turn_len) {  // right U-turn, CCW
    double phi = (sw - L) / r;  // 0..pi
    p.x = L + r * std::sin(phi);
    p.y = r - r * std::cos(phi);
    p.heading = wrap_angle(phi);
  } else if (sw < 2.0 * L + turn_len) {  // upper straight, -x
    double d = sw - (L + turn_len);
    p.x = L - d;
    p.y = 2.0 * r;
    p.heading = kPi;
  } else {  // left U-turn
    double phi = (sw - (2.0 * L + turn_len)) / r;  // 0..pi
    p.x = -r * std::sin(phi);
    p.y = r + r * std::cos(phi);
    p.heading = wrap_angle(kPi + phi);
  }
  return p;
}

double TrackMap::project_xy(double x, double y) const {
  const double L = straight_length_;
  const double r = turn_radius_;
  const double turn_len = kPi * r;

  struct Candidate {
    double s, d2;
  };
  std::vector<Candidate> cands;

  auto consider_straight = [&](double x0, double y0, double dx, double dy, double s_base) {
    double t = (x - x0) * dx + (y - y0) * dy;
    t = std::clamp(t, 0.0, L);
    double px = x0 + t * dx, py = y0 + t * dy;
    double d2 = (x - px) * (x - px) + (y - py) * (y - py);
    cands.push_back({s_base + t, d2});
  };
  auto consider_turn = [&](double cx, double cy, double phi0, double s_base) {
    double ang = std::atan2(y - cy, x - cx);
    // Arc parameter relative to the arc's start angle, in [0, 2pi).
    double rel = ang - phi0;
    while (rel < 0) rel += 2.0 * kPi;
    while (rel >= 2.0 * kPi) rel -= 2.0 * kPi;
    double t = std::clamp(rel, 0.0, kPi);
    double px = cx + r * std::cos(phi0 + t), py = cy + r * std::sin(phi0 + t);
    double d2 = (x - px) * (x - px) + (y - py) * (y - py);
    cands.push_back({s_base + t * r, d2});
  };

  consider_straight(0.0, 0.0, 1.0, 0.0, 0.0);
  consider_turn(L, r, -kPi / 2.0, L);               // right turn starts at angle -pi/2
  consider_straight(L, 2.0 * r, -1.0, 0.0, L + turn_len);
  consider_turn(0.0, r, kPi / 2.0, 2.0 * L + turn_len);  // left turn starts at +pi/2

  const Candidate* best = &cands.front();
  for (const Candidate& c : cands)
    if (c.d2 < best->d2) best = &c;
  return wrap(best->s);
}

double gap_ahead(const VehicleState& follower, const VehicleState& leader,
                 const TrackMap& track) {
  double center = track.distance_ahead(follower.s, leader.s);
  if (center == 0.0) return 0.0;  // coincident
  return std::max(0.0, center - track.vehicle_length());
}

double decel_distance(double v_hi, double v_lo, double a_c) {
  if (a_c >= 0) throw std::invalid_argument("decel_distance: a_c must be negative");
  if (v_lo < 0 || v_hi < v_lo)
    throw std::invalid_argument("decel_distance: need v_hi >= v_lo >= 0");
  return (v_lo * v_lo - v_hi * v_hi) / (2.0 * a_c);
}

VehicleState advance(const VehicleState& st, double ds, const TrackMap& track) {
  VehicleState out = st;
  double total = st.s + ds;
  double L = track.circuit_length();
  while (total >= L) {
    total -= L;
    out.lap += 1;
  }
  while (total < 0) {
    total += L;
    out.lap -= 1;
  }
  out.s = total;
  return out;
}

}  // namespace vil
