#include "vil/drivers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vil {

namespace {
constexpr double kMaxBrake = 8.0;             // emergency braking limit [m/s^2]
constexpr double kV80 = 80.0 / 3.6;           // 80 km/h in m/s
constexpr double kFreeGain = 0.6;             // free-driving speed tracking [1/s]
constexpr double kFreeBrake = 1.0;            // free-driving overspeed braking [m/s^2]
constexpr double kSpeedLimitLookahead = 0.35; // [s], compensates actuation lag
constexpr double kSpeedLimitTolerance = 0.05; // [m/s]
}  // namespace

Wie99Params Wie99Params::from_config(const Config& cfg) {
  Wie99Params p;
  p.cc0 = cfg.get_double("wie.cc0", p.cc0);
  p.cc1 = cfg.get_double("wie.cc1", p.cc1);
  p.cc2 = cfg.get_double("wie.cc2", p.cc2);
  p.cc3 = cfg.get_double("wie.cc3", p.cc3);
  p.cc4 = cfg.get_double("wie.cc4", p.cc4);
  p.cc5 = cfg.get_double("wie.cc5", p.cc5);
  p.cc6 = cfg.get_double("wie.cc6", p.cc6);
  p.cc7 = cfg.get_double("wie.cc7", p.cc7);
  p.cc8 = cfg.get_double("wie.cc8", p.cc8);
  p.cc9 = cfg.get_double("wie.cc9", p.cc9);
  p.driver_random = cfg.get_double("wie.driver_random", p.driver_random);
  p.validate();
  return p;
}

void Wie99Params::validate() const {
  if (cc0 <= 0 || cc1 <= 0) throw std::invalid_argument("wie99: cc0, cc1 must be positive");
  if (cc9 <= 0 || cc8 < cc9) throw std::invalid_argument("wie99: need cc8 >= cc9 > 0");
  if (driver_random < 0 || driver_random > 1)
    throw std::invalid_argument("wie99: driver_random must be in [0, 1]");
}

double Wie99Params::max_accel(double v) const {
  double f = std::clamp(v / kV80, 0.0, 1.0);
  return cc8 + (cc9 - cc8) * f;
}

IdmParams IdmParams::from_config(const Config& cfg) {
  IdmParams p;
  p.a0 = cfg.get_double("idm.a0", p.a0);
  p.b0 = cfg.get_double("idm.b0", p.b0);
  p.T = cfg.get_double("idm.t", p.T);
  p.s0 = cfg.get_double("idm.s0", p.s0);
  p.delta = cfg.get_double("idm.delta", p.delta);
  p.v0 = cfg.get_double("idm.v0", p.v0);
  p.validate();
  return p;
}

void IdmParams::validate() const {
  if (a0 <= 0 || b0 <= 0 || T <= 0 || s0 <= 0 || v0 <= 0)
    throw std::invalid_argument("idm: a0, b0, T, s0, v0 must be positive");
  if (delta < 1) throw std::invalid_argument("idm: delta must be >= 1");
}

double idm_accel(double v, double dv, double ds, const IdmParams& p) {
  if (ds <= 0) throw std::invalid_argument("idm: gap must be positive");
  double s_star = p.s0 + std::max(0.0, p.T * v + v * dv / (2.0 * std::sqrt(p.a0 * p.b0)));
  double a = p.a0 * (1.0 - std::pow(v / p.v0, p.delta) - s_star / ds);
  return std::max(a, -3.0 * p.b0);
}

double idm_equilibrium_gap(double v, const IdmParams& p) {
  double free = 1.0 - std::pow(v / p.v0, p.delta);
  if (free <= 0) throw std::invalid_argument("idm: no equilibrium at or above v0");
  return (p.s0 + std::max(0.0, p.T * v)) / free;
}

Wie99Controller::Wie99Controller(Wie99Params params) : params_(params) {
  params_.validate();
}

double Wie99Controller::free_accel(double v, double v_desired) const {
  double err = v_desired - v;
  if (err >= 0) return std::min(params_.max_accel(v), kFreeGain * err);
  return std::max(-kFreeBrake, err);
}

Wie99Output Wie99Controller::step(const VehicleState& ego, const VehicleState& pv,
                                  double ds, double v_desired) {
  if (ds <= 0) throw std::invalid_argument("wie99: gap must be positive");
  const Wie99Params& p = params_;
  const double dv = pv.v - ego.v;  // opening positive

  // Perception thresholds widen with gap.
  const double widen = p.cc6 * 1e-4 * ds * ds;
  const double cldv = p.cc4 - widen;  // perceptibly closing below this
  const double opdv = p.cc5 + widen;  // perceptibly opening above this

  // Desired distance keys to the slower vehicle; when the PV is faster the
  // driver estimates its speed imperfectly through the driver variable.
  double v_eff;
  if (dv <= 0 || pv.a < -1.0) {
    v_eff = ego.v;
  } else {
    v_eff = pv.v - dv * (p.driver_random - 0.5);
  }
  const double sdxc = p.desired_distance(std::max(0.0, v_eff));
  const double sdxo = sdxc + p.cc2;
  const double sdxv = sdxo + p.cc3 * (dv - p.cc4);

  Wie99Output out;
  if (ds <= sdxc && dv < opdv) {
    // Emergency: inside the safe distance and not opening.
    out.state = FollowingState::A;
    if (ds <= p.cc0) {
      out.accel = -kMaxBrake;
    } else if (dv < 0) {
      out.accel = pv.a - dv * dv / (2.0 * (ds - p.cc0));
      out.accel = std::min(out.accel, -p.cc7);
    } else {
      out.accel = -p.cc7;
    }
    out.accel = std::max(out.accel, -kMaxBrake);
  } else if (dv < cldv && ds <= sdxv) {
    // Closing in on a slower PV: brake to match speeds at the desired gap.
    out.state = FollowingState::B;
    out.accel = pv.a - dv * dv / (2.0 * std::max(ds - sdxc, 0.01));
    out.accel = std::clamp(out.accel, -kMaxBrake, 0.0);
  } else if (ds < sdxo) {
    // Unconscious following: oscillate within the cc2 band at +-cc7.
    out.state = FollowingState::f;
    const double lo = sdxc + 0.15 * p.cc2;
    const double hi = sdxc + 0.85 * p.cc2;
    if (ds < lo || dv < p.cc4) {
      osc_sign_ = -1.0;
    } else if (ds > hi || dv > p.cc5) {
      osc_sign_ = 1.0;
    }
    out.accel = osc_sign_ * p.cc7;
    if (ego.v >= v_desired && out.accel > 0) out.accel = 0.0;
  } else {
    out.state = FollowingState::w;
    out.accel = free_accel(ego.v, v_desired);
  }
  state_ = out.state;
  return out;
}

double apply_speed_limit(double u, const VehicleState& ego, const TrackMap& track) {
  double s_look = ego.s + ego.v * kSpeedLimitLookahead;
  double cap = track.envelope_speed(s_look);
  if (ego.v > cap + kSpeedLimitTolerance) {
    return std::min(u, track.comfortable_decel());
  }
  return u;
}

}  // namespace vil
