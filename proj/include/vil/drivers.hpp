#pragma once

#include "vil/config.hpp"
#include "vil/track.hpp"

namespace vil {

// Wiedemann 99 tunables. Defaults reproduce the calibrated set used for
// both the virtual drivers and the baseline ego controller.
struct Wie99Params {
  double cc0 = 3.00;    // standstill gap [m]
  double cc1 = 1.35;    // desired headway [s]
  double cc2 = 8.00;    // following oscillation band [m]
  double cc3 = -8.00;   // reaction-time distance factor when closing [s-like]
  double cc4 = -0.35;   // closing speed-difference threshold [m/s]
  double cc5 = 0.35;    // opening speed-difference threshold [m/s]
  double cc6 = 11.4;    // speed perception widening [1/(m s)], scaled by 1e-4
  double cc7 = 0.25;    // following acceleration oscillation [m/s^2]
  double cc8 = 3.50;    // max acceleration at 0 km/h [m/s^2]
  double cc9 = 1.50;    // max acceleration at 80 km/h [m/s^2]
  double driver_random = 0.35;  // per-driver variable in [0, 1]

  static Wie99Params from_config(const Config& cfg);
  void validate() const;

  // Velocity-interpolated acceleration capability (cc8 at 0, cc9 at 80 km/h).
  double max_accel(double v) const;
  // Desired minimum following distance cc0 + cc1 * v_eff.
  double desired_distance(double v_eff) const { return cc0 + cc1 * v_eff; }
};

struct IdmParams {
  double a0 = 1.52;   // max acceleration [m/s^2]
  double b0 = 3.24;   // comfortable deceleration [m/s^2]
  double T = 1.02;    // desired headway [s]
  double s0 = 10.0;   // desired standstill distance [m]
  double delta = 4.0;
  double v0 = 22.3;   // desired velocity [m/s]

  static IdmParams from_config(const Config& cfg);
  void validate() const;
};

// Current action of a Wiedemann driver: A increase distance (emergency),
// B decrease distance (closing in), f keep distance, w keep speed.
enum class FollowingState : char { A = 'A', B = 'B', f = 'f', w = 'w' };

// Acceleration command from instantaneous ego velocity v, approach speed
// dv = v - v_pv (positive when closing), and gap ds > 0. Interaction term
// enters as s*/ds (not squared). Commands are floored at -3 b0.
double idm_accel(double v, double dv, double ds, const IdmParams& p);

// Gap at which idm_accel is zero for speed v with dv = 0.
double idm_equilibrium_gap(double v, const IdmParams& p);

struct Wie99Output {
  double accel = 0.0;
  FollowingState state = FollowingState::w;
};

// Stateful Wiedemann 99 controller: one instance per driver. Holds the
// following-state label and the sign of the unconscious-following
// oscillation between calls. Deterministic for fixed driver_random.
class Wie99Controller {
 public:
  explicit Wie99Controller(Wie99Params params = {});

  // ds is the bumper-to-bumper gap (> 0), v_desired the free-flow target.
  Wie99Output step(const VehicleState& ego, const VehicleState& pv, double ds,
                   double v_desired);

  // Free driving against the desired speed only (no vehicle ahead).
  double free_accel(double v, double v_desired) const;

  FollowingState state() const { return state_; }
  const Wie99Params& params() const { return params_; }

 private:
  Wie99Params params_;
  FollowingState state_ = FollowingState::w;
  double osc_sign_ = 1.0;
};

// Speed-limit switching for the continuous car-following controllers:
// when the ego is inside the braking envelope of a slower zone (or above
// its own zone limit), the command is clamped to min(u, a_c). Never
// increases u.
double apply_speed_limit(double u, const VehicleState& ego, const TrackMap& track);

}  // namespace vil
