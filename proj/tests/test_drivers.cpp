#include <doctest.h>

#include <cmath>
#include <random>

#include "vil/drivers.hpp"

using namespace vil;

TEST_CASE("idm standstill and free-flow equilibria") {
  IdmParams p;  // defaults, v0 = 22.3
  // At standstill with gap = s0 the command is zero.
  CHECK(idm_accel(0.0, 0.0, p.s0, p) == doctest::Approx(0.0).epsilon(1e-12));
  // Free flow at v0 with a huge gap.
  CHECK(idm_accel(p.v0, 0.0, 1e9, p) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("idm hand-evaluated command") {
  IdmParams p;
  // v=10, dv=0, gap=30: s* = 10 + 1.02*10 = 20.2
  double a = idm_accel(10.0, 0.0, 30.0, p);
  CHECK(a == doctest::Approx(0.435).epsilon(2e-3));
}

TEST_CASE("idm rejects non-positive gap") {
  IdmParams p;
  CHECK_THROWS(idm_accel(10.0, 0.0, 0.0, p));
  CHECK_THROWS(idm_accel(10.0, 0.0, -1.0, p));
}

TEST_CASE("idm command is monotone in gap and bounded above by a0") {
  IdmParams p;
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> uv(0.0, 22.0), udv(-5.0, 5.0);
  for (int i = 0; i < 500; ++i) {
    double v = uv(rng), dv = udv(rng);
    double prev = -1e9;
    for (double ds = 2.0; ds < 400.0; ds *= 1.5) {
      double a = idm_accel(v, dv, ds, p);
      CHECK(a >= prev - 1e-12);
      CHECK(a <= p.a0 + 1e-12);
      prev = a;
    }
  }
}

TEST_CASE("idm braking floor") {
  IdmParams p;
  CHECK(idm_accel(20.0, 10.0, 0.5, p) == doctest::Approx(-3.0 * p.b0));
}

TEST_CASE("idm equilibrium gap matches root of the command") {
  IdmParams p;
  for (double v : {3.0, 8.0, 14.0, 20.0}) {
    double ds_eq = idm_equilibrium_gap(v, p);
    CHECK(idm_accel(v, 0.0, ds_eq, p) == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("wie99 desired distance and parameter validation") {
  Wie99Params p;
  CHECK(p.desired_distance(10.0) == doctest::Approx(16.5));
  CHECK(p.max_accel(0.0) == doctest::Approx(3.5));
  CHECK(p.max_accel(80.0 / 3.6) == doctest::Approx(1.5));
  CHECK(p.max_accel(11.111) == doctest::Approx(2.5).epsilon(1e-3));

  Wie99Params bad = p;
  bad.driver_random = 1.5;
  CHECK_THROWS(bad.validate());
  bad = p;
  bad.cc8 = 1.0;  // below cc9
  CHECK_THROWS(bad.validate());
}

TEST_CASE("wie99 regimes") {
  Wie99Controller ctl;
  const Wie99Params& p = ctl.params();
  VehicleState ego, pv;

  SUBCASE("steady following inside the band oscillates within cc7") {
    ego.v = 10.0;
    pv.v = 10.0;
    double ds = p.desired_distance(10.0) + 0.5 * p.cc2;  // mid band
    auto out = ctl.step(ego, pv, ds, 22.3);
    CHECK(out.state == FollowingState::f);
    CHECK(std::abs(out.accel) <= p.cc7 + 1e-12);
  }

  SUBCASE("free driving from rest is capped at cc8") {
    ego.v = 0.0;
    pv.v = 22.3;
    auto out = ctl.step(ego, pv, 500.0, 22.3);
    CHECK(out.state == FollowingState::w);
    CHECK(out.accel <= p.cc8 + 1e-12);
    CHECK(out.accel == doctest::Approx(p.cc8));
  }

  SUBCASE("closing on a much slower vehicle brakes") {
    ego.v = 20.0;
    pv.v = 5.0;
    auto out = ctl.step(ego, pv, 60.0, 22.3);
    CHECK(out.state == FollowingState::B);
    CHECK(out.accel < 0.0);
  }

  SUBCASE("inside the safe distance is an emergency") {
    ego.v = 15.0;
    pv.v = 10.0;
    auto out = ctl.step(ego, pv, 5.0, 22.3);
    CHECK(out.state == FollowingState::A);
    CHECK(out.accel < -p.cc7);
  }

  SUBCASE("gap must be positive") {
    CHECK_THROWS(ctl.step(ego, pv, 0.0, 22.3));
  }
}

TEST_CASE("wie99 is deterministic and respects the interpolated bound") {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> uv(0.0, 22.3), ug(1.0, 200.0);
  Wie99Controller a, b;
  for (int i = 0; i < 2000; ++i) {
    VehicleState ego, pv;
    ego.v = uv(rng);
    pv.v = uv(rng);
    double ds = ug(rng);
    auto oa = a.step(ego, pv, ds, 22.3);
    auto ob = b.step(ego, pv, ds, 22.3);
    CHECK(oa.accel == ob.accel);
    CHECK(oa.state == ob.state);
    CHECK(oa.accel <= a.params().max_accel(ego.v) + 1e-12);
  }
}

TEST_CASE("apply_speed_limit clamps only inside the braking envelope") {
  TrackMap t = default_track();
  VehicleState ego;

  // Far from any turn at the straight limit: inactive.
  ego.s = 100.0;
  ego.v = 22.3;
  CHECK(apply_speed_limit(1.0, ego, t) == 1.0);

  // 50 m before the first turn at full speed: 50 < 112.07, engages a_c.
  ego.s = 1500.0;
  ego.v = 22.3;
  CHECK(apply_speed_limit(0.5, ego, t) == doctest::Approx(-2.0));

  // Inside the turn at the limit: inactive.
  ego.s = 1600.0;
  ego.v = 7.0;
  CHECK(apply_speed_limit(-0.3, ego, t) == doctest::Approx(-0.3));

  // Never increases the command.
  ego.s = 1500.0;
  ego.v = 22.3;
  CHECK(apply_speed_limit(-4.0, ego, t) == doctest::Approx(-4.0));
}

TEST_CASE("params load from config") {
  auto cfg = Config::from_string("idm.a0 = 2.0\nwie.cc1 = 1.10\n");
  IdmParams ip = IdmParams::from_config(cfg);
  CHECK(ip.a0 == 2.0);
  CHECK(ip.b0 == 3.24);
  Wie99Params wp = Wie99Params::from_config(cfg);
  CHECK(wp.cc1 == 1.10);
  CHECK(wp.cc0 == 3.00);
}
