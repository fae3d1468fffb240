#include <doctest.h>

#include <cstdlib>

#include "vil/config.hpp"

using vil::Config;

TEST_CASE("key=value parsing with comments and whitespace") {
  Config cfg = Config::from_string(
      "# track setup\n"
      "track.straight_length = 1550\n"
      "  track.v_turn=7.0\n"
      "\n"
      "mpc.profile = mpc-c\n");
  CHECK(cfg.get_double("track.straight_length", 0) == 1550.0);
  CHECK(cfg.get_double("track.v_turn", 0) == 7.0);
  CHECK(cfg.get_str("mpc.profile", "") == "mpc-c");
  CHECK(cfg.get_double("missing.key", 3.5) == 3.5);
}

TEST_CASE("malformed lines are rejected") {
  CHECK_THROWS(Config::from_string("no equals sign\n"));
  CHECK_THROWS(Config::from_string("= value\n"));
  Config cfg = Config::from_string("k = not_a_number\n");
  CHECK_THROWS(cfg.get_double("k", 0));
  CHECK_THROWS(cfg.get_int("k", 0));
}

TEST_CASE("environment variables override file values") {
  CHECK(Config::env_name("mpc.q_a") == "VILSIM_MPC_Q_A");
  Config cfg = Config::from_string("sim.tick = 0.1\n");
  ::setenv("VILSIM_SIM_TICK", "0.05", 1);
  CHECK(cfg.get_double("sim.tick", 0) == 0.05);
  ::unsetenv("VILSIM_SIM_TICK");
  CHECK(cfg.get_double("sim.tick", 0) == 0.1);
}

TEST_CASE("bool parsing") {
  Config cfg = Config::from_string("a = true\nb = 0\nc = maybe\n");
  CHECK(cfg.get_bool("a", false));
  CHECK_FALSE(cfg.get_bool("b", true));
  CHECK_THROWS(cfg.get_bool("c", false));
}
