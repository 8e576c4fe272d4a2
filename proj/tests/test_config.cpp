#include <doctest.h>

#include "swarmfield/config.hpp"
#include "swarmfield/error.hpp"
#include "swarmfield/hash.hpp"

#include <string>

using namespace swarmfield;

namespace {

void expect_invalid(const std::string& text, const std::string& section, const std::string& key)
{
  try {
    parse_config(text);
    FAIL("expected ValidationError for " << section << "." << key);
  } catch (const ValidationError& e) {
    CHECK(e.section() == section);
    CHECK(e.key() == key);
  }
}

std::string preset(const char* name)
{
  return std::string(SWARMFIELD_SOURCE_DIR) + "/configs/" + name;
}

} // namespace

TEST_CASE("a minimal file yields the defaults")
{
  const MissionConfig c = parse_config("[meta]\nschema_version = 1\n");
  CHECK(c == MissionConfig{});
  CHECK(parse_config("") == MissionConfig{});
  CHECK(c.steps_per_period() == 8);
  CHECK(!c.kde_bandwidth);
  CHECK(c.controller().v_max == 5.0);
}

TEST_CASE("validation errors name the offending key")
{
  try {
    parse_config("[mission]\ndt = 0\n");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.section() == "mission");
    CHECK(e.key() == "dt");
    CHECK(e.reason() == "must be > 0");
    CHECK(e.code() == ErrorCode::ValidationError);
  }
  expect_invalid("[mission]\nperiod = 7.5\ndt = 1\n", "mission", "period");
  expect_invalid("[mission]\nn = abc\n", "mission", "n");
  expect_invalid("[domain]\nnx = 2\n", "domain", "nx");
  expect_invalid("[kde]\nfloor = 1\n", "kde", "floor");
  expect_invalid("[pde]\ncfl = 0.95\n", "pde", "cfl");
  expect_invalid("[mission]\nuncertainty_stat = max\n", "mission", "uncertainty_stat");
  expect_invalid("[mission]\ninit_x1 = 30\n", "mission", "init_x1");
  expect_invalid("[planner]\ncostate_boundary = open\n", "planner", "costate_boundary");
  expect_invalid("[meta]\nschema_version = 2\n", "meta", "schema_version");
}

TEST_CASE("unknown keys and sections are rejected")
{
  expect_invalid("[mission]\nspeed = 3\n", "mission", "speed");
  expect_invalid("[extras]\nfoo = 1\n", "extras", "foo");
  CHECK_THROWS_AS(parse_config("[mission\nn = 3\n"), Error);
}

TEST_CASE("special values")
{
  const MissionConfig c = parse_config(
      "[kde]\nbandwidth = 1.5\n[planner]\nkl_floor = 1e-6\n[controller]\nv_max = 0\n"
      "; comment\n[gp]\ntune = true\n");
  CHECK(c.kde_bandwidth == 1.5);
  CHECK(c.kl_floor == 1e-6);
  CHECK(!c.controller().v_max);
  CHECK(c.gp_tune);
}

TEST_CASE("shipped presets")
{
  const MissionConfig p = load_config(preset("full.ini"));
  CHECK(p.n == 100);
  CHECK(p.dt == 0.875);
  CHECK(p.period == 7.0);
  CHECK(p.gamma == 0.1);
  CHECK(p.nx == 64);
  CHECK(p.modes_i == 8);
  CHECK(p.intervals == 12);
  CHECK(p.w_f == 10.0);
  CHECK(p.alpha == 0.5);
  CHECK(p.init_region.x1 == 7.0);
  CHECK(p == MissionConfig{});

  const MissionConfig f = load_config(preset("fast.ini"));
  CHECK(f.nx == 32);
  CHECK(f.n == 64);
  CHECK_THROWS_AS(load_config(preset("missing.ini")), Error);
}

TEST_CASE("canonical form and hash")
{
  const std::string a = "[mission]\nn = 50\nseed = 3\n[domain]\nnx = 40\n";
  const std::string b = "[domain]\nnx = 40\n\n[mission]\nseed = 3\nn = 50\n";
  const MissionConfig ca = parse_config(a), cb = parse_config(b);
  CHECK(canonical_serialize(ca) == canonical_serialize(cb));
  CHECK(canonical_hash(ca) == canonical_hash(cb));
  CHECK(canonical_hash(ca).size() == 64);
  CHECK(canonical_hash(ca).find_first_not_of("0123456789abcdef") == std::string::npos);

  MissionConfig other = ca;
  other.seed = 4;
  CHECK(canonical_hash(other) != canonical_hash(ca));
  CHECK(canonical_hash(ca) == sha256_hex(canonical_serialize(ca)));

  // Known SHA-256 digest.
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");

  const MissionConfig odd = parse_config("[mission]\ndt = 0.1\nperiod = 0.7\n[agents]\nsigma = 0.1234567890123\n");
  CHECK(parse_config(canonical_serialize(odd)) == odd);
  CHECK(parse_config(canonical_serialize(MissionConfig{})) == MissionConfig{});
}
