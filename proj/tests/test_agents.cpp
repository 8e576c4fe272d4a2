#include <doctest.h>

#include "swarmfield/agents.hpp"
#include "swarmfield/error.hpp"
#include "swarmfield/kde.hpp"

#include <cmath>
#include <numbers>

using namespace swarmfield;

TEST_CASE("uniform initialization")
{
  const SwarmState s = init_uniform({0, 0, 7, 7}, 20, 20, 100, 11);
  CHECK(s.n() == 100);
  for (Vec2 p : s.positions) {
    CHECK(p.x >= 0.0);
    CHECK(p.x <= 7.0);
    CHECK(p.y >= 0.0);
    CHECK(p.y <= 7.0);
  }

  const SwarmState pt = init_uniform({3, 4, 3, 4}, 20, 20, 10, 1);
  for (Vec2 p : pt.positions) {
    CHECK(p.x == 3.0);
    CHECK(p.y == 4.0);
  }

  const SwarmState big = init_uniform({0, 0, 7, 7}, 20, 20, 100000, 5);
  double mx = 0.0, my = 0.0;
  for (Vec2 p : big.positions) {
    mx += p.x;
    my += p.y;
  }
  CHECK(std::abs(mx / 1e5 - 3.5) <= 0.02);
  CHECK(std::abs(my / 1e5 - 3.5) <= 0.02);

  try {
    init_uniform({0, 0, 25, 7}, 20, 20, 10, 1);
    FAIL("expected RegionOutsideDomain");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RegionOutsideDomain);
  }
}

TEST_CASE("deterministic motion and reflection")
{
  const Grid g(20, 20, 20, 20);
  SwarmState s = init_uniform({0, 0, 20, 20}, 20, 20, 50, 3);
  const SwarmState still = step(s, VectorField(g), 0.0, 0.5);
  CHECK(still.positions.size() == s.positions.size());
  for (std::size_t i = 0; i < s.n(); ++i) {
    CHECK(still.positions[i].x == s.positions[i].x);
    CHECK(still.positions[i].y == s.positions[i].y);
  }
  CHECK(still.t == 0.5);

  SwarmState one;
  one.b = 20;
  one.c = 20;
  one.positions = {{19.9, 5.0}};
  const SwarmState moved = step(one, [](Vec2) { return Vec2{2.0, 0.0}; }, 0.0, 0.1);
  CHECK(moved.positions[0].x == doctest::Approx(19.9).epsilon(1e-12));
  CHECK(moved.positions[0].y == 5.0);

  CHECK(reflect_into(-0.3, 20) == doctest::Approx(0.3));
  CHECK(reflect_into(20.1, 20) == doctest::Approx(19.9));
  CHECK(reflect_into(45.0, 20) == doctest::Approx(5.0));
  CHECK(reflect_into(-41.0, 20) == doctest::Approx(1.0));
}

TEST_CASE("positions stay in the closed domain")
{
  SwarmState s = init_uniform({0, 0, 20, 10}, 20, 10, 200, 9);
  auto wild = [](Vec2 p) { return Vec2{37.0 * std::sin(p.y), -55.0 * std::cos(3 * p.x)}; };
  for (int k = 0; k < 200; ++k) {
    s = step(s, wild, 3.0, 0.37);
    for (Vec2 p : s.positions) {
      REQUIRE(p.x >= 0.0);
      REQUIRE(p.x <= 20.0);
      REQUIRE(p.y >= 0.0);
      REQUIRE(p.y <= 10.0);
    }
  }
}

TEST_CASE("one-step displacement variance is 2 sigma dt")
{
  const double sigma = 0.3, dt = 0.1;
  SwarmState s = init_uniform({10, 10, 10, 10}, 20, 20, 100000, 21);
  const SwarmState next = step(s, [](Vec2) { return Vec2{}; }, sigma, dt);
  double sx = 0.0, sy = 0.0;
  for (Vec2 p : next.positions) {
    sx += (p.x - 10) * (p.x - 10);
    sy += (p.y - 10) * (p.y - 10);
  }
  const double expected = 2 * sigma * dt;
  CHECK(std::abs(sx / 1e5 / expected - 1.0) <= 0.03);
  CHECK(std::abs(sy / 1e5 / expected - 1.0) <= 0.03);
}

TEST_CASE("counter-based streams: results do not depend on swarm size or history of others")
{
  SwarmState a = init_uniform({0, 0, 20, 20}, 20, 20, 40, 77);
  SwarmState b = a;
  b.positions.resize(15);
  auto v = [](Vec2 p) { return Vec2{0.1 * p.y, -0.2}; };
  for (int k = 0; k < 5; ++k) {
    a = step(a, v, 0.05, 0.2);
    b = step(b, v, 0.05, 0.2);
  }
  for (std::size_t i = 0; i < b.n(); ++i) {
    CHECK(a.positions[i].x == b.positions[i].x);
    CHECK(a.positions[i].y == b.positions[i].y);
  }
  const auto ma = measure(a, sinc_truth(), 0.04);
  const auto mb = measure(b, sinc_truth(), 0.04);
  for (std::size_t i = 0; i < mb.size(); ++i)
    CHECK(ma[i].y == mb[i].y);
}

TEST_CASE("measurements")
{
  const GroundTruthField f = sinc_truth();
  SwarmState s = init_uniform({0, 0, 20, 20}, 20, 20, 30, 4);
  const auto exact = measure(s, f, 0.0);
  for (const auto& m : exact)
    CHECK(m.y == f(m.position));
  CHECK(s.batches == 1);
  CHECK(exact[3].agent == 3);
  CHECK(exact[3].k == 0);

  SwarmState many = init_uniform({5, 6, 5, 6}, 20, 20, 100000, 8);
  const auto noisy = measure(many, f, 0.04);
  double mean = 0.0;
  for (const auto& m : noisy)
    mean += m.y;
  mean /= 1e5;
  CHECK(std::abs(mean - f({5, 6})) <= 3.0 * std::sqrt(0.04 / 1e5));
}

TEST_CASE("sinc truth values")
{
  const GroundTruthField f = sinc_truth();
  CHECK(f({0, 0}) == 4.0);
  CHECK(f({std::numbers::pi / 2, 0}) == doctest::Approx(2.0).epsilon(1e-15));
  const double r = std::sqrt(800.0);
  CHECK(f({20, 20}) == doctest::Approx(2.0 + std::sin(2 * r) / r).epsilon(1e-15));
  CHECK(std::abs(f({1e-9, 0}) - 4.0) < 1e-12);
  CHECK(truth_by_name("bumps").name == "bumps");
  CHECK_THROWS_AS(truth_by_name("nope"), Error);
}

TEST_CASE("free diffusion spreads a clustered swarm toward uniform")
{
  const Grid g(20, 20, 32, 32);
  SwarmState s = init_uniform({0, 0, 5, 5}, 20, 20, 10000, 12);
  const ScalarField u = uniform_density(g);
  const double dt = 0.5;
  const double d0 = l2_norm(estimate_density(s.positions, g, {}) - u);
  for (int k = 0; k < 50; ++k)
    s = step(s, [](Vec2) { return Vec2{}; }, 0.5, dt);
  const double d1 = l2_norm(estimate_density(s.positions, g, {}) - u);
  CHECK(d1 < d0);
}

TEST_CASE("csv exports")
{
  SwarmState s = init_uniform({0, 0, 1, 1}, 20, 20, 2, 1);
  std::string out = trajectory_csv_header();
  append_trajectory_csv(out, s);
  CHECK(out.rfind("t,agent_id,x1,x2\n0,0,", 0) == 0);
  Dataset d;
  d.append(measure(s, sinc_truth(), 0.0));
  CHECK(measurements_csv(d).rfind("k,agent_id,x1,x2,y\n0,0,", 0) == 0);
}
