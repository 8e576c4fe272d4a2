#include <doctest.h>

#include "swarmfield/error.hpp"
#include "swarmfield/planner.hpp"
#include "swarmfield/rng.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace swarmfield;

namespace {

constexpr double pi = std::numbers::pi;

ScalarField gaussian(const Grid& g, Vec2 c, double s)
{
  return normalize(ScalarField::sample(g, [&](Vec2 p) {
    return std::exp(-((p.x - c.x) * (p.x - c.x) + (p.y - c.y) * (p.y - c.y)) / (2 * s * s));
  }));
}

void randomize(FourierVelocity& fv, double scale, std::uint64_t seed)
{
  auto eng = rng::engine(seed, rng::Stream::Test, 0, 0);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (Vec2& a : fv.coefficients())
    a = {u(eng), u(eng)};
}

double cost_of(const ScalarField& p0, const FourierVelocity& fv, const CostFunctional& cost,
               const PlannerConfig& cfg)
{
  return evaluate_cost(plan_forward(p0, fv, cfg), fv, cost);
}

} // namespace

TEST_CASE("basis evaluation")
{
  const Grid g(10, 6, 20, 12);
  FourierVelocity fv(3, 2, 4, 1.0, 8.0);
  CHECK(fv.coefficients().size() == 3u * 2u * 4u);
  CHECK(fv.break_time(4) == 9.0);
  CHECK(fv.interval(1.0) == 0);
  CHECK(fv.interval(2.99) == 0);
  CHECK(fv.interval(3.0) == 1);
  CHECK(fv.interval(100.0) == 3);

  fv.a(2, 1, 2) = {0.7, -0.4};
  const VectorField v = eval_velocity(fv, 6.0, g);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const double s = std::sin(2 * pi * g.xc(i) / 10) * std::sin(pi * g.yc(j) / 6);
      CHECK(v.x(i, j) == doctest::Approx(0.7 * s).epsilon(1e-14));
      CHECK(v.y(i, j) == doctest::Approx(-0.4 * s).epsilon(1e-14));
    }
  CHECK(eval_velocity(fv, 2.0, g).max_abs() == 0.0);

  const PiecewiseVelocity pw = to_piecewise(fv, g);
  CHECK(pw.breaks.size() == 5);
  CHECK(pw.fields[2] == v);
}

TEST_CASE("symmetric KL")
{
  CHECK(sym_kl_point(0.3, 0.3, 1e-8) == 0.0);
  CHECK(sym_kl_point(0.3, 0.1, 1e-8) == doctest::Approx(0.2 * std::log(3.0)));
  CHECK(sym_kl_point(0.0, 0.1, 1e-3) == doctest::Approx((1e-3 - 0.1) * std::log(1e-2)));
  CHECK(sym_kl_dp(0.0, 0.1, 1e-3) == 0.0);
  // Derivative against a central difference.
  const double h = 1e-7;
  CHECK(sym_kl_dp(0.4, 0.15, 1e-8) ==
        doctest::Approx((sym_kl_point(0.4 + h, 0.15, 1e-8) - sym_kl_point(0.4 - h, 0.15, 1e-8)) / (2 * h))
            .epsilon(1e-6));

  const Grid g(10, 10, 16, 16);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const ScalarField a = gaussian(g, {2.0 + 0.3 * double(s), 5}, 1.0 + 0.1 * double(s));
    const ScalarField b = gaussian(g, {7, 3.0 + 0.2 * double(s)}, 2.0);
    CHECK(symmetric_kl(a, b, 1e-8) >= 0.0);
    CHECK(symmetric_kl(a, b, 1e-8) == doctest::Approx(symmetric_kl(b, a, 1e-8)).epsilon(1e-12));
    CHECK(symmetric_kl(a, a, 1e-8) == 0.0);
  }
}

TEST_CASE("cost oracles")
{
  const Grid g(10, 10, 16, 16);
  PlannerConfig cfg;
  cfg.I = cfg.J = 2;
  cfg.N = 3;
  cfg.T = 3.0;

  // Zero velocity and p0 = p_f: nothing to pay.
  const ScalarField pf = gaussian(g, {5, 5}, 2.0);
  const CostFunctional at_target(pf);
  const FourierVelocity zero(2, 2, 3, 0.0, 3.0);
  CHECK(cost_of(pf, zero, at_target, cfg) == 0.0);

  // Zero velocity: the state is frozen and J = (w_f + w_p T) symKL.
  const ScalarField p0 = gaussian(g, {3, 4}, 1.5);
  const double kl = symmetric_kl(p0, pf, at_target.kl_floor);
  CHECK(kl > 0.0);
  CHECK(cost_of(p0, zero, at_target, cfg) == doctest::Approx((10.0 + 1.0 * 3.0) * kl).epsilon(1e-12));

  // Only the control term: discrete sine orthogonality gives w_v T sum|a|^2 bc/4.
  CostFunctional energy(pf);
  energy.w_f = 0.0;
  energy.w_p = 0.0;
  FourierVelocity fv(2, 2, 3, 0.0, 3.0);
  randomize(fv, 0.3, 4);
  double sum = 0.0;
  for (const Vec2& a : fv.coefficients())
    sum += a.x * a.x + a.y * a.y;
  const double expected = 0.1 * (3.0 / 3.0) * sum * 100.0 / 4.0;
  CHECK(cost_of(p0, fv, energy, cfg) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("reduced gradient matches central finite differences")
{
  const Grid g(10, 10, 16, 16);
  PlannerConfig cfg;
  cfg.I = cfg.J = 2;
  cfg.N = 3;
  cfg.T = 2.0;
  const ScalarField p0 = gaussian(g, {3.5, 4.0}, 1.5);
  CostFunctional cost(gaussian(g, {6.0, 5.5}, 1.8));

  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    FourierVelocity fv(2, 2, 3, 0.0, 2.0);
    randomize(fv, 0.3, seed);
    const auto traj = plan_forward(p0, fv, cfg);
    const auto lam = plan_costate(traj, fv, cost, CostateBoundary::Natural);
    const FourierVelocity grad = reduced_gradient(traj, lam, fv, cost);

    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t k = 0; k < fv.coefficients().size(); ++k)
      for (int comp = 0; comp < 2; ++comp) {
        FourierVelocity plus = fv, minus = fv;
        (comp ? plus.coefficients()[k].y : plus.coefficients()[k].x) += h;
        (comp ? minus.coefficients()[k].y : minus.coefficients()[k].x) -= h;
        const double fd = (cost_of(p0, plus, cost, cfg) - cost_of(p0, minus, cost, cfg)) / (2 * h);
        const double an = comp ? grad.coefficients()[k].y : grad.coefficients()[k].x;
        worst = std::max(worst, std::abs(an - fd) / std::max(std::abs(fd), 1e-3));
      }
    CHECK(worst <= 1e-3);
  }
}

TEST_CASE("gradient vanishes when the target is already reached")
{
  const Grid g(10, 10, 16, 16);
  PlannerConfig cfg;
  cfg.I = cfg.J = 2;
  cfg.N = 3;
  cfg.T = 2.0;
  const ScalarField pf = gaussian(g, {5, 5}, 2.0);
  const CostFunctional cost(pf);
  const FourierVelocity zero(2, 2, 3, 0.0, 2.0);
  const auto traj = plan_forward(pf, zero, cfg);
  const auto lam = plan_costate(traj, zero, cost, CostateBoundary::Natural);
  const FourierVelocity grad = reduced_gradient(traj, lam, zero, cost);
  for (const Vec2& a : grad.coefficients()) {
    CHECK(a.x == 0.0);
    CHECK(a.y == 0.0);
  }

  const ReferenceTrajectory ref = grg_solve(pf, cost, cfg);
  CHECK(ref.converged);
  CHECK(ref.history.size() <= 2);
  CHECK(ref.cost == 0.0);
}

TEST_CASE("GRG decreases the cost monotonically and moves mass toward the target")
{
  const Grid g(10, 10, 24, 24);
  PlannerConfig cfg;
  cfg.I = cfg.J = 3;
  cfg.N = 4;
  cfg.T = 4.0;
  cfg.max_iters = 30;
  const ScalarField p0 = gaussian(g, {3, 3}, 1.2);
  const CostFunctional cost(gaussian(g, {6.5, 6.5}, 1.5));
  const ReferenceTrajectory ref = grg_solve(p0, cost, cfg);
  REQUIRE(ref.history.size() >= 2);
  for (std::size_t k = 1; k < ref.history.size(); ++k)
    CHECK(ref.history[k].cost <= ref.history[k - 1].cost);
  const double before = symmetric_kl(p0, cost.p_f, cost.kl_floor);
  const double after = symmetric_kl(ref.p_r.back(), cost.p_f, cost.kl_floor);
  CHECK(after < 0.5 * before);
  CHECK(ref.cost == doctest::Approx(evaluate_cost(ref.p_r, ref.fv, cost)).epsilon(1e-12));
  CHECK(ref.v_r.breaks.size() == 5);
  for (const auto& f : ref.p_r.fields)
    CHECK(std::abs(integrate(f) - 1.0) <= 1e-10);
}

TEST_CASE("coefficients JSON round trip")
{
  const Grid g(10, 10, 12, 12);
  PlannerConfig cfg;
  cfg.I = 2;
  cfg.J = 3;
  cfg.N = 2;
  cfg.T = 1.0;
  cfg.max_iters = 3;
  const CostFunctional cost(gaussian(g, {6, 6}, 2.0));
  const ReferenceTrajectory ref = grg_solve(gaussian(g, {4, 4}, 2.0), cost, cfg);
  const FourierVelocity back = coefficients_from_json(coefficients_json(ref, cost));
  CHECK(back.I() == 2);
  CHECK(back.J() == 3);
  CHECK(back.N() == 2);
  CHECK(back.T() == 1.0);
  REQUIRE(back.coefficients().size() == ref.fv.coefficients().size());
  for (std::size_t k = 0; k < back.coefficients().size(); ++k) {
    CHECK(back.coefficients()[k].x == ref.fv.coefficients()[k].x);
    CHECK(back.coefficients()[k].y == ref.fv.coefficients()[k].y);
  }
}

TEST_CASE("invalid weights are rejected")
{
  const Grid g(10, 10, 8, 8);
  CostFunctional cost(uniform_density(g));
  cost.w_v = -1.0;
  PlannerConfig cfg;
  cfg.I = cfg.J = 1;
  cfg.N = 1;
  cfg.T = 1.0;
  CHECK_THROWS_AS(grg_solve(uniform_density(g), cost, cfg), Error);
}
