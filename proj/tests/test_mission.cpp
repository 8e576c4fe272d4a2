#include <doctest.h>

#include "swarmfield/mission.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace swarmfield;

namespace {

constexpr double pi = std::numbers::pi;

MissionConfig tiny()
{
  MissionConfig c;
  c.n = 30;
  c.nx = c.ny = 16;
  c.modes_i = c.modes_j = 2;
  c.intervals = 2;
  c.max_iters = 5;
  c.max_outer = 2;
  c.gamma = 1e-6;
  c.gp_max_points = 300;
  return c;
}

double phi_norm(const ScalarField& p, const ScalarField& pr)
{
  return l2_norm(p - pr);
}

} // namespace

TEST_CASE("a huge gamma ends the mission before the first period")
{
  MissionConfig c = tiny();
  c.gamma = 1e9;
  const MissionLog log = run_mission(c);
  CHECK(log.outcome == Outcome::Success);
  CHECK(log.outer_periods() == 0);
  CHECK(log.outer.size() == 1);
  CHECK(log.snapshots.size() == 1);
  CHECK(log.data.size() == c.n);
  CHECK(log.steps.empty());
}

TEST_CASE("a capped mission: bookkeeping")
{
  const MissionConfig c = tiny();
  const MissionLog log = run_mission(c);
  CHECK(log.error.empty());
  CHECK(log.outcome == Outcome::Cap);
  CHECK(log.outer_periods() == c.max_outer);
  CHECK(log.snapshots.size() == std::size_t(c.max_outer) + 1);
  CHECK(log.plans.size() == std::size_t(c.max_outer));
  const int steps = c.steps_per_period();
  CHECK(steps == 8);
  CHECK(log.steps.size() == std::size_t(steps * c.max_outer));
  for (const auto& r : log.outer)
    CHECK(r.dataset_size == c.n * (1 + std::size_t(r.k) * std::size_t(steps)));
  for (std::size_t k = 1; k < log.outer.size(); ++k)
    CHECK(log.outer[k].t == doctest::Approx(7.0 * double(k)));
  for (const auto& s : log.steps) {
    CHECK(std::isfinite(s.tracking_error));
    CHECK(s.lyapunov == doctest::Approx(0.5 * s.tracking_error * s.tracking_error));
    CHECK(s.v_max <= c.v_max);
  }
  CHECK(log.config_hash == canonical_hash(c));
}

TEST_CASE("missions are deterministic in the seed")
{
  MissionConfig c = tiny();
  c.max_outer = 1;
  const MissionLog a = run_mission(c);
  const MissionLog b = run_mission(c);
  CHECK(a.outer == b.outer);
  CHECK(a.steps == b.steps);
  CHECK(a.trajectories_csv == b.trajectories_csv);
  c.seed = 2;
  const MissionLog d = run_mission(c);
  CHECK(d.steps.front().positions_digest != a.steps.front().positions_digest);
}

TEST_CASE("mission.json round trip and exports")
{
  MissionConfig c = tiny();
  c.max_outer = 1;
  const MissionLog log = run_mission(c);
  const MissionLog back = mission_from_json(mission_json(log));
  CHECK(back.outer == log.outer);
  CHECK(back.steps == log.steps);
  CHECK(back.config_hash == log.config_hash);
  CHECK(back.config_text == log.config_text);
  CHECK(back.seed == log.seed);
  CHECK(back.outcome == log.outcome);

  const auto dir = std::filesystem::temp_directory_path() / "sf_mission_test";
  std::filesystem::remove_all(dir);
  export_mission(log, dir.string());
  for (const char* f : {"mission.json", "prediction_error.csv", "tracking_error.csv",
                        "trajectories.csv", "measurements.csv", "snapshots/outer_00/p_hat.csv",
                        "snapshots/outer_01/velocity.csv", "plans/period_01/coefficients.json"})
    CHECK_MESSAGE(std::filesystem::exists(dir / f), f);
  std::ifstream in(dir / "prediction_error.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header.find("prediction_error") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("prediction error")
{
  const Grid g(20, 20, 12, 12);
  const GroundTruthField f = sinc_truth();
  const ScalarField exact = ScalarField::sample(g, [&](Vec2 x) { return f(x); });
  CHECK(prediction_error(exact, f) == 0.0);
  double s = 0.0;
  for (double v : exact.values())
    s += v * v;
  CHECK(prediction_error(ScalarField(g, 0.0), f) ==
        doctest::Approx(std::sqrt(s * g.cell_area())).epsilon(1e-12));
}

TEST_CASE("density loop: equilibrium, decay and bounded response to estimation error")
{
  const Grid g(20, 20, 24, 24);
  const ScalarField u = uniform_density(g);
  FieldTrajectory pr;
  pr.times = {0.0, 200.0};
  pr.fields = {u, u};
  const auto vr = PiecewiseVelocity::constant(VectorField(g), 0.0, 200.0);
  ControllerConfig ctrl;
  PdeRunConfig run;
  run.t_end = 200.0;

  const DensityLoopResult still = run_density_loop(u, pr, vr, ctrl, run);
  for (double n : still.phi_norm)
    CHECK(n <= 1e-15);

  const ScalarField p0 = ScalarField::sample(g, [](Vec2 x) {
    return (1.0 + 0.5 * std::cos(pi * x.x / 20) * std::cos(pi * x.y / 20)) / 400.0;
  });
  const DensityLoopResult exact = run_density_loop(p0, pr, vr, ctrl, run);
  for (std::size_t k = 1; k < exact.phi_norm.size(); ++k)
    CHECK(exact.phi_norm[k] <= exact.phi_norm[k - 1] + 1e-15);
  CHECK(exact.phi_norm.back() < 0.5 * exact.phi_norm.front());
  CHECK(phi_norm(exact.p.back(), u) == doctest::Approx(exact.phi_norm.back()).epsilon(1e-12));

  // A constant relative error cancels in the law when p_r is uniform.
  const DensityLoopResult cons =
      run_density_loop(p0, pr, vr, ctrl, run, multiplicative_injector(g, 0.3, "constant"));
  CHECK(cons.times == exact.times);
  CHECK(std::abs(cons.phi_norm.back() - exact.phi_norm.back()) <= 1e-12);

  // A smooth error leaves a steady residual, p ~ 1/(1 + eps), that grows with its size.
  const auto small = run_density_loop(p0, pr, vr, ctrl, run, multiplicative_injector(g, 0.05, "smooth"));
  const auto large = run_density_loop(p0, pr, vr, ctrl, run, multiplicative_injector(g, 0.2, "smooth"));
  CHECK(small.phi_norm.back() < large.phi_norm.back());
  CHECK(large.phi_norm.back() < exact.phi_norm.front());
  for (const auto& f : large.p.fields)
    CHECK(std::abs(integrate(f) - 1.0) <= 1e-10);
}
