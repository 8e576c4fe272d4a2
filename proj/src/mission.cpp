#include "swarmfield/mission.hpp"

#include "swarmfield/error.hpp"
#include "swarmfield/gp.hpp"
#include "swarmfield/hash.hpp"
#include "swarmfield/kde.hpp"
#include "swarmfield/log.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

namespace swarmfield {

double prediction_error(const ScalarField& gp_mean, const GroundTruthField& truth)
{
  const ScalarField f = ScalarField::sample(gp_mean.grid(), [&](Vec2 x) { return truth(x); });
  return l2_norm(f - gp_mean);
}

namespace {

struct Regression
{
  GpFieldPrediction prediction;
  ScalarField uncertainty;
  double sup = 0.0;
};

Regression regress(const Dataset& data, const MissionConfig& cfg, const Grid& grid)
{
  const Grid bins(cfg.b, cfg.c, 16, 16);
  const auto subset = stratified_subsample(data.records, cfg.gp_max_points, bins);
  GpHyper hyper = cfg.gp;
  if (cfg.gp_tune) {
    std::vector<GpHyper> candidates;
    for (double sv : {0.5, 1.0, 2.0})
      for (double ell : {1.0, 1.5, 2.0, 3.0})
        candidates.push_back({sv, ell, cfg.gp.noise_var});
    hyper = candidates[tune_hyper(subset, candidates)];
  }
  const GpPosterior gp = GpPosterior::fit(subset, hyper);
  Regression out{gp.predict(grid), ScalarField(grid), 0.0};
  out.uncertainty = cfg.uncertainty_stat == "stddev"
                        ? standard_deviation(out.prediction.variance)
                        : out.prediction.variance;
  out.sup = sup_uncertainty(out.uncertainty);
  return out;
}

// p_r at the sampling instants only, to keep plans small.
DensityTrajectory sample_plan(const DensityTrajectory& p_r, double t0, double dt, int steps)
{
  DensityTrajectory out;
  for (int k = 0; k <= steps; ++k) {
    const double t = t0 + k * dt;
    out.times.push_back(t);
    out.fields.push_back(p_r.at(t));
  }
  return out;
}

} // namespace

MissionLog run_mission(const MissionConfig& cfg)
{
  MissionLog log;
  log.config_text = canonical_serialize(cfg);
  log.config_hash = canonical_hash(cfg);
  log.seed = cfg.seed;

  try {
    validate(cfg);
    const Grid grid = cfg.grid();
    const GroundTruthField truth = truth_by_name(cfg.truth);
    const KdeConfig kde_cfg = cfg.kde();
    const ControllerConfig ctrl = cfg.controller();
    const int steps = cfg.steps_per_period();

    SwarmState state = init_uniform(cfg.init_region, cfg.b, cfg.c, cfg.n, cfg.seed);
    log.trajectories_csv = trajectory_csv_header();
    append_trajectory_csv(log.trajectories_csv, state);
    log.data.noise_var = cfg.noise_var;
    log.data.append(measure(state, truth, cfg.noise_var));

    Regression reg = regress(log.data, cfg, grid);
    double t_c = 0.0;
    {
      const ScalarField p_hat = estimate_density(state.positions, grid, kde_cfg);
      log.outer.push_back({0, t_c, log.data.size(), reg.sup,
                           prediction_error(reg.prediction.mean, truth), {}, false});
      log.snapshots.push_back(
          {t_c, p_hat, p_hat, reg.prediction.mean, reg.uncertainty, VectorField(grid)});
    }
    swarmfield::log().info("initial regression: {} points, sup uncertainty {}",
                           log.data.size(), reg.sup);

    int outer = 0;
    while (reg.sup > cfg.gamma && outer < cfg.max_outer) {
      const ScalarField p_f = target_density(reg.uncertainty, cfg.eta);
      const ScalarField p0 = estimate_density(state.positions, grid, kde_cfg);
      const CostFunctional cost = cfg.cost(p_f);
      const ReferenceTrajectory ref = grg_solve(p0, cost, cfg.planner(t_c));

      OuterRecord& prev = log.outer.back();
      for (const auto& h : ref.history)
        prev.planner_costs.push_back(h.cost);
      prev.planner_converged = ref.converged;
      log.plans.push_back({t_c, sample_plan(ref.p_r, t_c, cfg.dt, steps),
                           coefficients_json(ref, cost)});

      VectorField v(grid);
      ScalarField p_r(grid);
      for (int k = 0; k < steps; ++k) {
        const double t = t_c + k * cfg.dt;
        const ScalarField p_hat = estimate_density(state.positions, grid, kde_cfg);
        p_r = ref.p_r.at(t);
        v = estimated_feedback(p_hat, p_r, ref.v_r.at(t), ctrl);
        if (!v.all_finite())
          throw Error(ErrorCode::NonFiniteFeedback, "commanded velocity is not finite");

        double vmax = 0.0, vsum = 0.0;
        for (Vec2 x : state.positions) {
          const Vec2 u = interpolate(v, x);
          const double s = std::hypot(u.x, u.y);
          vmax = std::max(vmax, s);
          vsum += s;
        }
        const double track = l2_norm(p_hat - p_r);

        const double h = cfg.dt / cfg.agent_substeps;
        for (int s = 0; s < cfg.agent_substeps; ++s)
          state = step(state, v, cfg.sigma, h);
        state.t = t + cfg.dt;
        append_trajectory_csv(log.trajectories_csv, state);
        log.data.append(measure(state, truth, cfg.noise_var));

        log.steps.push_back({t + cfg.dt, positions_digest(state.positions), vmax,
                             vsum / double(state.n()), track, 0.5 * track * track});
      }

      ++outer;
      t_c += cfg.period;
      reg = regress(log.data, cfg, grid);
      log.outer.push_back({outer, t_c, log.data.size(), reg.sup,
                           prediction_error(reg.prediction.mean, truth), {}, false});
      log.snapshots.push_back({t_c, estimate_density(state.positions, grid, kde_cfg), p_r,
                               reg.prediction.mean, reg.uncertainty, v});
      swarmfield::log().info("period {}: {} points, sup uncertainty {}, prediction error {}",
                             outer, log.data.size(), reg.sup, log.outer.back().prediction_error);
    }
    log.outcome = reg.sup <= cfg.gamma ? Outcome::Success : Outcome::Cap;
  } catch (const std::exception& e) {
    log.outcome = Outcome::Incomplete;
    log.error = e.what();
    swarmfield::log().error("mission aborted: {}", e.what());
  }
  return log;
}

DensityLoopResult run_density_loop(const ScalarField& p0, const FieldTrajectory& p_r,
                                   const PiecewiseVelocity& v_r,
                                   const ControllerConfig& ctrl, const PdeRunConfig& run,
                                   const ErrorInjector& injector)
{
  const Grid& g = p0.grid();
  // The closed loop acts like diffusion with coefficient alpha, which the
  // velocity-based CFL bound cannot see.
  PdeRunConfig r = run;
  const double amax = coefficient_max(ctrl.alpha);
  const double alpha_bound =
      r.cfl_target / (2.0 * amax * (1.0 / (g.hx() * g.hx()) + 1.0 / (g.hy() * g.hy())));
  r.dt_max = std::min(r.dt_max, alpha_bound);

  DensityLoopResult out;
  auto record = [&](double t, const ScalarField& p) {
    const double n = l2_norm(p - p_r.at(t));
    out.times.push_back(t);
    out.phi_norm.push_back(n);
    out.lyapunov.push_back(0.5 * n * n);
  };
  record(r.t_start, p0);

  const FeedbackVelocity law = [&](double t, const ScalarField& p) {
    if (injector)
      return estimated_feedback(injector(p, t), p_r.at(t), v_r.at(t), ctrl);
    return exact_feedback(p, p_r.at(t), v_r.at(t), ctrl);
  };
  out.p = solve_fokker_planck(p0, law, ctrl.sigma, r, record);
  return out;
}

ErrorInjector multiplicative_injector(const Grid& grid, double mag, const std::string& mode)
{
  ScalarField eps(grid);
  if (mode == "smooth") {
    eps = ScalarField::sample(grid, [&](Vec2 x) {
      return std::cos(std::numbers::pi * x.x / grid.b()) * std::cos(std::numbers::pi * x.y / grid.c());
    });
    double m = 0.0;
    for (double e : eps.values())
      m = std::max(m, std::abs(e));
    eps *= mag / m;
  } else if (mode == "constant") {
    eps = ScalarField(grid, mag);
  } else if (mode != "none") {
    throw Error(ErrorCode::InvalidArgument, "eps mode must be smooth, constant or none");
  }
  if (!(eps.min() > -1.0))
    throw Error(ErrorCode::InvalidArgument, "error magnitude must keep 1 + eps positive");
  return [eps](const ScalarField& p, double) {
    ScalarField out = p;
    for (std::size_t k = 0; k < out.size(); ++k)
      out[k] *= 1.0 + eps[k];
    return out;
  };
}

namespace {

const char* outcome_name(Outcome o)
{
  switch (o) {
  case Outcome::Success:
    return "success";
  case Outcome::Cap:
    return "cap";
  case Outcome::Incomplete:
    break;
  }
  return "incomplete";
}

Outcome outcome_from(const std::string& s)
{
  if (s == "success")
    return Outcome::Success;
  if (s == "cap")
    return Outcome::Cap;
  return Outcome::Incomplete;
}

} // namespace

std::string mission_json(const MissionLog& log)
{
  nlohmann::json doc;
  doc["config_hash"] = log.config_hash;
  doc["config"] = log.config_text;
  doc["seed"] = log.seed;
  doc["outcome"] = outcome_name(log.outcome);
  doc["error"] = log.error;
  doc["outer_periods"] = log.outer_periods();
  nlohmann::json outer = nlohmann::json::array();
  for (const auto& o : log.outer)
    outer.push_back({{"k", o.k},
                     {"t", o.t},
                     {"dataset_size", o.dataset_size},
                     {"sup_uncertainty", o.sup_uncertainty},
                     {"prediction_error", o.prediction_error},
                     {"planner_costs", o.planner_costs},
                     {"planner_converged", o.planner_converged}});
  doc["outer"] = outer;
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : log.steps)
    steps.push_back({{"t", s.t},
                     {"positions_digest", s.positions_digest},
                     {"v_max", s.v_max},
                     {"v_mean", s.v_mean},
                     {"tracking_error", s.tracking_error},
                     {"lyapunov", s.lyapunov}});
  doc["steps"] = steps;
  return doc.dump(1);
}

MissionLog mission_from_json(const std::string& text)
{
  MissionLog log;
  try {
    const auto doc = nlohmann::json::parse(text);
    log.config_hash = doc.at("config_hash").get<std::string>();
    log.config_text = doc.at("config").get<std::string>();
    log.seed = doc.at("seed").get<std::uint64_t>();
    log.outcome = outcome_from(doc.at("outcome").get<std::string>());
    log.error = doc.at("error").get<std::string>();
    for (const auto& o : doc.at("outer"))
      log.outer.push_back({o.at("k").get<int>(), o.at("t").get<double>(),
                           o.at("dataset_size").get<std::size_t>(),
                           o.at("sup_uncertainty").get<double>(),
                           o.at("prediction_error").get<double>(),
                           o.at("planner_costs").get<std::vector<double>>(),
                           o.at("planner_converged").get<bool>()});
    for (const auto& s : doc.at("steps"))
      log.steps.push_back({s.at("t").get<double>(),
                           s.at("positions_digest").get<std::string>(),
                           s.at("v_max").get<double>(), s.at("v_mean").get<double>(),
                           s.at("tracking_error").get<double>(),
                           s.at("lyapunov").get<double>()});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("mission.json: ") + e.what());
  }
  return log;
}

std::string prediction_error_csv(const MissionLog& log)
{
  std::string out = "k,t,dataset_size,sup_uncertainty,prediction_error\n";
  for (const auto& o : log.outer)
    out += std::to_string(o.k) + "," + format_double(o.t) + "," +
           std::to_string(o.dataset_size) + "," + format_double(o.sup_uncertainty) + "," +
           format_double(o.prediction_error) + "\n";
  return out;
}

std::string tracking_error_csv(const MissionLog& log)
{
  std::string out = "t,tracking_error,lyapunov,v_max,v_mean\n";
  for (const auto& s : log.steps)
    out += format_double(s.t) + "," + format_double(s.tracking_error) + "," +
           format_double(s.lyapunov) + "," + format_double(s.v_max) + "," +
           format_double(s.v_mean) + "\n";
  return out;
}

void export_mission(const MissionLog& log, const std::string& dir)
{
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw Error(ErrorCode::IoError, "cannot create '" + dir + "': " + ec.message());
  const fs::path root(dir);
  write_text((root / "mission.json").string(), mission_json(log));
  write_text((root / "prediction_error.csv").string(), prediction_error_csv(log));
  write_text((root / "tracking_error.csv").string(), tracking_error_csv(log));
  write_text((root / "trajectories.csv").string(), log.trajectories_csv);
  write_text((root / "measurements.csv").string(), measurements_csv(log.data));

  char name[32];
  for (std::size_t k = 0; k < log.snapshots.size(); ++k) {
    std::snprintf(name, sizeof(name), "outer_%02zu", k);
    const fs::path d = root / "snapshots" / name;
    fs::create_directories(d, ec);
    if (ec)
      throw Error(ErrorCode::IoError, "cannot create '" + d.string() + "'");
    const Snapshot& s = log.snapshots[k];
    write_text((d / "p_hat.csv").string(), to_csv(s.p_hat));
    write_text((d / "p_r.csv").string(), to_csv(s.p_r));
    write_text((d / "gp_mean.csv").string(), to_csv(s.gp_mean));
    write_text((d / "gp_uncertainty.csv").string(), to_csv(s.gp_uncertainty));
    write_text((d / "velocity.csv").string(), to_csv(s.velocity));
  }
  for (std::size_t k = 0; k < log.plans.size(); ++k) {
    std::snprintf(name, sizeof(name), "period_%02zu", k + 1);
    const fs::path d = root / "plans" / name;
    export_trajectory(log.plans[k].p_r, d.string(), log.config_hash);
    write_text((d / "coefficients.json").string(), log.plans[k].coefficients_json);
  }
}

void export_plots(const std::string& mission_json_path, const std::string& dir)
{
  namespace fs = std::filesystem;
  const MissionLog log = mission_from_json(read_text(mission_json_path));
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw Error(ErrorCode::IoError, "cannot create '" + dir + "': " + ec.message());
  write_text((fs::path(dir) / "prediction_error.csv").string(), prediction_error_csv(log));
  write_text((fs::path(dir) / "tracking_error.csv").string(), tracking_error_csv(log));
}

} // namespace swarmfield
