#include "swarmfield.h"

#include "swarmfield/config.hpp"
#include "swarmfield/error.hpp"
#include "swarmfield/mission.hpp"
#include "swarmfield/planner.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <new>
#include <numbers>
#include <string>

struct sf_config
{
  swarmfield::MissionConfig cfg;
};

struct sf_mission
{
  swarmfield::MissionLog log;
};

namespace {

thread_local std::string last_error;

sf_status map_code(swarmfield::ErrorCode code)
{
  using swarmfield::ErrorCode;
  switch (code) {
  case ErrorCode::ParseError:
    return SF_ERR_PARSE;
  case ErrorCode::ValidationError:
    return SF_ERR_VALIDATION;
  case ErrorCode::IoError:
    return SF_ERR_IO;
  case ErrorCode::InvalidArgument:
  case ErrorCode::RegionOutsideDomain:
  case ErrorCode::ShapeMismatch:
    return SF_ERR_ARGUMENT;
  default:
    return SF_ERR_NUMERIC;
  }
}

template<class F>
sf_status guarded(F&& body)
{
  try {
    body();
    last_error.clear();
    return SF_OK;
  } catch (const swarmfield::Error& e) {
    last_error = e.what();
    return map_code(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown error";
  }
  return SF_ERR_INTERNAL;
}

sf_status null_argument(const char* what)
{
  last_error = std::string(what) + " must not be null";
  return SF_ERR_ARGUMENT;
}

} // namespace

extern "C" {

const char* sf_last_error(void)
{
  return last_error.c_str();
}

const char* sf_version(void)
{
  return "1.0.0";
}

sf_status sf_config_load(const char* path, sf_config** out)
{
  if (!path || !out)
    return null_argument("path and out");
  *out = nullptr;
  return guarded([&] { *out = new sf_config{swarmfield::load_config(path)}; });
}

sf_status sf_config_default(sf_config** out)
{
  if (!out)
    return null_argument("out");
  return guarded([&] { *out = new sf_config{}; });
}

void sf_config_free(sf_config* cfg)
{
  delete cfg;
}

sf_status sf_config_set_seed(sf_config* cfg, uint64_t seed)
{
  if (!cfg)
    return null_argument("cfg");
  cfg->cfg.seed = seed;
  return SF_OK;
}

sf_status sf_config_hash(const sf_config* cfg, char out[65])
{
  if (!cfg || !out)
    return null_argument("cfg and out");
  return guarded([&] {
    const std::string h = swarmfield::canonical_hash(cfg->cfg);
    std::memcpy(out, h.c_str(), 65);
  });
}

sf_status sf_config_canonical(const sf_config* cfg, char* buf, size_t cap, size_t* needed)
{
  if (!cfg)
    return null_argument("cfg");
  return guarded([&] {
    const std::string text = swarmfield::canonical_serialize(cfg->cfg);
    if (needed)
      *needed = text.size() + 1;
    if (!buf)
      return;
    if (cap < text.size() + 1)
      throw swarmfield::Error(swarmfield::ErrorCode::InvalidArgument,
                              "buffer too small for the canonical text");
    std::memcpy(buf, text.data(), text.size() + 1);
  });
}

sf_status sf_mission_run(const sf_config* cfg, sf_mission** out)
{
  if (!cfg || !out)
    return null_argument("cfg and out");
  *out = nullptr;
  const sf_status st = guarded([&] { *out = new sf_mission{swarmfield::run_mission(cfg->cfg)}; });
  if (st != SF_OK)
    return st;
  if ((*out)->log.outcome == swarmfield::Outcome::Incomplete) {
    last_error = (*out)->log.error;
    return SF_ERR_NUMERIC;
  }
  return SF_OK;
}

sf_outcome sf_mission_outcome(const sf_mission* m)
{
  if (!m)
    return SF_OUTCOME_INCOMPLETE;
  switch (m->log.outcome) {
  case swarmfield::Outcome::Success:
    return SF_OUTCOME_SUCCESS;
  case swarmfield::Outcome::Cap:
    return SF_OUTCOME_CAP;
  default:
    return SF_OUTCOME_INCOMPLETE;
  }
}

sf_status sf_mission_summary_get(const sf_mission* m, sf_mission_summary* out)
{
  if (!m || !out)
    return null_argument("mission and out");
  const auto& log = m->log;
  *out = {};
  out->outer_periods = log.outer_periods();
  out->dataset_size = log.data.size();
  if (!log.outer.empty()) {
    out->final_sup_uncertainty = log.outer.back().sup_uncertainty;
    out->initial_prediction_error = log.outer.front().prediction_error;
    out->final_prediction_error = log.outer.back().prediction_error;
  }
  return SF_OK;
}

sf_status sf_mission_export(const sf_mission* m, const char* dir)
{
  if (!m || !dir)
    return null_argument("mission and dir");
  return guarded([&] { swarmfield::export_mission(m->log, dir); });
}

void sf_mission_free(sf_mission* m)
{
  delete m;
}

sf_status sf_plan_files(const sf_config* cfg, const char* p0_path, const char* pf_path,
                        const char* out_dir, double* final_cost)
{
  if (!cfg || !p0_path || !pf_path || !out_dir)
    return null_argument("cfg, p0_path, pf_path and out_dir");
  return guarded([&] {
    using namespace swarmfield;
    const ScalarField p0 = load_scalar_field(p0_path);
    const ScalarField pf = load_scalar_field(pf_path);
    const CostFunctional cost = cfg->cfg.cost(pf);
    const ReferenceTrajectory ref = grg_solve(p0, cost, cfg->cfg.planner(0.0));
    const std::string hash = canonical_hash(cfg->cfg);
    export_trajectory(ref.p_r, (std::filesystem::path(out_dir) / "p_r").string(), hash);
    write_text((std::filesystem::path(out_dir) / "coefficients.json").string(),
               coefficients_json(ref, cost));
    if (final_cost)
      *final_cost = ref.cost;
  });
}

sf_status sf_track(const sf_config* cfg, double eps_mag, const char* eps_mode, double horizon,
                   const char* out_dir, double* final_ratio)
{
  if (!cfg || !eps_mode || !out_dir)
    return null_argument("cfg, eps_mode and out_dir");
  return guarded([&] {
    using namespace swarmfield;
    if (!(horizon > 0.0))
      throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
    const Grid grid = cfg->cfg.grid();
    const double b = grid.b(), c = grid.c();
    const ScalarField p0 = ScalarField::sample(grid, [&](Vec2 x) {
      return (1.0 + 0.5 * std::cos(std::numbers::pi * x.x / b) *
                        std::cos(std::numbers::pi * x.y / c)) / (b * c);
    });
    FieldTrajectory p_r;
    p_r.times = {0.0};
    p_r.fields = {uniform_density(grid)};
    const PiecewiseVelocity v_r = PiecewiseVelocity::constant(VectorField(grid), 0.0, horizon);
    ControllerConfig ctrl = cfg->cfg.controller();
    ctrl.v_max.reset();
    PdeRunConfig run;
    run.cfl_target = cfg->cfg.cfl;
    run.dt_max = cfg->cfg.pde_dt_max;
    run.t_start = 0.0;
    run.t_end = horizon;
    run.store_every = 1 << 30;
    const auto res = run_density_loop(p0, p_r, v_r, ctrl, run,
                                      multiplicative_injector(grid, eps_mag, eps_mode));
    std::string csv = "t,phi_norm,lyapunov\n";
    for (std::size_t k = 0; k < res.times.size(); ++k)
      csv += format_double(res.times[k]) + "," + format_double(res.phi_norm[k]) + "," +
             format_double(res.lyapunov[k]) + "\n";
    std::filesystem::create_directories(out_dir);
    write_text((std::filesystem::path(out_dir) / "track.csv").string(), csv);
    if (final_ratio)
      *final_ratio = res.phi_norm.back() / res.phi_norm.front();
  });
}

sf_status sf_export_plots(const char* mission_json_path, const char* out_dir)
{
  if (!mission_json_path || !out_dir)
    return null_argument("mission_json_path and out_dir");
  return guarded([&] { swarmfield::export_plots(mission_json_path, out_dir); });
}

} // extern "C"
