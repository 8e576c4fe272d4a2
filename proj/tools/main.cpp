#include <swarmfield.h>

#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <string>

namespace {

int fail(sf_status st)
{
  std::fprintf(stderr, "error (%d): %s\n", static_cast<int>(st), sf_last_error());
  return 1;
}

struct ConfigHandle
{
  sf_config* ptr = nullptr;
  ~ConfigHandle() { sf_config_free(ptr); }
};

sf_status open_config(const std::string& path, std::optional<uint64_t> seed, ConfigHandle& h)
{
  const sf_status st = path.empty() ? sf_config_default(&h.ptr) : sf_config_load(path.c_str(), &h.ptr);
  if (st != SF_OK)
    return st;
  if (seed)
    return sf_config_set_seed(h.ptr, *seed);
  return SF_OK;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Mean-field swarm deployment simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sf_version()));

  std::string config_path;
  std::optional<uint64_t> seed;
  std::string out_dir = "out";

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "Config file (INI); defaults when omitted");
    cmd->add_option("--seed", seed, "Override the config seed");
    cmd->add_option("--out", out_dir, "Output directory");
  };

  auto* run = app.add_subcommand("run", "Run a full mission");
  add_common(run);

  std::string p0_path, pf_path;
  auto* plan = app.add_subcommand("plan", "Solve one reference plan from p0 and p_f files");
  add_common(plan);
  plan->add_option("--p0", p0_path, "Initial density (.csv or .json)")->required();
  plan->add_option("--pf", pf_path, "Target density (.csv or .json)")->required();

  double eps_mag = 0.0;
  std::string eps_mode = "smooth";
  double horizon = 150.0;
  auto* track = app.add_subcommand("track", "Density-level tracking with injected estimation error");
  add_common(track);
  track->add_option("--eps-mag", eps_mag, "Max |eps| of the multiplicative error");
  track->add_option("--eps-mode", eps_mode, "smooth, constant or none")
      ->check(CLI::IsMember({"smooth", "constant", "none"}));
  track->add_option("--horizon", horizon, "Simulated time (s)");

  std::string mission_json;
  auto* plots = app.add_subcommand("export-plots", "Rewrite plot CSVs from a mission.json");
  plots->add_option("mission_json", mission_json, "Path to mission.json")->required();
  plots->add_option("--out", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*plots) {
    const sf_status st = sf_export_plots(mission_json.c_str(), out_dir.c_str());
    return st == SF_OK ? 0 : fail(st);
  }

  ConfigHandle cfg;
  if (const sf_status st = open_config(config_path, seed, cfg); st != SF_OK)
    return fail(st);

  if (*run) {
    sf_mission* m = nullptr;
    const sf_status st = sf_mission_run(cfg.ptr, &m);
    if (m) {
      const sf_status ex = sf_mission_export(m, out_dir.c_str());
      if (ex != SF_OK) {
        sf_mission_free(m);
        return fail(ex);
      }
    }
    if (st != SF_OK) {
      sf_mission_free(m);
      return fail(st);
    }
    sf_mission_summary s;
    sf_mission_summary_get(m, &s);
    const sf_outcome outcome = sf_mission_outcome(m);
    sf_mission_free(m);
    std::printf("%s after %d outer periods: %zu measurements, sup uncertainty %.6g, "
                "prediction error %.6g -> %.6g\n",
                outcome == SF_OUTCOME_SUCCESS ? "success" : "cap reached", s.outer_periods,
                s.dataset_size, s.final_sup_uncertainty, s.initial_prediction_error,
                s.final_prediction_error);
    return outcome == SF_OUTCOME_SUCCESS ? 0 : 2;
  }

  if (*plan) {
    double cost = 0.0;
    const sf_status st = sf_plan_files(cfg.ptr, p0_path.c_str(), pf_path.c_str(),
                                       out_dir.c_str(), &cost);
    if (st != SF_OK)
      return fail(st);
    std::printf("plan written to %s (J = %.6g)\n", out_dir.c_str(), cost);
    return 0;
  }

  double ratio = 0.0;
  const sf_status st = sf_track(cfg.ptr, eps_mag, eps_mode.c_str(), horizon,
                                out_dir.c_str(), &ratio);
  if (st != SF_OK)
    return fail(st);
  std::printf("||Phi(t_end)|| / ||Phi(0)|| = %.6g\n", ratio);
  return 0;
}
