#pragma once

#include "swarmfield/agents.hpp"
#include "swarmfield/controller.hpp"
#include "swarmfield/gp.hpp"
#include "swarmfield/kde.hpp"
#include "swarmfield/planner.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace swarmfield {

// Every value a mission depends on. Defaults are the documented ones; see
// docs/config.md for the file format and bounds.
struct MissionConfig
{
  int schema_version = 1;

  // [mission]
  std::size_t n = 100;
  double dt = 0.875;
  double period = 7.0;
  double gamma = 0.1;
  double eta = 0.02;
  int max_outer = 12;
  std::uint64_t seed = 1;
  std::string truth = "sinc";
  double noise_var = 0.04;
  //! "variance" or "stddev": the statistic compared against gamma and used
  //! to build the target density.
  std::string uncertainty_stat = "variance";
  Rect init_region{0.0, 0.0, 7.0, 7.0};
  //! Agent integration substeps per sampling period, with the commanded
  //! field held fixed across them.
  int agent_substeps = 4;

  // [domain]
  double b = 20.0;
  double c = 20.0;
  int nx = 64;
  int ny = 64;

  // [agents]
  double sigma = 0.05;

  // [kde]
  std::optional<double> kde_bandwidth;
  double kde_floor = 0.01;

  // [gp]
  GpHyper gp;
  std::size_t gp_max_points = 2000;
  bool gp_tune = false;

  // [planner]
  int modes_i = 8;
  int modes_j = 8;
  int intervals = 12;
  double w_f = 10.0;
  double w_p = 1.0;
  double w_v = 0.1;
  std::optional<double> kl_floor;
  int max_iters = 100;
  double rel_tol = 1e-5;
  double grad_tol = 1e-6;
  double max_step = 1.0;
  std::string costate_boundary = "natural";

  // [controller]
  double alpha = 0.5;
  //! 0 disables the clamp.
  double v_max = 5.0;

  // [pde]
  double cfl = 0.5;
  double pde_dt_max = 0.05;

  Grid grid() const { return Grid(b, c, nx, ny); }
  int steps_per_period() const;
  KdeConfig kde() const;
  ControllerConfig controller() const;
  PlannerConfig planner(double t0) const;
  CostFunctional cost(ScalarField p_f) const;

  friend bool operator==(const MissionConfig&, const MissionConfig&) = default;
};

//! Parses and validates INI text; missing keys take their defaults.
MissionConfig parse_config(const std::string& text);
MissionConfig load_config(const std::string& path);

//! Throws ValidationError for the first violated bound.
void validate(const MissionConfig& cfg);

//! Every key, sorted by section then key, values in shortest round-trip form.
std::string canonical_serialize(const MissionConfig& cfg);
std::string canonical_hash(const MissionConfig& cfg);

} // namespace swarmfield
