#pragma once

#include "swarmfield/agents.hpp"
#include "swarmfield/config.hpp"
#include "swarmfield/controller.hpp"
#include "swarmfield/pde.hpp"
#include "swarmfield/planner.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace swarmfield {

struct StepRecord
{
  double t = 0.0;
  std::string positions_digest;
  double v_max = 0.0;
  double v_mean = 0.0;
  //! ||p_hat - p_r|| in L2.
  double tracking_error = 0.0;
  //! 0.5 * integral of (p_hat - p_r)^2.
  double lyapunov = 0.0;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct OuterRecord
{
  int k = 0;
  double t = 0.0;
  std::size_t dataset_size = 0;
  double sup_uncertainty = 0.0;
  double prediction_error = 0.0;
  //! Planner J per iteration for the plan flown after this refit (empty for
  //! the last record).
  std::vector<double> planner_costs;
  bool planner_converged = false;

  friend bool operator==(const OuterRecord&, const OuterRecord&) = default;
};

struct Snapshot
{
  double t = 0.0;
  ScalarField p_hat;
  ScalarField p_r;
  ScalarField gp_mean;
  ScalarField gp_uncertainty;
  VectorField velocity;
};

struct PlanRecord
{
  double t0 = 0.0;
  //! p_r at the sampling instants of the period.
  DensityTrajectory p_r;
  std::string coefficients_json;
};

enum class Outcome
{
  Success,
  Cap,
  Incomplete,
};

struct MissionLog
{
  std::string config_text;
  std::string config_hash;
  std::uint64_t seed = 0;
  Outcome outcome = Outcome::Incomplete;
  std::string error;

  std::vector<OuterRecord> outer;
  std::vector<StepRecord> steps;

  // Bulk artifacts; not part of mission.json.
  std::vector<Snapshot> snapshots;
  std::vector<PlanRecord> plans;
  Dataset data;
  std::string trajectories_csv;

  //! Number of completed outer periods (excluding the initial regression).
  int outer_periods() const noexcept { return outer.empty() ? 0 : int(outer.size()) - 1; }
};

//! Outer loop: regress, plan, track and measure until the uncertainty
//! statistic falls to gamma or max_outer periods have been flown. Errors
//! raised mid-mission are recorded in the log, which is flagged incomplete.
MissionLog run_mission(const MissionConfig& cfg);

//! L2 norm of (truth at cell centers - mean).
double prediction_error(const ScalarField& gp_mean, const GroundTruthField& truth);

//! Maps the true density at time t to the estimate the controller sees.
using ErrorInjector = std::function<ScalarField(const ScalarField& p, double t)>;

struct DensityLoopResult
{
  std::vector<double> times;
  std::vector<double> phi_norm;
  std::vector<double> lyapunov;
  DensityTrajectory p;
};

//! Closed loop at density level: the Fokker-Planck equation driven by the
//! feedback law evaluated on injector(p) (exact law when no injector).
DensityLoopResult run_density_loop(const ScalarField& p0, const FieldTrajectory& p_r,
                                   const PiecewiseVelocity& v_r,
                                   const ControllerConfig& ctrl, const PdeRunConfig& run,
                                   const ErrorInjector& injector = {});

//! Smooth multiplicative error p(1 + eps) with eps = mag * cos(pi x/b) cos(pi y/c)
//! rescaled so that max |eps| over the cell centers equals mag ("smooth"), or
//! eps = mag everywhere ("constant").
ErrorInjector multiplicative_injector(const Grid& grid, double mag, const std::string& mode);

std::string mission_json(const MissionLog& log);
//! Restores the scalar parts of a log (everything mission_json writes).
MissionLog mission_from_json(const std::string& text);

std::string prediction_error_csv(const MissionLog& log);
std::string tracking_error_csv(const MissionLog& log);

//! mission.json, the two plot series, field snapshots, plans, trajectories
//! and measurements.
void export_mission(const MissionLog& log, const std::string& dir);

//! Rewrites the plot series CSVs from an existing mission.json.
void export_plots(const std::string& mission_json_path, const std::string& dir);

} // namespace swarmfield
