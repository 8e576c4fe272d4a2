#pragma once

#include "swarmfield/grid.hpp"

#include <functional>
#include <string>
#include <vector>

namespace swarmfield {

struct PdeRunConfig
{
  //! Largest step the solver may take (s).
  double dt_max = 0.05;
  //! Fraction of the explicit stability limit actually used.
  double cfl_target = 0.5;
  double t_start = 0.0;
  double t_end = 1.0;
  //! Take exactly-uniform steps no longer than dt_max and fail with
  //! CflViolation if that is above the stability limit, instead of refining.
  bool fixed_dt = false;
  //! Keep every k-th step (the initial and final states are always kept).
  int store_every = 1;
};

//! Time-indexed fields: p(., t) and p_r(., t) trajectories, co-states,
//! diffusion-oracle solutions.
struct FieldTrajectory
{
  std::vector<double> times;
  std::vector<ScalarField> fields;

  std::size_t size() const noexcept { return times.size(); }
  const ScalarField& back() const { return fields.back(); }
  //! Linear interpolation in time, clamped to the stored range.
  ScalarField at(double t) const;
};

using DensityTrajectory = FieldTrajectory;

//! Velocity that is constant on each of a sequence of time intervals.
struct PiecewiseVelocity
{
  std::vector<double> breaks;       //!< size N + 1, increasing
  std::vector<VectorField> fields;  //!< size N

  static PiecewiseVelocity constant(VectorField v, double t0, double t1);

  std::size_t interval(double t) const noexcept;
  const VectorField& at(double t) const { return fields[interval(t)]; }
};

//! Velocity re-evaluated from the current density on every step.
using FeedbackVelocity = std::function<VectorField(double t, const ScalarField& p)>;
using StepObserver = std::function<void(double t, const ScalarField& p)>;

//! Largest stable explicit step for upwind advection by `v` plus diffusion
//! with coefficient up to `diffusivity_max`, scaled by `cfl_target`.
double stable_dt(const VectorField& v, double diffusivity_max, double cfl_target);

//! Conservative time derivative -div(v p) + lap(sigma p) with upwind
//! advective fluxes, face velocities averaged from cell centers, and zero
//! total flux through the walls.
ScalarField fokker_planck_rate(const ScalarField& p, const VectorField& v,
                               const Coefficient& sigma);

DensityTrajectory solve_transport(const ScalarField& p0, const PiecewiseVelocity& v,
                                  const PdeRunConfig& cfg);

DensityTrajectory solve_fokker_planck(const ScalarField& p0, const PiecewiseVelocity& v,
                                      const Coefficient& sigma, const PdeRunConfig& cfg);

DensityTrajectory solve_fokker_planck(const ScalarField& p0, const FeedbackVelocity& v,
                                      const Coefficient& sigma, const PdeRunConfig& cfg,
                                      const StepObserver& observer = {});

enum class CostateBoundary
{
  //! lambda pinned to zero in the boundary cells after every step.
  Dirichlet,
  //! No pinning; the exact adjoint of the discrete transport scheme.
  Natural,
};

//! Integrates d(lambda)/dt = dL/dp - grad(lambda) . v backward from the final
//! time of `p_traj` (which must hold every solver step) to its first time.
//! The advective term is the transpose of the upwind transport operator, so
//! with CostateBoundary::Natural the result is the discrete adjoint.
FieldTrajectory solve_costate(const ScalarField& lambda_f, const PiecewiseVelocity& v,
                              const DensityTrajectory& p_traj,
                              const std::function<ScalarField(const ScalarField&)>& dL_dp,
                              CostateBoundary boundary = CostateBoundary::Dirichlet);

//! d(phi)/dt = div(alpha grad phi) with zero-flux walls.
FieldTrajectory solve_diffusion(const ScalarField& phi0, const Coefficient& alpha,
                                const PdeRunConfig& cfg);

//! Writes field_NNNNN.csv per stored time plus manifest.json.
void export_trajectory(const FieldTrajectory& traj, const std::string& dir,
                       const std::string& config_hash);
FieldTrajectory import_trajectory(const std::string& dir);

} // namespace swarmfield
