#pragma once

#include "swarmfield/grid.hpp"
#include "swarmfield/pde.hpp"

#include <string>
#include <vector>

namespace swarmfield {

//! Velocity parameterized as sum_ij sin(i pi x/b) sin(j pi y/c) a_ijl, held
//! constant on each of N equal intervals of [t0, t0 + T].
class FourierVelocity
{
public:
  FourierVelocity(int I, int J, int N, double t0, double T);

  int I() const noexcept { return I_; }
  int J() const noexcept { return J_; }
  int N() const noexcept { return N_; }
  double t0() const noexcept { return t0_; }
  double T() const noexcept { return T_; }
  double break_time(int l) const noexcept { return t0_ + T_ * l / N_; }
  //! Interval index of time t, clamped to [0, N-1].
  int interval(double t) const noexcept;

  //! Modes are 1-based (1 <= i <= I), intervals 0-based.
  Vec2& a(int i, int j, int l) { return coeffs_[flat(i, j, l)]; }
  Vec2 a(int i, int j, int l) const { return coeffs_[flat(i, j, l)]; }

  std::vector<Vec2>& coefficients() noexcept { return coeffs_; }
  const std::vector<Vec2>& coefficients() const noexcept { return coeffs_; }

  bool all_finite() const noexcept;

private:
  std::size_t flat(int i, int j, int l) const noexcept
  {
    return (static_cast<std::size_t>(l) * I_ + (i - 1)) * J_ + (j - 1);
  }

  int I_, J_, N_;
  double t0_, T_;
  std::vector<Vec2> coeffs_;
};

VectorField eval_velocity(const FourierVelocity& fv, double t, const Grid& grid);

//! One field per interval, with breaks at the interval boundaries.
PiecewiseVelocity to_piecewise(const FourierVelocity& fv, const Grid& grid);

struct CostFunctional
{
  double w_f = 10.0;
  double w_p = 1.0;
  double w_v = 0.1;
  ScalarField p_f;
  //! Densities are floored at this value inside the logarithms.
  double kl_floor;

  CostFunctional(ScalarField target, double floor = -1.0);
};

//! Pointwise (p - q) log(p / q) with both arguments floored.
double sym_kl_point(double p, double q, double floor) noexcept;
//! d/dp of sym_kl_point; zero where p is below the floor.
double sym_kl_dp(double p, double q, double floor) noexcept;

//! Integral over the domain of the floored symmetric KL divergence.
double symmetric_kl(const ScalarField& p, const ScalarField& q, double floor);

//! J for a trajectory that holds every solver step of a transport solve
//! under `fv`; the running cost uses the rectangle rule over those steps.
double evaluate_cost(const DensityTrajectory& p_traj, const FourierVelocity& fv,
                     const CostFunctional& cost);

//! Gradient of J with respect to every a_ijl, stored in a FourierVelocity of
//! the same shape. lambda_traj must be the co-state on the times of p_traj.
FourierVelocity reduced_gradient(const DensityTrajectory& p_traj,
                                 const FieldTrajectory& lambda_traj,
                                 const FourierVelocity& fv, const CostFunctional& cost);

struct PlannerConfig
{
  int I = 8;
  int J = 8;
  int N = 12;
  double t0 = 0.0;
  double T = 7.0;
  int max_iters = 100;
  double rel_tol = 1e-5;
  double grad_tol = 1e-6;
  //! Largest coefficient change per line-search trial (velocity units).
  double max_step = 1.0;
  int max_halvings = 20;
  CostateBoundary costate_boundary = CostateBoundary::Natural;
  double dt_max = 0.05;
  double cfl = 0.5;
};

struct PlannerIteration
{
  double cost = 0.0;
  double grad_max = 0.0;
  double residual = 0.0;
  double step = 0.0;
};

struct ReferenceTrajectory
{
  DensityTrajectory p_r;
  PiecewiseVelocity v_r;
  FourierVelocity fv;
  double cost = 0.0;
  std::vector<PlannerIteration> history;
  bool converged = false;
  bool line_search_stalled = false;
};

//! Forward transport solve under fv from p0, keeping every step.
DensityTrajectory plan_forward(const ScalarField& p0, const FourierVelocity& fv,
                               const PlannerConfig& cfg);

//! Co-state for the trajectory, with terminal value -dphi/dp.
FieldTrajectory plan_costate(const DensityTrajectory& p_traj, const FourierVelocity& fv,
                             const CostFunctional& cost, CostateBoundary boundary);

ReferenceTrajectory grg_solve(const ScalarField& p0, const CostFunctional& cost,
                              const PlannerConfig& cfg);

//! JSON with I, J, N, horizon, coefficients, weights and the iteration history.
std::string coefficients_json(const ReferenceTrajectory& ref, const CostFunctional& cost);

//! Rebuilds the coefficient set from coefficients_json output.
FourierVelocity coefficients_from_json(const std::string& text);

} // namespace swarmfield
