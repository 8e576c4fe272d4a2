#include "swarmfield/planner.hpp"

#include "swarmfield/error.hpp"
#include "swarmfield/log.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace swarmfield {

FourierVelocity::FourierVelocity(int I, int J, int N, double t0, double T)
  : I_(I), J_(J), N_(N), t0_(t0), T_(T)
{
  if (I < 1 || J < 1 || N < 1)
    throw Error(ErrorCode::InvalidArgument, "mode and interval counts must be >= 1");
  if (!(T > 0.0))
    throw Error(ErrorCode::InvalidArgument, "planning horizon must be positive");
  coeffs_.assign(static_cast<std::size_t>(I) * J * N, Vec2{});
}

int FourierVelocity::interval(double t) const noexcept
{
  const int l = static_cast<int>(std::floor((t - t0_) / T_ * N_));
  return std::clamp(l, 0, N_ - 1);
}

bool FourierVelocity::all_finite() const noexcept
{
  return std::all_of(coeffs_.begin(), coeffs_.end(), [](Vec2 a) {
    return std::isfinite(a.x) && std::isfinite(a.y);
  });
}

namespace {

// The basis is a tensor product, so both evaluation and projection factor
// into one pass per axis.
struct SineTables
{
  std::vector<std::vector<double>> sx;  // [i-1][cell column]
  std::vector<std::vector<double>> sy;  // [j-1][cell row]

  SineTables(const Grid& g, int I, int J) : sx(I), sy(J)
  {
    for (int i = 1; i <= I; ++i) {
      sx[i - 1].resize(g.nx());
      for (int c = 0; c < g.nx(); ++c)
        sx[i - 1][c] = std::sin(i * std::numbers::pi * g.xc(c) / g.b());
    }
    for (int j = 1; j <= J; ++j) {
      sy[j - 1].resize(g.ny());
      for (int r = 0; r < g.ny(); ++r)
        sy[j - 1][r] = std::sin(j * std::numbers::pi * g.yc(r) / g.c());
    }
  }
};

VectorField eval_interval(const FourierVelocity& fv, int l, const Grid& g,
                          const SineTables& tab)
{
  VectorField out(g);
  std::vector<double> row_x(g.nx()), row_y(g.nx());
  for (int j = 1; j <= fv.J(); ++j) {
    std::fill(row_x.begin(), row_x.end(), 0.0);
    std::fill(row_y.begin(), row_y.end(), 0.0);
    for (int i = 1; i <= fv.I(); ++i) {
      const Vec2 a = fv.a(i, j, l);
      if (a.x == 0.0 && a.y == 0.0)
        continue;
      const auto& s = tab.sx[i - 1];
      for (int c = 0; c < g.nx(); ++c) {
        row_x[c] += a.x * s[c];
        row_y[c] += a.y * s[c];
      }
    }
    const auto& s = tab.sy[j - 1];
    for (int r = 0; r < g.ny(); ++r)
      for (int c = 0; c < g.nx(); ++c) {
        out.x(c, r) += row_x[c] * s[r];
        out.y(c, r) += row_y[c] * s[r];
      }
  }
  return out;
}

// <f, psi_ij> with midpoint quadrature, for every mode pair.
std::vector<double> project(const ScalarField& f, const SineTables& tab)
{
  const Grid& g = f.grid();
  const int I = static_cast<int>(tab.sx.size());
  const int J = static_cast<int>(tab.sy.size());
  std::vector<double> rows(static_cast<std::size_t>(I) * g.ny(), 0.0);
  for (int i = 0; i < I; ++i)
    for (int r = 0; r < g.ny(); ++r) {
      double acc = 0.0;
      for (int c = 0; c < g.nx(); ++c)
        acc += f(c, r) * tab.sx[i][c];
      rows[static_cast<std::size_t>(i) * g.ny() + r] = acc;
    }
  std::vector<double> out(static_cast<std::size_t>(I) * J, 0.0);
  for (int i = 0; i < I; ++i)
    for (int j = 0; j < J; ++j) {
      double acc = 0.0;
      for (int r = 0; r < g.ny(); ++r)
        acc += rows[static_cast<std::size_t>(i) * g.ny() + r] * tab.sy[j][r];
      out[static_cast<std::size_t>(i) * J + j] = acc * g.cell_area();
    }
  return out;
}

double kinetic(const VectorField& v)
{
  double acc = 0.0;
  for (std::size_t k = 0; k < v.x.size(); ++k)
    acc += v.x[k] * v.x[k] + v.y[k] * v.y[k];
  return acc * v.grid().cell_area();
}

} // namespace

VectorField eval_velocity(const FourierVelocity& fv, double t, const Grid& grid)
{
  return eval_interval(fv, fv.interval(t), grid, SineTables(grid, fv.I(), fv.J()));
}

PiecewiseVelocity to_piecewise(const FourierVelocity& fv, const Grid& grid)
{
  const SineTables tab(grid, fv.I(), fv.J());
  PiecewiseVelocity out;
  for (int l = 0; l <= fv.N(); ++l)
    out.breaks.push_back(fv.break_time(l));
  for (int l = 0; l < fv.N(); ++l)
    out.fields.push_back(eval_interval(fv, l, grid, tab));
  return out;
}

CostFunctional::CostFunctional(ScalarField target, double floor)
  : p_f(std::move(target)),
    kl_floor(floor > 0.0 ? floor : 1e-8 / (p_f.grid().b() * p_f.grid().c()))
{
}

double sym_kl_point(double p, double q, double floor) noexcept
{
  const double pf = std::max(p, floor), qf = std::max(q, floor);
  return (pf - qf) * std::log(pf / qf);
}

double sym_kl_dp(double p, double q, double floor) noexcept
{
  if (p <= floor)
    return 0.0;
  const double qf = std::max(q, floor);
  return std::log(p / qf) + 1.0 - qf / p;
}

double symmetric_kl(const ScalarField& p, const ScalarField& q, double floor)
{
  if (!(p.grid() == q.grid()))
    throw Error(ErrorCode::ShapeMismatch, "densities live on different grids");
  double acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k)
    acc += sym_kl_point(p[k], q[k], floor);
  return acc * p.grid().cell_area();
}

namespace {

void check_cost(const CostFunctional& cost)
{
  if (cost.w_f < 0.0 || cost.w_p < 0.0 || cost.w_v < 0.0 ||
      cost.w_f + cost.w_p + cost.w_v == 0.0)
    throw Error(ErrorCode::InvalidArgument, "cost weights must be >= 0 and not all zero");
  if (!(cost.kl_floor > 0.0))
    throw Error(ErrorCode::InvalidArgument, "kl_floor must be positive");
}

} // namespace

double evaluate_cost(const DensityTrajectory& p_traj, const FourierVelocity& fv,
                     const CostFunctional& cost)
{
  check_cost(cost);
  if (p_traj.size() == 0)
    throw Error(ErrorCode::ShapeMismatch, "empty trajectory");
  const Grid& g = p_traj.fields.front().grid();
  const PiecewiseVelocity v = to_piecewise(fv, g);
  std::vector<double> kin(v.fields.size());
  for (std::size_t l = 0; l < kin.size(); ++l)
    kin[l] = kinetic(v.fields[l]);

  double J = cost.w_f * symmetric_kl(p_traj.back(), cost.p_f, cost.kl_floor);
  for (std::size_t n = 0; n + 1 < p_traj.size(); ++n) {
    const double dt = p_traj.times[n + 1] - p_traj.times[n];
    const int l = fv.interval(0.5 * (p_traj.times[n] + p_traj.times[n + 1]));
    double run = cost.w_v * kin[l];
    if (cost.w_p != 0.0)
      run += cost.w_p * symmetric_kl(p_traj.fields[n], cost.p_f, cost.kl_floor);
    J += dt * run;
  }
  return J;
}

FourierVelocity reduced_gradient(const DensityTrajectory& p_traj,
                                 const FieldTrajectory& lambda_traj,
                                 const FourierVelocity& fv, const CostFunctional& cost)
{
  check_cost(cost);
  if (p_traj.size() == 0 || p_traj.times != lambda_traj.times ||
      lambda_traj.fields.size() != p_traj.size())
    throw Error(ErrorCode::ShapeMismatch, "state and co-state trajectories disagree");
  const Grid& g = p_traj.fields.front().grid();
  if (!(lambda_traj.fields.front().grid() == g) || !(cost.p_f.grid() == g))
    throw Error(ErrorCode::ShapeMismatch, "state and co-state grids differ");

  const SineTables tab(g, fv.I(), fv.J());
  std::vector<VectorField> vel;
  for (int l = 0; l < fv.N(); ++l)
    vel.push_back(eval_interval(fv, l, g, tab));

  const int nx = g.nx(), ny = g.ny();
  const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
  std::vector<VectorField> acc(fv.N(), VectorField(g));
  std::vector<double> span(fv.N(), 0.0);
  VectorField s(g);

  // Sensitivity of lambda^T A(v) p to the cell velocities: each face velocity
  // is the mean of its two cells, and the upwind flux is linear in it.
  for (std::size_t n = 0; n + 1 < p_traj.size(); ++n) {
    const double dt = p_traj.times[n + 1] - p_traj.times[n];
    const int l = fv.interval(0.5 * (p_traj.times[n] + p_traj.times[n + 1]));
    const VectorField& v = vel[l];
    const ScalarField& p = p_traj.fields[n];
    const ScalarField& lam = lambda_traj.fields[n + 1];
    std::fill(s.x.values().begin(), s.x.values().end(), 0.0);
    std::fill(s.y.values().begin(), s.y.values().end(), 0.0);
    for (int j = 0; j < ny; ++j)
      for (int i = 1; i < nx; ++i) {
        const double u = 0.5 * (v.x(i - 1, j) + v.x(i, j));
        const double dF = u > 0.0 ? p(i - 1, j) : u < 0.0 ? p(i, j) : 0.5 * (p(i - 1, j) + p(i, j));
        const double val = 0.5 * dF * (lam(i, j) - lam(i - 1, j)) * ihx;
        s.x(i - 1, j) += val;
        s.x(i, j) += val;
      }
    for (int j = 1; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const double u = 0.5 * (v.y(i, j - 1) + v.y(i, j));
        const double dF = u > 0.0 ? p(i, j - 1) : u < 0.0 ? p(i, j) : 0.5 * (p(i, j - 1) + p(i, j));
        const double val = 0.5 * dF * (lam(i, j) - lam(i, j - 1)) * ihy;
        s.y(i, j - 1) += val;
        s.y(i, j) += val;
      }
    for (std::size_t k = 0; k < g.size(); ++k) {
      acc[l].x[k] -= dt * s.x[k];
      acc[l].y[k] -= dt * s.y[k];
    }
    span[l] += dt;
  }

  FourierVelocity grad(fv.I(), fv.J(), fv.N(), fv.t0(), fv.T());
  for (int l = 0; l < fv.N(); ++l) {
    for (std::size_t k = 0; k < g.size(); ++k) {
      acc[l].x[k] += 2.0 * cost.w_v * span[l] * vel[l].x[k];
      acc[l].y[k] += 2.0 * cost.w_v * span[l] * vel[l].y[k];
    }
    const auto gx = project(acc[l].x, tab);
    const auto gy = project(acc[l].y, tab);
    for (int i = 1; i <= fv.I(); ++i)
      for (int j = 1; j <= fv.J(); ++j) {
        const auto k = static_cast<std::size_t>(i - 1) * fv.J() + (j - 1);
        grad.a(i, j, l) = {gx[k], gy[k]};
      }
  }
  return grad;
}

DensityTrajectory plan_forward(const ScalarField& p0, const FourierVelocity& fv,
                               const PlannerConfig& cfg)
{
  PdeRunConfig run;
  run.dt_max = cfg.dt_max;
  run.cfl_target = cfg.cfl;
  run.t_start = fv.t0();
  run.t_end = fv.t0() + fv.T();
  return solve_transport(p0, to_piecewise(fv, p0.grid()), run);
}

FieldTrajectory plan_costate(const DensityTrajectory& p_traj, const FourierVelocity& fv,
                             const CostFunctional& cost, CostateBoundary boundary)
{
  const ScalarField& pT = p_traj.back();
  ScalarField lambda_f(pT.grid());
  for (std::size_t k = 0; k < pT.size(); ++k)
    lambda_f[k] = -cost.w_f * sym_kl_dp(pT[k], cost.p_f[k], cost.kl_floor);
  auto dL_dp = [&cost](const ScalarField& p) {
    ScalarField out(p.grid());
    if (cost.w_p != 0.0)
      for (std::size_t k = 0; k < p.size(); ++k)
        out[k] = cost.w_p * sym_kl_dp(p[k], cost.p_f[k], cost.kl_floor);
    return out;
  };
  return solve_costate(lambda_f, to_piecewise(fv, pT.grid()), p_traj, dL_dp, boundary);
}

namespace {

double max_abs(const FourierVelocity& g)
{
  double m = 0.0;
  for (Vec2 a : g.coefficients())
    m = std::max({m, std::abs(a.x), std::abs(a.y)});
  return m;
}

double rms(const FourierVelocity& g)
{
  double acc = 0.0;
  for (Vec2 a : g.coefficients())
    acc += a.x * a.x + a.y * a.y;
  return std::sqrt(acc / (2.0 * g.coefficients().size()));
}

} // namespace

ReferenceTrajectory grg_solve(const ScalarField& p0, const CostFunctional& cost,
                              const PlannerConfig& cfg)
{
  check_cost(cost);
  if (!is_density(p0, 1e-6))
    throw Error(ErrorCode::InvalidArgument, "initial density is not a density");
  if (!(cost.p_f.grid() == p0.grid()))
    throw Error(ErrorCode::ShapeMismatch, "p0 and p_f grids differ");
  if (cfg.max_iters < 1 || !(cfg.max_step > 0.0))
    throw Error(ErrorCode::InvalidArgument, "planner iteration settings out of range");

  FourierVelocity fv(cfg.I, cfg.J, cfg.N, cfg.t0, cfg.T);
  DensityTrajectory traj = plan_forward(p0, fv, cfg);
  double J = evaluate_cost(traj, fv, cost);

  ReferenceTrajectory out{traj, {}, fv, J, {}, false, false};
  double step = cfg.max_step;

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    const FieldTrajectory lam = plan_costate(traj, fv, cost, cfg.costate_boundary);
    const FourierVelocity grad = reduced_gradient(traj, lam, fv, cost);
    const double gmax = max_abs(grad);
    PlannerIteration rec{J, gmax, rms(grad), 0.0};
    if (!(gmax >= cfg.grad_tol)) {
      out.history.push_back(rec);
      out.converged = true;
      break;
    }

    bool accepted = false;
    FourierVelocity trial = fv;
    DensityTrajectory trial_traj;
    double trial_J = J;
    for (int h = 0; h <= cfg.max_halvings; ++h, step *= 0.5) {
      for (std::size_t k = 0; k < trial.coefficients().size(); ++k) {
        trial.coefficients()[k].x = fv.coefficients()[k].x - step * grad.coefficients()[k].x / gmax;
        trial.coefficients()[k].y = fv.coefficients()[k].y - step * grad.coefficients()[k].y / gmax;
      }
      trial_traj = plan_forward(p0, trial, cfg);
      trial_J = evaluate_cost(trial_traj, trial, cost);
      if (trial_J < J) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.history.push_back(rec);
      out.line_search_stalled = true;
      log().warn("planner line search stalled at iteration {} (J = {})", iter, J);
      break;
    }
    rec.step = step;
    out.history.push_back(rec);
    log().debug("planner iter {} J {} -> {} |g| {} step {}", iter, J, trial_J, gmax, step);

    const double rel = (J - trial_J) / std::max(std::abs(J), 1e-300);
    fv = std::move(trial);
    traj = std::move(trial_traj);
    J = trial_J;
    step = std::min(2.0 * step, cfg.max_step);
    if (rel < cfg.rel_tol) {
      out.converged = true;
      break;
    }
  }

  if (out.history.empty() || out.history.back().cost != J)
    out.history.push_back({J, 0.0, 0.0, 0.0});
  out.p_r = std::move(traj);
  out.v_r = to_piecewise(fv, p0.grid());
  out.fv = std::move(fv);
  out.cost = J;
  return out;
}

std::string coefficients_json(const ReferenceTrajectory& ref, const CostFunctional& cost)
{
  const FourierVelocity& fv = ref.fv;
  nlohmann::json doc;
  doc["I"] = fv.I();
  doc["J"] = fv.J();
  doc["N"] = fv.N();
  doc["t0"] = fv.t0();
  doc["T"] = fv.T();
  doc["layout"] = "l,i,j";
  nlohmann::json a = nlohmann::json::array();
  for (Vec2 c : fv.coefficients())
    a.push_back({c.x, c.y});
  doc["a"] = a;
  doc["weights"] = {{"w_f", cost.w_f}, {"w_p", cost.w_p}, {"w_v", cost.w_v},
                    {"kl_floor", cost.kl_floor}};
  doc["cost"] = ref.cost;
  doc["converged"] = ref.converged;
  doc["line_search_stalled"] = ref.line_search_stalled;
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& h : ref.history)
    hist.push_back({{"cost", h.cost}, {"grad_max", h.grad_max},
                    {"residual", h.residual}, {"step", h.step}});
  doc["history"] = hist;
  return doc.dump(2);
}

FourierVelocity coefficients_from_json(const std::string& text)
{
  try {
    const auto doc = nlohmann::json::parse(text);
    FourierVelocity fv(doc.at("I").get<int>(), doc.at("J").get<int>(),
                       doc.at("N").get<int>(), doc.at("t0").get<double>(),
                       doc.at("T").get<double>());
    const auto& a = doc.at("a");
    if (a.size() != fv.coefficients().size())
      throw Error(ErrorCode::ShapeMismatch, "coefficient count does not match I*J*N");
    for (std::size_t k = 0; k < a.size(); ++k)
      fv.coefficients()[k] = {a[k].at(0).get<double>(), a[k].at(1).get<double>()};
    return fv;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("coefficient file: ") + e.what());
  }
}

} // namespace swarmfield
