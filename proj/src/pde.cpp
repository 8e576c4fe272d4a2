#include "swarmfield/pde.hpp"

#include "swarmfield/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

namespace swarmfield {

ScalarField FieldTrajectory::at(double t) const
{
  if (times.empty())
    throw Error(ErrorCode::InvalidArgument, "empty trajectory");
  if (t <= times.front())
    return fields.front();
  if (t >= times.back())
    return fields.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - times.begin());
  const std::size_t lo = hi - 1;
  const double w = (t - times[lo]) / (times[hi] - times[lo]);
  if (w == 0.0)
    return fields[lo];
  ScalarField out = fields[lo];
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = (1.0 - w) * fields[lo][k] + w * fields[hi][k];
  return out;
}

PiecewiseVelocity PiecewiseVelocity::constant(VectorField v, double t0, double t1)
{
  PiecewiseVelocity out;
  out.breaks = {t0, t1};
  out.fields.push_back(std::move(v));
  return out;
}

std::size_t PiecewiseVelocity::interval(double t) const noexcept
{
  if (fields.size() <= 1 || t <= breaks.front())
    return 0;
  const auto it = std::upper_bound(breaks.begin(), breaks.end(), t);
  const auto idx = static_cast<std::size_t>(it - breaks.begin()) - 1;
  return std::min(idx, fields.size() - 1);
}

double stable_dt(const VectorField& v, double diffusivity_max, double cfl_target)
{
  const Grid& g = v.grid();
  double ux = 0.0, uy = 0.0;
  for (std::size_t k = 0; k < v.x.size(); ++k) {
    ux = std::max(ux, std::abs(v.x[k]));
    uy = std::max(uy, std::abs(v.y[k]));
  }
  const double rate = ux / g.hx() + uy / g.hy() +
                      2.0 * std::max(0.0, diffusivity_max) *
                          (1.0 / (g.hx() * g.hx()) + 1.0 / (g.hy() * g.hy()));
  if (rate == 0.0)
    return std::numeric_limits<double>::infinity();
  return cfl_target / rate;
}

ScalarField fokker_planck_rate(const ScalarField& p, const VectorField& v,
                               const Coefficient& sigma)
{
  const Grid& g = p.grid();
  if (!(v.grid() == g))
    throw Error(ErrorCode::ShapeMismatch, "velocity and density grids differ");
  const int nx = g.nx(), ny = g.ny();
  const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();

  const bool diffusive = coefficient_max(sigma) > 0.0;
  ScalarField sp(g);
  if (diffusive)
    for (std::size_t k = 0; k < p.size(); ++k)
      sp[k] = coefficient_at(sigma, k) * p[k];

  ScalarField rate(g);
  for (int j = 0; j < ny; ++j) {
    for (int i = 1; i < nx; ++i) {
      const double u = 0.5 * (v.x(i - 1, j) + v.x(i, j));
      double flux = u > 0.0 ? u * p(i - 1, j) : u * p(i, j);
      if (diffusive)
        flux -= (sp(i, j) - sp(i - 1, j)) * ihx;
      rate(i - 1, j) -= flux * ihx;
      rate(i, j) += flux * ihx;
    }
  }
  for (int j = 1; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double u = 0.5 * (v.y(i, j - 1) + v.y(i, j));
      double flux = u > 0.0 ? u * p(i, j - 1) : u * p(i, j);
      if (diffusive)
        flux -= (sp(i, j) - sp(i, j - 1)) * ihy;
      rate(i, j - 1) -= flux * ihy;
      rate(i, j) += flux * ihy;
    }
  }
  return rate;
}

namespace {

constexpr double kClipTolerance = 1e-12;

ScalarField clip_round_off(ScalarField p)
{
  for (double& v : p.values())
    if (v < 0.0 && v >= -kClipTolerance)
      v = 0.0;
  return p;
}

void check_config(const PdeRunConfig& cfg)
{
  if (!(cfg.dt_max > 0.0))
    throw Error(ErrorCode::InvalidArgument, "dt_max must be positive");
  if (!(cfg.cfl_target > 0.0 && cfg.cfl_target <= 0.9))
    throw Error(ErrorCode::InvalidArgument, "cfl_target must lie in (0, 0.9]");
  if (!(cfg.t_end > cfg.t_start))
    throw Error(ErrorCode::InvalidArgument, "horizon must have t_end > t_start");
  if (cfg.store_every < 1)
    throw Error(ErrorCode::InvalidArgument, "store_every must be >= 1");
}

int step_count(double span, double dt)
{
  return std::max(1, static_cast<int>(std::ceil(span / dt - 1e-9)));
}

void cfl_violation(double dt, double bound)
{
  char buf[160];
  std::snprintf(buf, sizeof(buf), "step %.6g s exceeds the stability bound %.6g s",
                dt, bound);
  throw Error(ErrorCode::CflViolation, buf);
}

class Recorder
{
public:
  Recorder(FieldTrajectory& out, int every) : out_(out), every_(every) {}

  void initial(double t, const ScalarField& p)
  {
    out_.times.push_back(t);
    out_.fields.push_back(clip_round_off(p));
  }

  void step(double t, const ScalarField& p, bool last)
  {
    ++count_;
    if (last || count_ % every_ == 0) {
      out_.times.push_back(t);
      out_.fields.push_back(clip_round_off(p));
    }
  }

private:
  FieldTrajectory& out_;
  int every_;
  long count_ = 0;
};

DensityTrajectory integrate_piecewise(const ScalarField& p0, const PiecewiseVelocity& v,
                                      const Coefficient& sigma, const PdeRunConfig& cfg)
{
  check_config(cfg);
  if (v.fields.empty() || v.breaks.size() != v.fields.size() + 1)
    throw Error(ErrorCode::ShapeMismatch, "piecewise velocity is malformed");

  std::vector<double> cuts{cfg.t_start};
  for (double b : v.breaks)
    if (b > cfg.t_start && b < cfg.t_end)
      cuts.push_back(b);
  cuts.push_back(cfg.t_end);

  const double sigma_max = coefficient_max(sigma);
  DensityTrajectory out;
  Recorder rec(out, cfg.store_every);
  rec.initial(cfg.t_start, p0);

  ScalarField p = p0;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double a = cuts[s], b = cuts[s + 1];
    const VectorField& vel = v.at(0.5 * (a + b));
    if (!vel.all_finite())
      throw Error(ErrorCode::NonFiniteVelocity, "velocity field is not finite");
    const double bound = stable_dt(vel, sigma_max, cfg.cfl_target);
    int n = 0;
    if (cfg.fixed_dt) {
      n = step_count(b - a, cfg.dt_max);
      if ((b - a) / n > bound * (1.0 + 1e-12))
        cfl_violation((b - a) / n, bound);
    } else {
      n = step_count(b - a, std::min(cfg.dt_max, bound));
    }
    const double dt = (b - a) / n;
    for (int k = 0; k < n; ++k) {
      const ScalarField rate = fokker_planck_rate(p, vel, sigma);
      for (std::size_t c = 0; c < p.size(); ++c)
        p[c] += dt * rate[c];
      const bool last_in_cut = k + 1 == n;
      const double t = last_in_cut ? b : a + (k + 1) * dt;
      rec.step(t, p, last_in_cut && s + 2 == cuts.size());
    }
  }
  return out;
}

} // namespace

DensityTrajectory solve_transport(const ScalarField& p0, const PiecewiseVelocity& v,
                                  const PdeRunConfig& cfg)
{
  return integrate_piecewise(p0, v, 0.0, cfg);
}

DensityTrajectory solve_fokker_planck(const ScalarField& p0, const PiecewiseVelocity& v,
                                      const Coefficient& sigma, const PdeRunConfig& cfg)
{
  if (coefficient_min(sigma) < 0.0)
    throw Error(ErrorCode::InvalidArgument, "sigma must be non-negative");
  return integrate_piecewise(p0, v, sigma, cfg);
}

DensityTrajectory solve_fokker_planck(const ScalarField& p0, const FeedbackVelocity& v,
                                      const Coefficient& sigma, const PdeRunConfig& cfg,
                                      const StepObserver& observer)
{
  check_config(cfg);
  if (coefficient_min(sigma) < 0.0)
    throw Error(ErrorCode::InvalidArgument, "sigma must be non-negative");
  const double sigma_max = coefficient_max(sigma);
  const double span = cfg.t_end - cfg.t_start;
  const int fixed_steps = cfg.fixed_dt ? step_count(span, cfg.dt_max) : 0;
  const double fixed_dt = cfg.fixed_dt ? span / fixed_steps : 0.0;

  DensityTrajectory out;
  Recorder rec(out, cfg.store_every);
  rec.initial(cfg.t_start, p0);

  ScalarField p = p0;
  double t = cfg.t_start;
  long k = 0;
  while (true) {
    if (cfg.fixed_dt ? k >= fixed_steps : t >= cfg.t_end - 1e-12 * std::max(1.0, span))
      break;
    const VectorField vel = v(t, p);
    if (!(vel.grid() == p.grid()) || !vel.all_finite())
      throw Error(ErrorCode::NonFiniteFeedback, "feedback velocity is not finite");
    const double bound = stable_dt(vel, sigma_max, cfg.cfl_target);
    double dt = 0.0;
    bool last = false;
    if (cfg.fixed_dt) {
      dt = fixed_dt;
      if (dt > bound * (1.0 + 1e-12))
        cfl_violation(dt, bound);
      last = k + 1 == fixed_steps;
    } else {
      dt = std::min(cfg.dt_max, bound);
      if (t + dt >= cfg.t_end - 1e-12 * std::max(1.0, span)) {
        dt = cfg.t_end - t;
        last = true;
      }
    }
    const ScalarField rate = fokker_planck_rate(p, vel, sigma);
    for (std::size_t c = 0; c < p.size(); ++c)
      p[c] += dt * rate[c];
    ++k;
    t = cfg.fixed_dt ? (last ? cfg.t_end : cfg.t_start + k * dt)
                     : (last ? cfg.t_end : t + dt);
    if (observer)
      observer(t, p);
    rec.step(t, p, last);
  }
  return out;
}

namespace {

// Transpose of the upwind transport operator A p = -div(v p) (face velocities
// averaged from cells, closed walls). For smooth fields this approximates
// v . grad(lambda), upwinded against the flow.
ScalarField upwind_transpose(const ScalarField& lam, const VectorField& v)
{
  const Grid& g = lam.grid();
  const int nx = g.nx(), ny = g.ny();
  const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
  ScalarField out(g);
  for (int j = 0; j < ny; ++j) {
    for (int i = 1; i < nx; ++i) {
      const double u = 0.5 * (v.x(i - 1, j) + v.x(i, j));
      const double jump = (lam(i, j) - lam(i - 1, j)) * ihx;
      if (u > 0.0)
        out(i - 1, j) += u * jump;
      else
        out(i, j) += u * jump;
    }
  }
  for (int j = 1; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double u = 0.5 * (v.y(i, j - 1) + v.y(i, j));
      const double jump = (lam(i, j) - lam(i, j - 1)) * ihy;
      if (u > 0.0)
        out(i, j - 1) += u * jump;
      else
        out(i, j) += u * jump;
    }
  }
  return out;
}

void pin_boundary(ScalarField& f)
{
  const Grid& g = f.grid();
  for (int i = 0; i < g.nx(); ++i) {
    f(i, 0) = 0.0;
    f(i, g.ny() - 1) = 0.0;
  }
  for (int j = 0; j < g.ny(); ++j) {
    f(0, j) = 0.0;
    f(g.nx() - 1, j) = 0.0;
  }
}

} // namespace

FieldTrajectory solve_costate(const ScalarField& lambda_f, const PiecewiseVelocity& v,
                              const DensityTrajectory& p_traj,
                              const std::function<ScalarField(const ScalarField&)>& dL_dp,
                              CostateBoundary boundary)
{
  const std::size_t m = p_traj.size();
  if (m == 0 || p_traj.fields.size() != m)
    throw Error(ErrorCode::ShapeMismatch, "state trajectory is empty or malformed");
  if (!(lambda_f.grid() == p_traj.fields.front().grid()))
    throw Error(ErrorCode::ShapeMismatch, "co-state and state grids differ");

  FieldTrajectory out;
  out.times = p_traj.times;
  out.fields.assign(m, ScalarField(lambda_f.grid()));
  ScalarField lam = lambda_f;
  if (boundary == CostateBoundary::Dirichlet)
    pin_boundary(lam);
  out.fields[m - 1] = lam;

  for (std::size_t n = m - 1; n-- > 0;) {
    const double dt = p_traj.times[n + 1] - p_traj.times[n];
    const VectorField& vel = v.at(0.5 * (p_traj.times[n] + p_traj.times[n + 1]));
    const double bound = stable_dt(vel, 0.0, 1.0);
    if (dt > bound * (1.0 + 1e-12))
      cfl_violation(dt, bound);
    const ScalarField adv = upwind_transpose(lam, vel);
    const ScalarField src = dL_dp(p_traj.fields[n]);
    for (std::size_t c = 0; c < lam.size(); ++c)
      lam[c] += dt * (adv[c] - src[c]);
    if (boundary == CostateBoundary::Dirichlet)
      pin_boundary(lam);
    out.fields[n] = lam;
  }
  return out;
}

FieldTrajectory solve_diffusion(const ScalarField& phi0, const Coefficient& alpha,
                                const PdeRunConfig& cfg)
{
  check_config(cfg);
  if (!(coefficient_min(alpha) > 0.0))
    throw Error(ErrorCode::InvalidArgument, "diffusion coefficient must be positive");
  const Grid& g = phi0.grid();
  const ScalarField a = coefficient_field(alpha, g);
  const int nx = g.nx(), ny = g.ny();
  const double ihx2 = 1.0 / (g.hx() * g.hx()), ihy2 = 1.0 / (g.hy() * g.hy());
  const double bound = cfg.cfl_target / (2.0 * a.max() * (ihx2 + ihy2));
  const double span = cfg.t_end - cfg.t_start;

  int n = 0;
  if (cfg.fixed_dt) {
    n = step_count(span, cfg.dt_max);
    if (span / n > bound * (1.0 + 1e-12))
      cfl_violation(span / n, bound);
  } else {
    n = step_count(span, std::min(cfg.dt_max, bound));
  }
  const double dt = span / n;

  FieldTrajectory out;
  Recorder rec(out, cfg.store_every);
  out.times.push_back(cfg.t_start);
  out.fields.push_back(phi0);

  ScalarField phi = phi0;
  ScalarField rate(g);
  for (int k = 0; k < n; ++k) {
    std::fill(rate.values().begin(), rate.values().end(), 0.0);
    for (int j = 0; j < ny; ++j) {
      for (int i = 1; i < nx; ++i) {
        const double af = 0.5 * (a(i - 1, j) + a(i, j));
        const double flux = af * (phi(i, j) - phi(i - 1, j)) * ihx2;
        rate(i - 1, j) += flux;
        rate(i, j) -= flux;
      }
    }
    for (int j = 1; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const double af = 0.5 * (a(i, j - 1) + a(i, j));
        const double flux = af * (phi(i, j) - phi(i, j - 1)) * ihy2;
        rate(i, j - 1) += flux;
        rate(i, j) -= flux;
      }
    }
    for (std::size_t c = 0; c < phi.size(); ++c)
      phi[c] += dt * rate[c];
    const bool last = k + 1 == n;
    const double t = last ? cfg.t_end : cfg.t_start + (k + 1) * dt;
    // Φ is signed, so no clipping: store directly.
    if (last || (k + 1) % cfg.store_every == 0) {
      out.times.push_back(t);
      out.fields.push_back(phi);
    }
  }
  return out;
}

void export_trajectory(const FieldTrajectory& traj, const std::string& dir,
                       const std::string& config_hash)
{
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw Error(ErrorCode::IoError, "cannot create '" + dir + "': " + ec.message());
  nlohmann::json manifest;
  manifest["times"] = traj.times;
  manifest["config_hash"] = config_hash;
  std::vector<std::string> files;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "field_%05zu.csv", k);
    files.emplace_back(name);
    write_text((fs::path(dir) / name).string(), to_csv(traj.fields[k]));
  }
  manifest["files"] = files;
  if (!traj.fields.empty()) {
    const Grid& g = traj.fields.front().grid();
    manifest["grid"] = {{"nx", g.nx()}, {"ny", g.ny()}, {"b", g.b()}, {"c", g.c()}};
  }
  write_text((fs::path(dir) / "manifest.json").string(), manifest.dump(2));
}

FieldTrajectory import_trajectory(const std::string& dir)
{
  namespace fs = std::filesystem;
  FieldTrajectory out;
  try {
    const auto manifest =
        nlohmann::json::parse(read_text((fs::path(dir) / "manifest.json").string()));
    out.times = manifest.at("times").get<std::vector<double>>();
    for (const auto& name : manifest.at("files"))
      out.fields.push_back(
          scalar_from_csv(read_text((fs::path(dir) / name.get<std::string>()).string())));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("trajectory manifest: ") + e.what());
  }
  if (out.times.size() != out.fields.size())
    throw Error(ErrorCode::ShapeMismatch, "manifest times and files disagree");
  return out;
}

} // namespace swarmfield
