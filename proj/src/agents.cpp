#include "swarmfield/agents.hpp"

#include "swarmfield/error.hpp"
#include "swarmfield/rng.hpp"

#include <cmath>

namespace swarmfield {

GroundTruthField sinc_truth()
{
  return {"sinc", [](Vec2 p) {
            const double r = std::hypot(p.x, p.y);
            // sin(2r)/r = 2 - 4r^2/3 + O(r^4)
            if (r < 1e-6)
              return 4.0 - 4.0 * r * r / 3.0;
            return 2.0 + std::sin(2.0 * r) / r;
          }};
}

GroundTruthField bumps_truth()
{
  return {"bumps", [](Vec2 p) {
            auto bump = [&](double cx, double cy, double a, double s) {
              const double dx = p.x - cx, dy = p.y - cy;
              return a * std::exp(-(dx * dx + dy * dy) / (2.0 * s * s));
            };
            return 1.0 + bump(5.0, 15.0, 1.5, 2.5) + bump(14.0, 6.0, 1.0, 3.0) +
                   bump(15.0, 15.0, -0.8, 2.0);
          }};
}

GroundTruthField truth_by_name(const std::string& name)
{
  if (name == "sinc")
    return sinc_truth();
  if (name == "bumps")
    return bumps_truth();
  throw Error(ErrorCode::InvalidArgument, "unknown truth field '" + name + "'");
}

SwarmState init_uniform(const Rect& region, double b, double c, std::size_t n,
                        std::uint64_t seed)
{
  if (n == 0)
    throw Error(ErrorCode::InvalidArgument, "swarm needs at least one agent");
  if (region.x0 < 0.0 || region.y0 < 0.0 || region.x1 > b || region.y1 > c ||
      region.x0 > region.x1 || region.y0 > region.y1)
    throw Error(ErrorCode::RegionOutsideDomain,
                "initial region must be a rectangle inside the domain");

  SwarmState s;
  s.b = b;
  s.c = c;
  s.seed = seed;
  s.positions.resize(n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto eng = rng::engine(seed, rng::Stream::Init, i, 0);
    const double u = unit(eng);
    const double v = unit(eng);
    s.positions[i] = {region.x0 + (region.x1 - region.x0) * u,
                      region.y0 + (region.y1 - region.y0) * v};
  }
  return s;
}

double reflect_into(double x, double extent) noexcept
{
  if (x >= 0.0 && x <= extent)
    return x;
  // Repeated mirroring about 0 and extent is periodic with period 2*extent.
  double r = std::fmod(x, 2.0 * extent);
  if (r < 0.0)
    r += 2.0 * extent;
  return r > extent ? 2.0 * extent - r : r;
}

namespace {

double sigma_at(const Diffusivity& sigma, Vec2 p)
{
  if (const double* s = std::get_if<double>(&sigma))
    return *s;
  return std::max(0.0, interpolate(std::get<ScalarField>(sigma), p));
}

} // namespace

SwarmState step(const SwarmState& state, const std::function<Vec2(Vec2)>& v,
                const Diffusivity& sigma, double dt)
{
  if (!(dt > 0.0))
    throw Error(ErrorCode::InvalidArgument, "time step must be positive");

  SwarmState next = state;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < state.n(); ++i) {
    const Vec2 p = state.positions[i];
    const Vec2 u = v(p);
    if (!std::isfinite(u.x) || !std::isfinite(u.y))
      throw Error(ErrorCode::NonFiniteVelocity,
                  "non-finite velocity for agent " + std::to_string(i));
    const double amp = std::sqrt(2.0 * sigma_at(sigma, p) * dt);
    double nx = 0.0, ny = 0.0;
    if (amp > 0.0) {
      auto eng = rng::engine(state.seed, rng::Stream::Motion, i, state.steps);
      nx = normal(eng);
      ny = normal(eng);
      normal.reset();
    }
    next.positions[i] = {reflect_into(p.x + u.x * dt + amp * nx, state.b),
                         reflect_into(p.y + u.y * dt + amp * ny, state.c)};
  }
  next.steps = state.steps + 1;
  next.t = state.t + dt;
  return next;
}

SwarmState step(const SwarmState& state, const VectorField& v,
                const Diffusivity& sigma, double dt)
{
  return step(state, [&](Vec2 p) { return interpolate(v, p); }, sigma, dt);
}

std::vector<Measurement> measure(SwarmState& state, const GroundTruthField& truth,
                                 double noise_var)
{
  if (noise_var < 0.0)
    throw Error(ErrorCode::InvalidArgument, "noise variance must be non-negative");
  std::vector<Measurement> batch;
  batch.reserve(state.n());
  const double sd = std::sqrt(noise_var);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < state.n(); ++i) {
    const Vec2 p = state.positions[i];
    double noise = 0.0;
    if (sd > 0.0) {
      auto eng = rng::engine(state.seed, rng::Stream::Measurement, i, state.batches);
      noise = sd * normal(eng);
      normal.reset();
    }
    batch.push_back({p, truth(p) + noise, state.batches, static_cast<std::uint32_t>(i)});
  }
  ++state.batches;
  return batch;
}

std::string trajectory_csv_header()
{
  return "t,agent_id,x1,x2\n";
}

void append_trajectory_csv(std::string& out, const SwarmState& state)
{
  for (std::size_t i = 0; i < state.n(); ++i) {
    out += format_double(state.t) + "," + std::to_string(i) + "," +
           format_double(state.positions[i].x) + "," +
           format_double(state.positions[i].y) + "\n";
  }
}

std::string measurements_csv(const Dataset& data)
{
  std::string out = "k,agent_id,x1,x2,y\n";
  for (const auto& m : data.records) {
    out += std::to_string(m.k) + "," + std::to_string(m.agent) + "," +
           format_double(m.position.x) + "," + format_double(m.position.y) + "," +
           format_double(m.y) + "\n";
  }
  return out;
}

} // namespace swarmfield
