#include "swarmfield/kde.hpp"

#include "swarmfield/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace swarmfield {

namespace {

// Summation runs over agents sorted by (x, y), so the result does not depend
// on the order the caller supplies them in.
std::vector<Vec2> canonical_order(std::span<const Vec2> positions)
{
  std::vector<Vec2> out(positions.begin(), positions.end());
  std::sort(out.begin(), out.end(), [](const Vec2& a, const Vec2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  return out;
}

void check_args(std::span<const Vec2> positions, double h)
{
  if (positions.empty())
    throw Error(ErrorCode::InvalidArgument, "KDE needs at least one agent");
  if (!(h > 0.0) || !std::isfinite(h))
    throw Error(ErrorCode::InvalidArgument, "KDE bandwidth must be positive");
}

} // namespace

ScalarField kde(std::span<const Vec2> positions, double h, const Grid& grid)
{
  check_args(positions, h);
  const auto agents = canonical_order(positions);
  const int nx = grid.nx(), ny = grid.ny();
  const double inv2h2 = 1.0 / (2.0 * h * h);

  // exp(-(dx^2+dy^2)/2h^2) factors into an x part and a y part per agent.
  std::vector<double> ex(nx), ey(ny);
  ScalarField out(grid);
  for (const Vec2& a : agents) {
    for (int i = 0; i < nx; ++i) {
      const double d = grid.xc(i) - a.x;
      ex[i] = std::exp(-d * d * inv2h2);
    }
    for (int j = 0; j < ny; ++j) {
      const double d = grid.yc(j) - a.y;
      ey[j] = std::exp(-d * d * inv2h2);
    }
    for (int j = 0; j < ny; ++j) {
      double* row = &out(0, j);
      const double fy = ey[j];
      for (int i = 0; i < nx; ++i)
        row[i] += ex[i] * fy;
    }
  }
  out *= 1.0 / (2.0 * std::numbers::pi * double(agents.size()) * h * h);
  return out;
}

std::vector<double> kde_at(std::span<const Vec2> positions, double h,
                           std::span<const Vec2> queries)
{
  check_args(positions, h);
  const auto agents = canonical_order(positions);
  const double inv2h2 = 1.0 / (2.0 * h * h);
  const double norm = 1.0 / (2.0 * std::numbers::pi * double(agents.size()) * h * h);
  std::vector<double> out;
  out.reserve(queries.size());
  for (const Vec2& q : queries) {
    double s = 0.0;
    for (const Vec2& a : agents) {
      const double dx = q.x - a.x, dy = q.y - a.y;
      s += std::exp(-(dx * dx + dy * dy) * inv2h2);
    }
    out.push_back(s * norm);
  }
  return out;
}

double auto_bandwidth(std::span<const Vec2> positions, const Grid& grid)
{
  if (positions.empty())
    throw Error(ErrorCode::InvalidArgument, "bandwidth needs at least one agent");
  const double n = double(positions.size());
  double mx = 0.0, my = 0.0;
  for (const Vec2& p : positions) {
    mx += p.x;
    my += p.y;
  }
  mx /= n;
  my /= n;
  double vx = 0.0, vy = 0.0;
  for (const Vec2& p : positions) {
    vx += (p.x - mx) * (p.x - mx);
    vy += (p.y - my) * (p.y - my);
  }
  const double spread = 0.5 * (std::sqrt(vx / n) + std::sqrt(vy / n));
  const double h = spread * std::pow(n, -1.0 / 6.0);
  return std::clamp(h, grid.hx(), grid.b() / 4.0);
}

ScalarField floor_and_renormalize(const ScalarField& p_hat, double delta)
{
  if (!(delta >= 0.0 && delta < 1.0))
    throw Error(ErrorCode::InvalidArgument, "density floor must lie in [0, 1)");
  if (delta == 0.0)
    return p_hat;
  const Grid& g = p_hat.grid();
  ScalarField out = p_hat;
  const double lift = delta / (g.b() * g.c());
  for (double& v : out.values())
    v += lift;
  return normalize(out);
}

ScalarField estimate_density(std::span<const Vec2> positions, const Grid& grid,
                             const KdeConfig& cfg)
{
  const double h = cfg.bandwidth ? *cfg.bandwidth : auto_bandwidth(positions, grid);
  return floor_and_renormalize(kde(positions, h, grid), cfg.floor);
}

} // namespace swarmfield
