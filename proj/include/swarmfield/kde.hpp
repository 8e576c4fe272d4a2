#pragma once

#include "swarmfield/grid.hpp"

#include <optional>
#include <span>
#include <vector>

namespace swarmfield {

struct KdeConfig
{
  //! Explicit bandwidth; empty means auto_bandwidth.
  std::optional<double> bandwidth;
  //! Floor fraction added (relative to the uniform density) before renormalizing.
  double floor = 0.01;
};

//! Gaussian KDE evaluated at every cell center.
ScalarField kde(std::span<const Vec2> positions, double h, const Grid& grid);

//! Gaussian KDE evaluated at arbitrary query points.
std::vector<double> kde_at(std::span<const Vec2> positions, double h,
                           std::span<const Vec2> queries);

//! h = mean per-axis population standard deviation * n^(-1/6), clamped to [hx, b/4].
double auto_bandwidth(std::span<const Vec2> positions, const Grid& grid);

//! normalize(p + delta/(b c)); identity when delta == 0.
ScalarField floor_and_renormalize(const ScalarField& p_hat, double delta);

//! The estimate the controller consumes: KDE then floor-and-renormalize.
ScalarField estimate_density(std::span<const Vec2> positions, const Grid& grid,
                             const KdeConfig& cfg);

} // namespace swarmfield
