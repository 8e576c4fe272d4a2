#pragma once

#include "swarmfield/grid.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace swarmfield {

struct Rect
{
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

  friend bool operator==(const Rect&, const Rect&) = default;
};

struct SwarmState
{
  double b = 0.0;
  double c = 0.0;
  std::vector<Vec2> positions;
  std::uint64_t seed = 0;
  //! Number of motion steps taken; keys the motion noise stream.
  std::uint64_t steps = 0;
  //! Number of measurement batches taken; keys the measurement noise stream.
  std::uint64_t batches = 0;
  double t = 0.0;

  std::size_t n() const noexcept { return positions.size(); }
};

struct Measurement
{
  Vec2 position;
  double y = 0.0;
  std::uint64_t k = 0;
  std::uint32_t agent = 0;
};

struct Dataset
{
  std::vector<Measurement> records;
  double noise_var = 0.0;

  std::size_t size() const noexcept { return records.size(); }
  void append(const std::vector<Measurement>& batch)
  {
    records.insert(records.end(), batch.begin(), batch.end());
  }
};

struct GroundTruthField
{
  std::string name;
  std::function<double(Vec2)> f;

  double operator()(Vec2 p) const { return f(p); }
};

//! f(x) = 2 + sin(2|x|)/|x|, with the removable singularity at the origin.
GroundTruthField sinc_truth();
//! Sum of three Gaussian bumps over [0,20]^2; a smoother alternative target.
GroundTruthField bumps_truth();
GroundTruthField truth_by_name(const std::string& name);

using Diffusivity = Coefficient;

SwarmState init_uniform(const Rect& region, double b, double c, std::size_t n,
                        std::uint64_t seed);

//! Mirror a coordinate back into [0, extent].
double reflect_into(double x, double extent) noexcept;

//! One Euler-Maruyama step of dX = v dt + sqrt(2 sigma) dB with reflecting walls.
SwarmState step(const SwarmState& state, const VectorField& v,
                const Diffusivity& sigma, double dt);

//! Agent-wise velocity variant; used when the commanded velocity is clamped
//! per agent after interpolation.
SwarmState step(const SwarmState& state, const std::function<Vec2(Vec2)>& v,
                const Diffusivity& sigma, double dt);

//! y_i = f(X_i) + noise; advances the state's measurement counter.
std::vector<Measurement> measure(SwarmState& state, const GroundTruthField& truth,
                                 double noise_var);

std::string trajectory_csv_header();
void append_trajectory_csv(std::string& out, const SwarmState& state);
std::string measurements_csv(const Dataset& data);

} // namespace swarmfield
