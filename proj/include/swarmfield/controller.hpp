#pragma once

#include "swarmfield/grid.hpp"

#include <optional>

namespace swarmfield {

struct ControllerConfig
{
  Coefficient alpha = 0.5;
  //! Per-component clamp; empty disables it.
  std::optional<double> v_max;
  //! Must equal the agents' diffusion coefficient.
  Coefficient sigma = 0.05;
};

//! v = (-alpha grad(p - p_r) + grad(sigma p) + v_r p_r) / p.
VectorField exact_feedback(const ScalarField& p, const ScalarField& p_r,
                           const VectorField& v_r, const ControllerConfig& cfg);

//! The same law evaluated on an estimate, followed by the optional clamp.
VectorField estimated_feedback(const ScalarField& p_hat, const ScalarField& p_r,
                               const VectorField& v_r, const ControllerConfig& cfg);

//! Symmetric component-wise clamp to [-v_max, v_max].
VectorField clamp_velocity(VectorField v, double v_max);

struct EstimationError
{
  ScalarField epsilon;
  //! L2 norm of eps / (1 + eps).
  double ratio_norm = 0.0;
  //! L2 norm of |grad eps| / (1 + eps).
  double gradient_norm = 0.0;
};

//! eps = p_hat / p - 1 and the two disturbance norms of the ISS bound.
EstimationError error_model(const ScalarField& p_hat, const ScalarField& p);

} // namespace swarmfield
