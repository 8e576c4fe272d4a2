#include "swarmfield/controller.hpp"

#include "swarmfield/error.hpp"

#include <algorithm>
#include <cmath>

namespace swarmfield {

namespace {

void require_positive(const ScalarField& p, const char* what)
{
  for (double v : p.values())
    if (!(v > 0.0))
      throw Error(ErrorCode::NonPositiveDensity,
                  std::string(what) + " must be strictly positive on the grid");
}

VectorField feedback(const ScalarField& p, const ScalarField& p_r, const VectorField& v_r,
                     const ControllerConfig& cfg)
{
  const Grid& g = p.grid();
  if (!(p_r.grid() == g) || !(v_r.grid() == g))
    throw Error(ErrorCode::ShapeMismatch, "controller inputs live on different grids");

  const VectorField dphi = gradient(p - p_r);
  ScalarField sp(g);
  for (std::size_t k = 0; k < sp.size(); ++k)
    sp[k] = coefficient_at(cfg.sigma, k) * p[k];
  const VectorField dsp = gradient(sp);

  VectorField v(g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double a = coefficient_at(cfg.alpha, k);
    v.x[k] = (-a * dphi.x[k] + dsp.x[k] + v_r.x[k] * p_r[k]) / p[k];
    v.y[k] = (-a * dphi.y[k] + dsp.y[k] + v_r.y[k] * p_r[k]) / p[k];
  }
  return v;
}

} // namespace

VectorField exact_feedback(const ScalarField& p, const ScalarField& p_r,
                           const VectorField& v_r, const ControllerConfig& cfg)
{
  require_positive(p, "density");
  return feedback(p, p_r, v_r, cfg);
}

VectorField estimated_feedback(const ScalarField& p_hat, const ScalarField& p_r,
                               const VectorField& v_r, const ControllerConfig& cfg)
{
  require_positive(p_hat, "density estimate");
  VectorField v = feedback(p_hat, p_r, v_r, cfg);
  if (cfg.v_max)
    v = clamp_velocity(std::move(v), *cfg.v_max);
  return v;
}

VectorField clamp_velocity(VectorField v, double v_max)
{
  if (!(v_max > 0.0))
    throw Error(ErrorCode::InvalidArgument, "v_max must be positive");
  for (std::size_t k = 0; k < v.x.size(); ++k) {
    v.x[k] = std::clamp(v.x[k], -v_max, v_max);
    v.y[k] = std::clamp(v.y[k], -v_max, v_max);
  }
  return v;
}

EstimationError error_model(const ScalarField& p_hat, const ScalarField& p)
{
  require_positive(p, "density");
  if (!(p_hat.grid() == p.grid()))
    throw Error(ErrorCode::ShapeMismatch, "estimate and density grids differ");
  EstimationError out{ScalarField(p.grid()), 0.0, 0.0};
  for (std::size_t k = 0; k < p.size(); ++k)
    out.epsilon[k] = p_hat[k] / p[k] - 1.0;

  const VectorField de = gradient(out.epsilon);
  ScalarField ratio(p.grid()), slope(p.grid());
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double one_eps = 1.0 + out.epsilon[k];
    ratio[k] = out.epsilon[k] / one_eps;
    slope[k] = std::hypot(de.x[k], de.y[k]) / one_eps;
  }
  out.ratio_norm = l2_norm(ratio);
  out.gradient_norm = l2_norm(slope);
  return out;
}

} // namespace swarmfield
