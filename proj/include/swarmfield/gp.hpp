#pragma once

#include "swarmfield/agents.hpp"
#include "swarmfield/grid.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <span>
#include <vector>

namespace swarmfield {

struct GpHyper
{
  double signal_var = 1.0;
  double lengthscale = 2.0;
  double noise_var = 0.04;

  friend bool operator==(const GpHyper&, const GpHyper&) = default;
};

struct GpPrediction
{
  double mean = 0.0;
  double variance = 0.0;
};

struct GpFieldPrediction
{
  ScalarField mean;
  ScalarField variance;
};

//! Zero-mean GP regression with a squared-exponential kernel.
class GpPosterior
{
public:
  //! Prior-only posterior (no data).
  explicit GpPosterior(const GpHyper& hyper);

  static GpPosterior fit(std::span<const Measurement> data, const GpHyper& hyper);

  double kernel(Vec2 a, Vec2 b) const noexcept;

  GpPrediction predict(Vec2 x) const;
  GpFieldPrediction predict(const Grid& grid) const;

  double log_marginal_likelihood() const;

  const GpHyper& hyper() const noexcept { return hyper_; }
  std::size_t size() const noexcept { return inputs_.size(); }
  //! Diagonal jitter that was needed for the factorization to succeed.
  double jitter() const noexcept { return jitter_; }

private:
  GpHyper hyper_;
  std::vector<Vec2> inputs_;
  Eigen::VectorXd targets_;
  Eigen::LLT<Eigen::MatrixXd> factor_;
  Eigen::VectorXd weights_;
  double jitter_ = 0.0;
};

//! Keeps at most `cap` records, taking them round-robin over spatial bins
//! (most recent first within a bin). Output preserves the input order.
std::vector<Measurement> stratified_subsample(std::span<const Measurement> data,
                                              std::size_t cap, const Grid& bins);

//! Index of the candidate with the largest log marginal likelihood; ties go
//! to the first.
std::size_t tune_hyper(std::span<const Measurement> data,
                       std::span<const GpHyper> candidates);

//! normalize(max(variance - eta, 0)), falling back to uniform when nothing
//! exceeds eta.
ScalarField target_density(const ScalarField& variance, double eta);

double sup_uncertainty(const ScalarField& uncertainty);

ScalarField standard_deviation(const ScalarField& variance);

} // namespace swarmfield
