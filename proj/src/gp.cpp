#include "swarmfield/gp.hpp"

#include "swarmfield/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace swarmfield {

namespace {

void check_hyper(const GpHyper& h)
{
  if (!(h.signal_var > 0.0) || !(h.lengthscale > 0.0) || !(h.noise_var > 0.0))
    throw Error(ErrorCode::InvalidArgument, "GP hyperparameters must be positive");
}

constexpr double kJitterStart = 1e-10;
constexpr double kJitterMax = 1e-6;

} // namespace

GpPosterior::GpPosterior(const GpHyper& hyper) : hyper_(hyper)
{
  check_hyper(hyper);
}

double GpPosterior::kernel(Vec2 a, Vec2 b) const noexcept
{
  const double dx = a.x - b.x, dy = a.y - b.y;
  return hyper_.signal_var *
         std::exp(-(dx * dx + dy * dy) / (2.0 * hyper_.lengthscale * hyper_.lengthscale));
}

GpPosterior GpPosterior::fit(std::span<const Measurement> data, const GpHyper& hyper)
{
  GpPosterior gp(hyper);
  const auto n = static_cast<Eigen::Index>(data.size());
  if (n == 0)
    return gp;

  gp.inputs_.reserve(data.size());
  gp.targets_.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    gp.inputs_.push_back(data[r].position);
    gp.targets_(r) = data[r].y;
  }

  Eigen::MatrixXd gram(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    gram(r, r) = hyper.signal_var + hyper.noise_var;
    for (Eigen::Index c = 0; c < r; ++c) {
      const double k = gp.kernel(gp.inputs_[r], gp.inputs_[c]);
      gram(r, c) = k;
      gram(c, r) = k;
    }
  }

  gp.factor_.compute(gram);
  double jitter = kJitterStart;
  while (gp.factor_.info() != Eigen::Success) {
    if (jitter > kJitterMax * 1.0000001)
      throw Error(ErrorCode::SingularGram,
                  "Gram matrix not positive definite after jitter escalation");
    Eigen::MatrixXd jittered = gram;
    jittered.diagonal().array() += jitter;
    gp.factor_.compute(jittered);
    gp.jitter_ = jitter;
    jitter *= 10.0;
  }
  gp.weights_ = gp.factor_.solve(gp.targets_);
  return gp;
}

GpPrediction GpPosterior::predict(Vec2 x) const
{
  if (inputs_.empty())
    return {0.0, hyper_.signal_var};
  const auto n = static_cast<Eigen::Index>(inputs_.size());
  Eigen::VectorXd ks(n);
  for (Eigen::Index r = 0; r < n; ++r)
    ks(r) = kernel(inputs_[r], x);
  const double mean = ks.dot(weights_);
  factor_.matrixL().solveInPlace(ks);
  return {mean, std::max(0.0, hyper_.signal_var - ks.squaredNorm())};
}

GpFieldPrediction GpPosterior::predict(const Grid& grid) const
{
  GpFieldPrediction out{ScalarField(grid, 0.0), ScalarField(grid, hyper_.signal_var)};
  if (inputs_.empty())
    return out;

  const auto n = static_cast<Eigen::Index>(inputs_.size());
  const auto cells = static_cast<Eigen::Index>(grid.size());
  constexpr Eigen::Index kChunk = 512;
  Eigen::MatrixXd ks;
  for (Eigen::Index start = 0; start < cells; start += kChunk) {
    const Eigen::Index m = std::min(kChunk, cells - start);
    ks.resize(n, m);
    for (Eigen::Index q = 0; q < m; ++q) {
      const auto k = static_cast<std::size_t>(start + q);
      const Vec2 x = grid.center(int(k % grid.nx()), int(k / grid.nx()));
      for (Eigen::Index r = 0; r < n; ++r)
        ks(r, q) = kernel(inputs_[r], x);
    }
    const Eigen::VectorXd mean = ks.transpose() * weights_;
    factor_.matrixL().solveInPlace(ks);
    const Eigen::VectorXd explained = ks.colwise().squaredNorm().transpose();
    for (Eigen::Index q = 0; q < m; ++q) {
      const auto k = static_cast<std::size_t>(start + q);
      out.mean[k] = mean(q);
      out.variance[k] = std::max(0.0, hyper_.signal_var - explained(q));
    }
  }
  return out;
}

double GpPosterior::log_marginal_likelihood() const
{
  const auto n = static_cast<double>(inputs_.size());
  if (inputs_.empty())
    return 0.0;
  const Eigen::MatrixXd& l = factor_.matrixLLT();
  const double log_det_half = l.diagonal().array().log().sum();
  return -0.5 * targets_.dot(weights_) - log_det_half -
         0.5 * n * std::log(2.0 * std::numbers::pi);
}

std::vector<Measurement> stratified_subsample(std::span<const Measurement> data,
                                              std::size_t cap, const Grid& bins)
{
  if (data.size() <= cap)
    return {data.begin(), data.end()};

  std::vector<std::vector<std::size_t>> members(bins.size());
  for (std::size_t r = 0; r < data.size(); ++r) {
    const Vec2 p = data[r].position;
    const int i = std::clamp(int(p.x / bins.hx()), 0, bins.nx() - 1);
    const int j = std::clamp(int(p.y / bins.hy()), 0, bins.ny() - 1);
    members[bins.index(i, j)].push_back(r);
  }

  std::vector<char> keep(data.size(), 0);
  std::size_t taken = 0;
  for (std::size_t round = 0; taken < cap; ++round) {
    bool any = false;
    for (const auto& m : members) {
      if (round >= m.size())
        continue;
      any = true;
      keep[m[m.size() - 1 - round]] = 1;
      if (++taken == cap)
        break;
    }
    if (!any)
      break;
  }

  std::vector<Measurement> out;
  out.reserve(taken);
  for (std::size_t r = 0; r < data.size(); ++r)
    if (keep[r])
      out.push_back(data[r]);
  return out;
}

std::size_t tune_hyper(std::span<const Measurement> data,
                       std::span<const GpHyper> candidates)
{
  if (candidates.empty())
    throw Error(ErrorCode::InvalidArgument, "no hyperparameter candidates");
  std::size_t best = 0;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const double ll = GpPosterior::fit(data, candidates[k]).log_marginal_likelihood();
    if (ll > best_ll) {
      best_ll = ll;
      best = k;
    }
  }
  return best;
}

ScalarField target_density(const ScalarField& variance, double eta)
{
  if (!(eta > 0.0))
    throw Error(ErrorCode::InvalidArgument, "eta must be positive");
  ScalarField w(variance.grid());
  for (std::size_t k = 0; k < w.size(); ++k)
    w[k] = std::max(variance[k] - eta, 0.0);
  if (!(integrate(w) > 0.0))
    return uniform_density(variance.grid());
  return normalize(w);
}

double sup_uncertainty(const ScalarField& uncertainty)
{
  return uncertainty.max();
}

ScalarField standard_deviation(const ScalarField& variance)
{
  ScalarField out(variance.grid());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = std::sqrt(std::max(0.0, variance[k]));
  return out;
}

} // namespace swarmfield
