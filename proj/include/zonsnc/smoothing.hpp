#pragma once

// Zeroth-order gradient estimators for the ball-smoothed objective
//   f_eta(x) = E_u[f(x + eta u)],  u uniform in the unit ball,
// built from two sampled evaluations at antipodal points x +- v, v on the
// radius-eta sphere.

#include <vector>

#include "geometry.hpp"
#include "problems.hpp"

namespace zonsnc {

/// Point uniformly distributed on the sphere of radius eta (normalized Gaussian).
inline Vector sample_sphere(Rng& rng, Eigen::Index n, double eta) {
  if (n < 1) throw ConfigError("sample_sphere: n must be >= 1");
  if (!(eta > 0)) throw ConfigError("sample_sphere: eta must be > 0");
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector g(n);
  double norm = 0.0;
  do {
    for (Eigen::Index i = 0; i < n; ++i) g[i] = normal(rng);
    norm = g.norm();
  } while (norm == 0.0);
  return eta * (g / norm);
}

/// Point uniformly distributed in the unit ball (direction times U^(1/n)).
inline Vector sample_unit_ball(Rng& rng, Eigen::Index n) {
  Vector u = sample_sphere(rng, n, 1.0);
  const double r = std::pow(std::uniform_real_distribution<double>(0.0, 1.0)(rng),
                            1.0 / static_cast<double>(n));
  return r * u;
}

/// Central-difference estimate (n / 2eta) (F(x+v, xi) - F(x-v, xi)) v / |v|.
/// Consumes two evaluations.
template <StochasticProblem P>
Vector zo_grad_sample(const P& problem, const Vector& x, const Vector& v,
                      const typename P::Realization& xi, double eta, EvalCounter& counter) {
  if (!(eta > 0)) throw ConfigError("zo_grad_sample: eta must be > 0");
  require_dim(x, problem.dim(), "zo_grad_sample");
  require_dim(v, problem.dim(), "zo_grad_sample direction");
  const double plus = problem.evaluate(x + v, xi);
  const double minus = problem.evaluate(x - v, xi);
  counter.add(2);
  if (!std::isfinite(plus) || !std::isfinite(minus))
    throw NonFiniteError("non-finite function value at x = " + format_vector(x));
  const double n = static_cast<double>(problem.dim());
  const double vnorm = v.norm();
  return (n / (2.0 * eta)) * (plus - minus) * (v / vnorm);
}

/// A mini-batch of (v, xi) pairs with the mean estimate at the point where it
/// was drawn. The pairs stay available for re-evaluation at the next iterate.
template <class R>
struct GradBatch {
  std::vector<Vector> directions;
  std::vector<R> realizations;
  Vector mean_grad;

  std::size_t size() const { return directions.size(); }
};

template <StochasticProblem P>
GradBatch<typename P::Realization> draw_batch(const P& problem, double eta, std::size_t batch_size,
                                              Rng& rng) {
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  GradBatch<typename P::Realization> batch;
  batch.directions.reserve(batch_size);
  batch.realizations.reserve(batch_size);
  for (std::size_t j = 0; j < batch_size; ++j) {
    batch.directions.push_back(sample_sphere(rng, problem.dim(), eta));
    batch.realizations.push_back(problem.sample(rng));
  }
  return batch;
}

/// Mean central-difference estimate over the batch's pairs, evaluated at x.
/// Sums in batch order.
template <StochasticProblem P>
Vector batch_mean_grad(const P& problem, const Vector& x,
                       const GradBatch<typename P::Realization>& batch, double eta,
                       EvalCounter& counter) {
  if (batch.size() == 0) throw ConfigError("empty gradient batch");
  Vector sum = Vector::Zero(problem.dim());
  for (std::size_t j = 0; j < batch.size(); ++j)
    sum += zo_grad_sample(problem, x, batch.directions[j], batch.realizations[j], eta, counter);
  return sum / static_cast<double>(batch.size());
}

/// Fresh mini-batch estimate of grad f_eta(x).
template <StochasticProblem P>
GradBatch<typename P::Realization> zo_grad_batch(const P& problem, const Vector& x, double eta,
                                                 std::size_t batch_size, Rng& rng,
                                                 EvalCounter& counter) {
  auto batch = draw_batch(problem, eta, batch_size, rng);
  batch.mean_grad = batch_mean_grad(problem, x, batch, eta, counter);
  return batch;
}

/// Estimate of grad h_eta(x) = grad f_eta(x) + (x - P(x)) / eta using the
/// pairs recorded in `batch` (full overlap between consecutive iterates).
template <StochasticProblem P>
Vector zo_grad_sqn(const P& problem, const ConvexSet& set, const Vector& x,
                   const GradBatch<typename P::Realization>& batch, double eta,
                   EvalCounter& counter) {
  return batch_mean_grad(problem, x, batch, eta, counter) + moreau_indicator_grad(set, x, eta);
}

/// Fresh-sample variant; on return `batch` holds the drawn pairs and the
/// f_eta part of the estimate in `mean_grad`.
template <StochasticProblem P>
Vector zo_grad_sqn(const P& problem, const ConvexSet& set, const Vector& x, double eta,
                   std::size_t batch_size, Rng& rng, EvalCounter& counter,
                   GradBatch<typename P::Realization>& batch) {
  batch = zo_grad_batch(problem, x, eta, batch_size, rng, counter);
  return batch.mean_grad + moreau_indicator_grad(set, x, eta);
}

/// Monte Carlo estimate of f_eta(x); diagnostic only, not budgeted.
template <StochasticProblem P>
double estimate_smoothed_value(const P& problem, const Vector& x, double eta, std::size_t samples,
                               Rng& rng) {
  if (samples < 1) throw ConfigError("estimate_smoothed_value: need at least one sample");
  require_dim(x, problem.dim(), "estimate_smoothed_value");
  double sum = 0.0;
  for (std::size_t j = 0; j < samples; ++j) {
    const Vector u = sample_unit_ball(rng, problem.dim());
    sum += problem.evaluate(x + eta * u, problem.sample(rng));
  }
  return sum / static_cast<double>(samples);
}

}  // namespace zonsnc
