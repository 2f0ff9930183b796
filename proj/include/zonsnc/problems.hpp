#pragma once

// Stochastic objectives f(x) = E[F(x, xi)] accessed only through samples,
// the two benchmark problems and a few analytic test objectives.

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "types.hpp"

namespace zonsnc {

template <class P>
concept StochasticProblem = requires(const P& p, const Vector& x, Rng& rng,
                                     const typename P::Realization& xi) {
  typename P::Realization;
  { p.dim() } -> std::convertible_to<Eigen::Index>;
  { p.lipschitz_l0() } -> std::convertible_to<double>;
  { p.sample(rng) } -> std::same_as<typename P::Realization>;
  { p.evaluate(x, xi) } -> std::convertible_to<double>;
};

/// Problems that know f(x) = E[F(x, xi)] in closed form.
template <class P>
concept HasExactValue = requires(const P& p, const Vector& x) {
  { p.true_value(x) } -> std::convertible_to<double>;
};

/// Problems that know grad f(x) wherever f is differentiable.
template <class P>
concept HasExactGradient = requires(const P& p, const Vector& x) {
  { p.true_grad(x) } -> std::convertible_to<Vector>;
};

/// Problems that know the gradient of the ball-smoothed f_eta exactly.
template <class P>
concept HasSmoothedGradient = requires(const P& p, const Vector& x, double eta) {
  { p.smoothed_grad(x, eta) } -> std::convertible_to<Vector>;
};

/// Realization type for deterministic objectives.
struct NoNoise {
  friend bool operator==(NoNoise, NoNoise) { return true; }
};

// ---------------------------------------------------------------------------
// Minimum of two noise-afflicted quadratics.
//
//   F(x, xi) = min(sum (x_i - xi)^2, sum (x_i + xi)^2),  xi ~ U[0, 2].
//
// Since f1 - f2 = -4 xi sum(x), the min picks f1 when sum(x) > 0, giving
// F = |x|^2 + n xi^2 - 2 xi |sum x| and f(x) = |x|^2 + 4n/3 - 2 |sum x|.
// ---------------------------------------------------------------------------
class MinTwoQuadratics {
 public:
  using Realization = double;

  /// `domain_radius` bounds |x| over the region where iterates and their
  /// perturbations live; the Lipschitz estimate is 2(R + 2 sqrt(n)).
  MinTwoQuadratics(Eigen::Index n, double domain_radius) : n_(n), radius_(domain_radius) {
    if (n < 1) throw ConfigError("min-quadratics: n must be >= 1");
    if (!(domain_radius > 0)) throw ConfigError("min-quadratics: domain radius must be > 0");
    l0_ = 2.0 * (radius_ + 2.0 * std::sqrt(static_cast<double>(n_)));
  }

  Eigen::Index dim() const { return n_; }
  double lipschitz_l0() const { return l0_; }
  double domain_radius() const { return radius_; }

  Realization sample(Rng& rng) const { return std::uniform_real_distribution<double>(0.0, 2.0)(rng); }

  double evaluate(const Vector& x, Realization xi) const {
    require_dim(x, n_, "min-quadratics evaluate");
    double f1 = 0.0;
    double f2 = 0.0;
    for (Eigen::Index i = 0; i < n_; ++i) {
      const double a = x[i] - xi;
      const double b = x[i] + xi;
      f1 += a * a;
      f2 += b * b;
    }
    return std::min(f1, f2);
  }

  double true_value(const Vector& x) const {
    require_dim(x, n_, "min-quadratics true_value");
    const double nn = static_cast<double>(n_);
    return x.squaredNorm() + 4.0 * nn / 3.0 - 2.0 * std::abs(x.sum());
  }

  /// Gradient of f off the hyperplane sum(x) = 0; on it, returns 2x.
  Vector true_grad(const Vector& x) const {
    require_dim(x, n_, "min-quadratics true_grad");
    const double s = x.sum();
    const double sign = s > 0 ? 1.0 : (s < 0 ? -1.0 : 0.0);
    return 2.0 * x - 2.0 * sign * Vector::Ones(n_);
  }

  /// Exact gradient of f_eta(x) = E_u[f(x + eta u)], u uniform in the unit ball.
  ///
  /// Only the |sum x| term needs smoothing. With t = u.1/sqrt(n), whose density
  /// on [-1, 1] is proportional to (1 - t^2)^((n-1)/2), i.e. (1+t)/2 ~ Beta(a, a)
  /// with a = (n+1)/2:
  ///   d/dS E|S + eta sqrt(n) t| = 1 - 2 P(t < -S / (eta sqrt(n))).
  Vector smoothed_grad(const Vector& x, double eta) const {
    require_dim(x, n_, "min-quadratics smoothed_grad");
    if (!(eta > 0)) throw ConfigError("smoothed_grad: eta must be > 0");
    const double nn = static_cast<double>(n_);
    const double z = std::clamp(-x.sum() / (eta * std::sqrt(nn)), -1.0, 1.0);
    const double a = 0.5 * (nn + 1.0);
    const double below = boost::math::ibeta(a, a, 0.5 * (1.0 + z));
    return 2.0 * x - 2.0 * (1.0 - 2.0 * below) * Vector::Ones(n_);
  }

 private:
  Eigen::Index n_;
  double radius_;
  double l0_;
};

/// Benchmark on the cube [-half_width, half_width]^n; the radius covers the
/// cube plus a unit margin for the smoothing perturbations.
inline MinTwoQuadratics make_min_two_quadratics(Eigen::Index n, double half_width = 5.0) {
  if (n < 1) throw ConfigError("min-quadratics: n must be >= 1");
  return MinTwoQuadratics(n, half_width * std::sqrt(static_cast<double>(n)) + 1.0);
}

// ---------------------------------------------------------------------------
// L1-penalized logistic regression on a synthetic dataset.
// ---------------------------------------------------------------------------

struct LogisticDataset {
  Matrix features;          // S x (n-1)
  std::vector<int> labels;  // 0 / 1

  std::size_t size() const { return labels.size(); }
  Eigen::Index feature_dim() const { return features.cols(); }
};

struct LogisticOptions {
  std::size_t samples = 1000;         // S
  Eigen::Index n = 5;                 // weights + bias
  double informative_frac = 0.2;
  double lambda = 0.01;
  double class_mean = 2.0;            // informative features ~ N(+-class_mean, 1)
  std::uint64_t seed = 1;
};

inline std::size_t informative_count(Eigen::Index n, double frac) {
  return static_cast<std::size_t>(std::ceil(frac * static_cast<double>(n - 1) - 1e-12));
}

/// Draws S points: labels Bernoulli(1/2), every feature standard normal, the
/// first ceil(frac * (n-1)) features shifted by +-class_mean according to the label.
inline LogisticDataset generate_logistic_dataset(const LogisticOptions& opt) {
  if (opt.samples < 1) throw ConfigError("logistic: S must be >= 1");
  if (opt.n < 2) throw ConfigError("logistic: n must be >= 2");
  if (!(opt.informative_frac > 0 && opt.informative_frac <= 1))
    throw ConfigError("logistic: informative_frac must lie in (0, 1]");
  if (!(opt.lambda >= 0)) throw ConfigError("logistic: lambda must be >= 0");

  const Eigen::Index m = opt.n - 1;
  const auto informative = static_cast<Eigen::Index>(informative_count(opt.n, opt.informative_frac));
  std::uint64_t seed = opt.seed;
  for (;;) {
    Rng rng(seed);
    std::bernoulli_distribution coin(0.5);
    std::normal_distribution<double> normal(0.0, 1.0);
    LogisticDataset data;
    data.features.resize(static_cast<Eigen::Index>(opt.samples), m);
    data.labels.resize(opt.samples);
    for (std::size_t i = 0; i < opt.samples; ++i) {
      const int y = coin(rng) ? 1 : 0;
      data.labels[i] = y;
      const auto row = static_cast<Eigen::Index>(i);
      for (Eigen::Index j = 0; j < m; ++j) {
        double z = normal(rng);
        if (j < informative) z += (y == 1 ? opt.class_mean : -opt.class_mean);
        data.features(row, j) = z;
      }
    }
    const auto positives = std::count(data.labels.begin(), data.labels.end(), 1);
    const bool degenerate = positives == 0 || static_cast<std::size_t>(positives) == opt.samples;
    if (!degenerate || opt.samples < 2) return data;
    std::clog << "warning: logistic dataset with seed " << seed
              << " has a single class; regenerating with seed " << seed + 1 << '\n';
    ++seed;
  }
}

class LogisticL1 {
 public:
  using Realization = std::size_t;

  LogisticL1(LogisticDataset data, double lambda) : data_(std::move(data)), lambda_(lambda) {
    if (data_.size() == 0) throw ConfigError("logistic: empty dataset");
    if (!(lambda_ >= 0)) throw ConfigError("logistic: lambda must be >= 0");
    n_ = data_.feature_dim() + 1;
    double max_norm = 0.0;
    for (Eigen::Index i = 0; i < data_.features.rows(); ++i)
      max_norm = std::max(max_norm, data_.features.row(i).norm());
    l0_ = max_norm + 1.0 + lambda_ * std::sqrt(static_cast<double>(n_ - 1));
  }

  Eigen::Index dim() const { return n_; }
  double lipschitz_l0() const { return l0_; }
  double lambda() const { return lambda_; }
  const LogisticDataset& dataset() const { return data_; }

  Realization sample(Rng& rng) const {
    return std::uniform_int_distribution<std::size_t>(0, data_.size() - 1)(rng);
  }

  double evaluate(const Vector& x, Realization i) const {
    require_dim(x, n_, "logistic evaluate");
    if (i >= data_.size()) throw ConfigError("logistic: sample index out of range");
    return sample_loss(x, i) + penalty(x);
  }

  double true_value(const Vector& x) const {
    require_dim(x, n_, "logistic true_value");
    double risk = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) risk += sample_loss(x, i);
    return risk / static_cast<double>(data_.size()) + penalty(x);
  }

  /// Full-data risk gradient plus lambda * sign(w); the bias is unpenalized.
  Vector true_grad(const Vector& x) const {
    require_dim(x, n_, "logistic true_grad");
    Vector g = Vector::Zero(n_);
    const Eigen::Index m = n_ - 1;
    for (std::size_t i = 0; i < data_.size(); ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      const double t = margin(x, i);
      const double r = sigmoid(t) - data_.labels[i];
      g.head(m) += r * data_.features.row(row).transpose();
      g[m] += r;
    }
    g /= static_cast<double>(data_.size());
    for (Eigen::Index j = 0; j < m; ++j)
      g[j] += lambda_ * (x[j] > 0 ? 1.0 : (x[j] < 0 ? -1.0 : 0.0));
    return g;
  }

  static double sigmoid(double t) {
    if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
  }

 private:
  double margin(const Vector& x, std::size_t i) const {
    const Eigen::Index m = n_ - 1;
    return data_.features.row(static_cast<Eigen::Index>(i)).dot(x.head(m)) + x[m];
  }

  // -[y log s(t) + (1-y) log(1 - s(t))] = softplus(t) - y t
  double sample_loss(const Vector& x, std::size_t i) const {
    const double t = margin(x, i);
    const double softplus = t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
    return softplus - data_.labels[i] * t;
  }

  double penalty(const Vector& x) const { return lambda_ * x.head(n_ - 1).lpNorm<1>(); }

  LogisticDataset data_;
  double lambda_;
  Eigen::Index n_ = 0;
  double l0_ = 0.0;
};

inline LogisticL1 make_logistic_l1(const LogisticOptions& opt) {
  return LogisticL1(generate_logistic_dataset(opt), opt.lambda);
}

struct ClassificationMetrics {
  double accuracy = 0.0;
  std::optional<double> precision;  // empty when nothing is predicted positive
  std::optional<double> recall;     // empty when the data has no positives
};

/// Predicts 1 when sigmoid(w.z + w0) >= 1/2, i.e. when the margin is >= 0.
inline ClassificationMetrics classification_metrics(const LogisticDataset& data, const Vector& x) {
  require_dim(x, data.feature_dim() + 1, "classification_metrics");
  const Eigen::Index m = data.feature_dim();
  std::size_t correct = 0, tp = 0, predicted_pos = 0, actual_pos = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double t = data.features.row(static_cast<Eigen::Index>(i)).dot(x.head(m)) + x[m];
    const int pred = t >= 0 ? 1 : 0;
    const int y = data.labels[i];
    correct += pred == y;
    predicted_pos += pred;
    actual_pos += y;
    tp += pred == 1 && y == 1;
  }
  ClassificationMetrics out;
  out.accuracy = data.size() ? static_cast<double>(correct) / static_cast<double>(data.size()) : 0.0;
  if (predicted_pos > 0) out.precision = static_cast<double>(tp) / static_cast<double>(predicted_pos);
  if (actual_pos > 0) out.recall = static_cast<double>(tp) / static_cast<double>(actual_pos);
  return out;
}

// CSV layout: z_1,...,z_{n-1},y
inline void write_dataset_csv(const LogisticDataset& data, std::ostream& os) {
  const Eigen::Index m = data.feature_dim();
  for (Eigen::Index j = 0; j < m; ++j) os << "z_" << (j + 1) << ',';
  os << "y\n";
  os.precision(17);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (Eigen::Index j = 0; j < m; ++j) os << data.features(static_cast<Eigen::Index>(i), j) << ',';
    os << data.labels[i] << '\n';
  }
}

inline void write_dataset_csv(const LogisticDataset& data, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_dataset_csv(data, os);
  if (!os) throw std::runtime_error("failed writing " + path);
}

inline LogisticDataset read_dataset_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("dataset csv: missing header");
  const auto columns = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ',') + 1);
  if (columns < 2) throw ConfigError("dataset csv: need at least one feature column and y");
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (static_cast<Eigen::Index>(row.size()) != columns)
      throw ConfigError("dataset csv: ragged row");
    const double y = row.back();
    if (y != 0.0 && y != 1.0) throw ConfigError("dataset csv: labels must be 0 or 1");
    labels.push_back(static_cast<int>(y));
    row.pop_back();
    rows.push_back(std::move(row));
  }
  LogisticDataset data;
  data.features.resize(static_cast<Eigen::Index>(rows.size()), columns - 1);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (Eigen::Index j = 0; j < columns - 1; ++j)
      data.features(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
  data.labels = std::move(labels);
  return data;
}

inline LogisticDataset read_dataset_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open dataset " + path);
  return read_dataset_csv(is);
}

// ---------------------------------------------------------------------------
// Analytic objectives with exact oracles, used by the verification suites.
// ---------------------------------------------------------------------------

/// F(x) = c.x (no noise).
class LinearProblem {
 public:
  using Realization = NoNoise;
  explicit LinearProblem(Vector c) : c_(std::move(c)) {}
  Eigen::Index dim() const { return c_.size(); }
  double lipschitz_l0() const { return std::max(c_.norm(), 1e-300); }
  Realization sample(Rng&) const { return {}; }
  double evaluate(const Vector& x, Realization) const {
    require_dim(x, dim(), "linear evaluate");
    return c_.dot(x);
  }
  double true_value(const Vector& x) const { return c_.dot(x); }
  Vector true_grad(const Vector&) const { return c_; }
  Vector smoothed_grad(const Vector&, double) const { return c_; }
  const Vector& coefficients() const { return c_; }

 private:
  Vector c_;
};

/// F(x) = scale * |x - center|, exactly scale-Lipschitz.
class NormProblem {
 public:
  using Realization = NoNoise;
  NormProblem(Eigen::Index n, double scale) : center_(Vector::Zero(n)), scale_(scale) {}
  NormProblem(Vector center, double scale) : center_(std::move(center)), scale_(scale) {}
  Eigen::Index dim() const { return center_.size(); }
  double lipschitz_l0() const { return scale_; }
  Realization sample(Rng&) const { return {}; }
  double evaluate(const Vector& x, Realization) const {
    require_dim(x, dim(), "norm evaluate");
    return scale_ * (x - center_).norm();
  }
  double true_value(const Vector& x) const { return scale_ * (x - center_).norm(); }

 private:
  Vector center_;
  double scale_;
};

class ConstantProblem {
 public:
  using Realization = NoNoise;
  ConstantProblem(Eigen::Index n, double value) : n_(n), value_(value) {}
  Eigen::Index dim() const { return n_; }
  double lipschitz_l0() const { return 1.0; }
  Realization sample(Rng&) const { return {}; }
  double evaluate(const Vector& x, Realization) const {
    require_dim(x, n_, "constant evaluate");
    return value_;
  }
  double true_value(const Vector&) const { return value_; }
  Vector true_grad(const Vector&) const { return Vector::Zero(n_); }
  Vector smoothed_grad(const Vector&, double) const { return Vector::Zero(n_); }

 private:
  Eigen::Index n_;
  double value_;
};

static_assert(StochasticProblem<MinTwoQuadratics>);
static_assert(StochasticProblem<LogisticL1>);
static_assert(StochasticProblem<LinearProblem>);
static_assert(StochasticProblem<NormProblem>);
static_assert(StochasticProblem<ConstantProblem>);

}  // namespace zonsnc
