#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace zonsnc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

/// Thrown for invalid user input (bad config values, out-of-range parameters).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical invariant of an algorithm was violated.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A function evaluation or iterate became NaN/Inf.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Counts sampled function evaluations consumed by the estimators.
struct EvalCounter {
  std::uint64_t used = 0;
  void add(std::uint64_t k) { used += k; }
};

/// Independent generator for a named sub-stream of one run.
///
/// Runs keep separate streams for optimization samples, the output index and
/// metrics.
inline Rng make_stream(std::uint64_t seed, std::uint32_t stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32), stream_id,
                    0x9e3779b9u};
  return Rng(seq);
}

enum StreamId : std::uint32_t {
  kOptimizationStream = 1,
  kOutputIndexStream = 2,
  kMetricStream = 3,
};

inline void require_dim(const Vector& x, Eigen::Index n, const char* what) {
  if (x.size() != n) {
    std::ostringstream os;
    os << what << ": expected dimension " << n << ", got " << x.size();
    throw DimensionError(os.str());
  }
}

inline std::string format_vector(const Vector& x) {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ']';
  return os.str();
}

}  // namespace zonsnc
