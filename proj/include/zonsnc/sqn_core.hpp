#pragma once

// Damped limited-memory BFGS: initial scaling, Powell-style damping of the
// gradient-difference vector, the curvature-pair ring buffer and the two-loop
// recursion, plus a dense reference construction used for verification.

#include <cstddef>
#include <deque>

#include "types.hpp"

namespace zonsnc {

/// nu = max{ y'y / (s'y + delta s's), delta }. A nonpositive denominator
/// gives delta.
inline double compute_nu(const Vector& s, const Vector& y, double delta) {
  if (!(delta > 0)) throw ConfigError("compute_nu: delta must be > 0");
  const double ss = s.squaredNorm();
  if (ss == 0.0) throw InvariantError("compute_nu: degenerate step s = 0");
  const double denom = s.dot(y) + delta * ss;
  if (!(denom > 0)) return delta;
  return std::max(y.squaredNorm() / denom, delta);
}

/// Damping weight Phi in (0, 1]. Both quadratic forms use the next initial
/// matrix nu_next I.
inline double damping_phi(const Vector& s, const Vector& y, double nu_next) {
  if (!(nu_next > 0)) throw ConfigError("damping_phi: nu must be > 0");
  const double sbs = nu_next * s.squaredNorm();
  const double sy = s.dot(y);
  if (sy < 0.25 * sbs) return 0.75 * sbs / (sbs - sy);
  return 1.0;
}

inline Vector make_ybar(const Vector& s, const Vector& y, double phi, double nu_next) {
  return phi * y + (1.0 - phi) * nu_next * s;
}

struct CurvatureTriple {
  Vector s;
  Vector y;
  Vector ybar;
  double rho = 0.0;  // 1 / s'ybar
  double phi = 1.0;
};

/// Builds the damped triple for step s and raw difference y.
inline CurvatureTriple make_triple(Vector s, Vector y, double nu_next) {
  CurvatureTriple t;
  t.phi = damping_phi(s, y, nu_next);
  t.ybar = make_ybar(s, y, t.phi, nu_next);
  const double sy = s.dot(t.ybar);
  if (!(sy > 0)) throw InvariantError("curvature condition s'ybar > 0 violated");
  t.rho = 1.0 / sy;
  t.s = std::move(s);
  t.y = std::move(y);
  return t;
}

/// FIFO ring of at most `capacity` curvature triples plus the current scaling nu.
class SqnMemory {
 public:
  SqnMemory(std::size_t capacity, double delta) : capacity_(capacity), delta_(delta), nu_(delta) {
    if (capacity_ < 1) throw ConfigError("sqn memory: capacity must be >= 1");
    if (!(delta_ > 0)) throw ConfigError("sqn memory: delta must be > 0");
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  double delta() const { return delta_; }
  double nu() const { return nu_; }
  void set_nu(double nu) {
    if (!(nu > 0)) throw ConfigError("sqn memory: nu must be > 0");
    nu_ = nu;
  }

  /// Oldest first.
  const std::deque<CurvatureTriple>& pairs() const { return pairs_; }

  void push(CurvatureTriple t) {
    if (!(t.s.dot(t.ybar) > 0)) throw InvariantError("sqn memory: s'ybar must be > 0");
    if (pairs_.size() == capacity_) pairs_.pop_front();
    pairs_.push_back(std::move(t));
  }

  void clear() { pairs_.clear(); }

 private:
  std::size_t capacity_;
  double delta_;
  double nu_;
  std::deque<CurvatureTriple> pairs_;
};

/// r = H g for the damped L-BFGS inverse Hessian with H_0 = I / nu, in O(pn).
inline Vector two_loop(const SqnMemory& memory, const Vector& g) {
  const auto& pairs = memory.pairs();
  std::vector<double> alpha(pairs.size());
  Vector q = g;
  for (std::size_t i = pairs.size(); i-- > 0;) {
    const auto& t = pairs[i];
    const double sy = t.s.dot(t.ybar);
    if (!(sy > 0)) throw InvariantError("two_loop: stored s'ybar <= 0");
    alpha[i] = t.rho * t.s.dot(q);
    q -= alpha[i] * t.ybar;
  }
  Vector r = q / memory.nu();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& t = pairs[i];
    const double beta = t.rho * t.ybar.dot(r);
    r += (alpha[i] - beta) * t.s;
  }
  return r;
}

/// Explicit H_k from H_{k,i} = V' H_{k,i-1} V + rho s s', V = I - rho ybar s'.
inline Matrix dense_inverse_hessian(const SqnMemory& memory, Eigen::Index n) {
  Matrix h = Matrix::Identity(n, n) / memory.nu();
  for (const auto& t : memory.pairs()) {
    const Matrix v = Matrix::Identity(n, n) - t.rho * t.ybar * t.s.transpose();
    h = v.transpose() * h * v + t.rho * t.s * t.s.transpose();
  }
  return h;
}

/// Explicit B_k from the direct BFGS update starting at B_{k,0} = nu I.
inline Matrix dense_hessian(const SqnMemory& memory, Eigen::Index n) {
  Matrix b = Matrix::Identity(n, n) * memory.nu();
  for (const auto& t : memory.pairs()) {
    const Vector bs = b * t.s;
    b += t.rho * t.ybar * t.ybar.transpose() - (bs * bs.transpose()) / t.s.dot(bs);
  }
  return b;
}

}  // namespace zonsnc
