#pragma once

#include <functional>
#include <string>
#include <variant>

#include "types.hpp"

namespace zonsnc {

struct WholeSpace {
  Eigen::Index n;
};

struct Box {
  Vector lower;
  Vector upper;
};

struct Ball {
  Vector center;
  double radius;
};

/// Projection supplied by the caller; must return the Euclidean projection
/// onto a nonempty closed convex set.
struct CustomSet {
  Eigen::Index n;
  std::function<Vector(const Vector&)> projector;
};

/// Feasible set with a closed-form Euclidean projection.
class ConvexSet {
 public:
  using Variant = std::variant<WholeSpace, Box, Ball, CustomSet>;

  static ConvexSet whole_space(Eigen::Index n) { return ConvexSet(WholeSpace{n}); }

  static ConvexSet box(Vector lower, Vector upper) {
    if (lower.size() != upper.size()) throw DimensionError("box: bound dimensions differ");
    if ((lower.array() > upper.array()).any()) throw ConfigError("box: lower > upper");
    return ConvexSet(Box{std::move(lower), std::move(upper)});
  }

  static ConvexSet box(Eigen::Index n, double lower, double upper) {
    return box(Vector::Constant(n, lower), Vector::Constant(n, upper));
  }

  static ConvexSet ball(Vector center, double radius) {
    if (!(radius > 0)) throw ConfigError("ball: radius must be > 0");
    return ConvexSet(Ball{std::move(center), radius});
  }

  static ConvexSet custom(Eigen::Index n, std::function<Vector(const Vector&)> projector) {
    return ConvexSet(CustomSet{n, std::move(projector)});
  }

  Eigen::Index dim() const {
    return std::visit(
        [](const auto& s) -> Eigen::Index {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Box>) return s.lower.size();
          else if constexpr (std::is_same_v<T, Ball>) return s.center.size();
          else return s.n;
        },
        set_);
  }

  std::string kind() const {
    switch (set_.index()) {
      case 0: return "rn";
      case 1: return "box";
      case 2: return "ball";
      default: return "custom";
    }
  }

  const Variant& variant() const { return set_; }

  Vector project(const Vector& x) const {
    require_dim(x, dim(), "project");
    return std::visit(
        [&](const auto& s) -> Vector {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, WholeSpace>) {
            return x;
          } else if constexpr (std::is_same_v<T, Box>) {
            return x.cwiseMax(s.lower).cwiseMin(s.upper);
          } else if constexpr (std::is_same_v<T, Ball>) {
            const Vector d = x - s.center;
            const double r = d.norm();
            if (r <= s.radius * (1.0 + 1e-14)) return x;
            return s.center + (s.radius / r) * d;
          } else {
            return s.projector(x);
          }
        },
        set_);
  }

  /// Center of a box or ball; projection of the origin otherwise.
  Vector default_start() const {
    if (const auto* b = std::get_if<Box>(&set_)) return 0.5 * (b->lower + b->upper);
    if (const auto* b = std::get_if<Ball>(&set_)) return b->center;
    return project(Vector::Zero(dim()));
  }

 private:
  explicit ConvexSet(Variant v) : set_(std::move(v)) {}
  Variant set_;
};

/// Gradient of the Moreau envelope of the indicator: (x - P(x)) / eta.
inline Vector moreau_indicator_grad(const ConvexSet& set, const Vector& x, double eta) {
  if (!(eta > 0)) throw ConfigError("moreau_indicator_grad: eta must be > 0");
  return (x - set.project(x)) / eta;
}

/// beta (x - P(x - g / beta)). With g the exact smoothed gradient this is the
/// residual mapping; with an inexact g it is its inexact counterpart.
inline Vector residual(const ConvexSet& set, const Vector& x, const Vector& g, double beta) {
  if (!(beta > 0)) throw ConfigError("residual: beta must be > 0");
  require_dim(g, x.size(), "residual gradient");
  return beta * (x - set.project(x - g / beta));
}

inline double infeasibility(const ConvexSet& set, const Vector& x) {
  return (x - set.project(x)).norm();
}

}  // namespace zonsnc
