#pragma once

#include <Eigen/Dense>

namespace tflat {

/// Axis-aligned box [lo, hi] (or [lo, hi) per axis when half_open).
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  bool half_open = false;

  static Box cube(int d, double lo, double hi, bool half_open = false);

  int dim() const { return static_cast<int>(lo.size()); }
  double volume() const;
  bool contains(const Eigen::VectorXd& p, double tol = 0.0) const;
  /// Smallest box containing both.
  Box hull(const Box& other) const;
  Box translated(const Eigen::VectorXd& v) const;
  Box inflated(double r) const;
  Eigen::VectorXd center() const { return 0.5 * (lo + hi); }
};

}  // namespace tflat
