#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "tflat/box.hpp"
#include "tflat/matrix.hpp"

namespace tflat {

/// Half-open parallelepiped offset + matrix * [0,1)^d.
class Parallelepiped {
 public:
  Parallelepiped(const Eigen::VectorXd& offset, const Eigen::MatrixXd& matrix);
  Parallelepiped(const RationalVector& offset, const RationalMatrix& matrix);

  int dim() const { return static_cast<int>(offset_.size()); }
  const Eigen::VectorXd& offset() const { return offset_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  const std::optional<RationalVector>& exact_offset() const { return offset_q_; }
  const std::optional<RationalMatrix>& exact_matrix() const { return matrix_q_; }
  bool is_exact() const { return offset_q_.has_value() && matrix_q_.has_value(); }

  double measure() const;
  std::optional<Rational> exact_measure() const;

  /// Half-open membership; local coordinates within 1e-12 of an integer are snapped first.
  bool contains(const Eigen::VectorXd& p) const;
  /// Closed membership with slack in local coordinates.
  bool contains_closed(const Eigen::VectorXd& p, double slack = 1e-12) const;
  /// Local coordinates matrix^{-1}(p - offset).
  Eigen::VectorXd local(const Eigen::VectorXd& p) const;

  /// Euclidean distance from p to the closed parallelepiped.
  double distance(const Eigen::VectorXd& p) const;

  std::vector<Eigen::VectorXd> vertices() const;
  Box bounding_box() const;
  Eigen::VectorXd centroid() const { return offset_ + 0.5 * matrix_.rowwise().sum(); }

  Parallelepiped translated(const Eigen::VectorXd& v) const;
  Parallelepiped translated(const RationalVector& v) const;
  /// center + gamma * (P - center).
  Parallelepiped dilated(const Eigen::VectorXd& center, double gamma) const;
  Parallelepiped dilated(const RationalVector& center, const Rational& gamma) const;
  /// Image under x -> L x.
  Parallelepiped transformed(const Eigen::MatrixXd& l) const;

 private:
  Eigen::VectorXd offset_;
  Eigen::MatrixXd matrix_;
  Eigen::MatrixXd inverse_;
  std::optional<RationalVector> offset_q_;
  std::optional<RationalMatrix> matrix_q_;
};

/// Area of the intersection of two convex polygons (float, d = 2 helper).
double convex_overlap_area(const std::vector<Eigen::Vector2d>& p, const std::vector<Eigen::Vector2d>& q);

/// Counter-clockwise vertex list of a 2-d parallelepiped.
std::vector<Eigen::Vector2d> polygon(const Parallelepiped& p);

}  // namespace tflat
