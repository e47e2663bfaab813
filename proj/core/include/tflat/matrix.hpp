#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tflat/rational.hpp"

namespace tflat {

using RationalVector = std::vector<Rational>;

/// Small dense matrix over the rationals. Sizes here are tiny (d <= 4), so
/// everything is plain row-major storage with cubic-time elimination.
class RationalMatrix {
 public:
  RationalMatrix() = default;
  RationalMatrix(int rows, int cols);

  static RationalMatrix identity(int n);
  static RationalMatrix diagonal(const RationalVector& diag);
  static RationalMatrix from_rows(const std::vector<RationalVector>& rows);
  /// Exact binary value of every entry.
  static RationalMatrix from_real(const Eigen::MatrixXd& m);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  Rational& operator()(int r, int c) { return data_[static_cast<std::size_t>(r * cols_ + c)]; }
  const Rational& operator()(int r, int c) const { return data_[static_cast<std::size_t>(r * cols_ + c)]; }

  RationalMatrix transpose() const;
  RationalMatrix operator*(const RationalMatrix& rhs) const;
  RationalMatrix operator+(const RationalMatrix& rhs) const;
  RationalMatrix operator-(const RationalMatrix& rhs) const;
  RationalMatrix scaled(const Rational& s) const;
  RationalVector apply(const RationalVector& v) const;

  Rational determinant() const;
  /// Throws ConstructionError when singular.
  RationalMatrix inverse() const;

  /// Least common multiple of all entry denominators.
  Integer common_denominator() const;

  Eigen::MatrixXd to_real() const;

  bool operator==(const RationalMatrix& rhs) const;
  bool operator!=(const RationalMatrix& rhs) const { return !(*this == rhs); }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Rational> data_;
};

/// A matrix literal: always has a float view, and an exact view when every
/// entry was written as a decimal or fraction.
struct ParsedMatrix {
  Eigen::MatrixXd real;
  std::optional<RationalMatrix> exact;
};

/// Parses row-major literals such as "[[1/3,2],[0,3]]". A bare scalar "0.5"
/// is a 1x1 matrix. Entries may be decimals, fractions p/q or sqrt(<number>);
/// a sqrt entry drops the exact view.
ParsedMatrix parse_matrix(std::string_view text);

std::string format_matrix(const RationalMatrix& m);
std::string format_matrix(const Eigen::MatrixXd& m);

Eigen::VectorXd to_real(const RationalVector& v);

}  // namespace tflat
