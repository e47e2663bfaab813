#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string_view>
#include <vector>

#include "tflat/box.hpp"
#include "tflat/matrix.hpp"

namespace tflat {

/// Full-rank square generator M of the lattice M Z^d. Keeps a float view
/// always and an exact rational view when the input was rational.
class GeneratorMatrix {
 public:
  explicit GeneratorMatrix(const Eigen::MatrixXd& m);
  explicit GeneratorMatrix(const RationalMatrix& q);
  /// Both views; they must agree entrywise to 1e-12.
  GeneratorMatrix(const Eigen::MatrixXd& m, const RationalMatrix& q);

  static GeneratorMatrix parse(std::string_view text);
  static GeneratorMatrix from_parsed(const ParsedMatrix& p);
  static GeneratorMatrix identity(int d);
  static GeneratorMatrix diagonal(const RationalVector& diag);

  int dim() const { return static_cast<int>(real_.rows()); }
  const Eigen::MatrixXd& real() const { return real_; }
  const std::optional<RationalMatrix>& exact() const { return exact_; }
  bool is_exact() const { return exact_.has_value(); }

  double det() const;
  std::optional<Rational> exact_det() const;

  GeneratorMatrix inverse() const;
  GeneratorMatrix transpose() const;
  GeneratorMatrix inverse_transpose() const;
  GeneratorMatrix operator*(const GeneratorMatrix& rhs) const;
  GeneratorMatrix scaled(double s) const;
  GeneratorMatrix scaled(const Rational& s) const;

  /// Float-only copy (drops the exact view).
  GeneratorMatrix as_float() const { return GeneratorMatrix(real_); }

 private:
  void validate() const;

  Eigen::MatrixXd real_;
  std::optional<RationalMatrix> exact_;
};

/// A Z^d x B Z^d in R^{2d}.
class SeparableTFLattice {
 public:
  SeparableTFLattice(GeneratorMatrix a, GeneratorMatrix b);

  int dim() const { return a_.dim(); }
  const GeneratorMatrix& A() const { return a_; }
  const GeneratorMatrix& B() const { return b_; }

 private:
  GeneratorMatrix a_;
  GeneratorMatrix b_;
};

double density(const GeneratorMatrix& m);
double density(const SeparableTFLattice& l);
std::optional<Rational> exact_density(const GeneratorMatrix& m);
std::optional<Rational> exact_density(const SeparableTFLattice& l);

/// M^{-T}.
GeneratorMatrix dual(const GeneratorMatrix& m);

/// (B^{-T}, A^{-T}).
SeparableTFLattice adjoint_separable(const SeparableTFLattice& l);

/// M^T J M == J with J = [[0, I], [-I, 0]].
bool is_symplectic(const Eigen::MatrixXd& m, double tol = 1e-10);
bool is_symplectic(const RationalMatrix& m);

/// The standard symplectic form J of size 2d.
Eigen::MatrixXd symplectic_form(int d);

struct LatticePoint {
  std::vector<long> k;
  Eigen::VectorXd x;
};

/// Every point M k inside the box, ordered lexicographically by k. With an
/// exact generator, membership is decided in exact arithmetic against the
/// binary values of the box bounds. Throws ResourceError when the expected
/// point count exceeds limits().max_lattice_points.
std::vector<LatticePoint> enumerate_points(const GeneratorMatrix& m, const Box& box);

/// Integer range of k in M^{-1}(box), per axis (inclusive).
std::vector<std::pair<long, long>> coefficient_range(const Eigen::MatrixXd& m, const Box& box);

/// Column-style Hermite normal form of a nonsingular integer matrix:
/// lower triangular, positive diagonal, 0 <= h_ij < h_ii for j < i.
RationalMatrix hermite_normal_form(const RationalMatrix& integer_matrix);

/// Canonical generator of the lattice: HNF(D M) / D for the common denominator D.
RationalMatrix canonical_basis(const RationalMatrix& m);

struct LatticeEquality {
  bool equal = false;
  /// True when a float-only generator had to be rationalized first.
  bool approximate = false;
};

LatticeEquality same_lattice(const GeneratorMatrix& a, const GeneratorMatrix& b);

}  // namespace tflat
