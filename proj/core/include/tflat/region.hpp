#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tflat/geometry.hpp"
#include "tflat/lattice.hpp"

namespace tflat {

/// 0/1 cell indicator on the grid of cells [h*(origin+i), h*(origin+i+1)),
/// axis 0 varying fastest in `values`.
class GridIndicator {
 public:
  GridIndicator(double h, std::vector<long> origin, std::vector<long> count);

  /// Aligned grid covering `box` (snapped outward to multiples of h).
  static GridIndicator covering(const Box& box, double h);

  int dim() const { return static_cast<int>(origin_.size()); }
  double h() const { return h_; }
  const std::vector<long>& origin() const { return origin_; }
  const std::vector<long>& count() const { return count_; }
  std::size_t size() const { return values_.size(); }
  Box box() const;

  std::uint8_t& operator[](std::size_t flat) { return values_[flat]; }
  std::uint8_t operator[](std::size_t flat) const { return values_[flat]; }
  const std::vector<std::uint8_t>& values() const { return values_; }

  std::vector<long> unflatten(std::size_t flat) const;
  Eigen::VectorXd cell_center(std::size_t flat) const;
  Eigen::VectorXd cell_lo(std::size_t flat) const;
  /// Value of the cell containing p (0 outside the grid).
  bool at(const Eigen::VectorXd& p) const;

  std::size_t ones() const;
  double measure() const;

 private:
  double h_;
  std::vector<long> origin_;
  std::vector<long> count_;
  std::vector<std::uint8_t> values_;
};

/// Finite union of pairwise essentially disjoint half-open parallelepipeds,
/// optionally paired with (or replaced by) a grid indicator.
class Region {
 public:
  Region(int dim, std::vector<Parallelepiped> pieces, std::optional<GridIndicator> grid = std::nullopt);

  static Region from_grid(GridIndicator grid);
  static Region single(const Parallelepiped& p) { return Region(p.dim(), {p}); }
  /// Axis box [lo, hi) with exact data when the bounds are given as rationals.
  static Region box(const RationalVector& lo, const RationalVector& hi);
  static Region box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

  int dim() const { return dim_; }
  const std::vector<Parallelepiped>& pieces() const { return pieces_; }
  const std::optional<GridIndicator>& grid() const { return grid_; }
  bool has_pieces() const { return !pieces_.empty(); }
  bool is_exact() const;

  double measure() const;
  std::optional<Rational> exact_measure() const;

  bool contains(const Eigen::VectorXd& p) const;
  /// Distance to the closure (pieces only).
  double distance(const Eigen::VectorXd& p) const;
  Box bounding_box() const;
  double diameter() const;
  Eigen::VectorXd centroid() const;
  std::optional<RationalVector> exact_centroid() const;

  Region translated(const Eigen::VectorXd& v) const;
  Region translated(const RationalVector& v) const;

  /// Cell-centred sampling of the pieces on the aligned grid of step h.
  GridIndicator rasterize(double h, double pad = 0.0) const;

 private:
  void certify_disjoint() const;

  int dim_;
  std::vector<Parallelepiped> pieces_;
  std::optional<GridIndicator> grid_;
};

enum class CoverMode { exact, floating };

struct CoverReport {
  enum class Verdict { tiling, packing, k_fold_tiling, neither };

  double min_cover = 0;
  double max_cover = 0;
  /// Raw sample extremes in float mode (equal to min/max in exact mode).
  double raw_min_cover = 0;
  double raw_max_cover = 0;
  /// Measure of {x in cell : cover(x) != k*}, weighted by |cover - k*|.
  double defect_measure = 0;
  std::optional<Rational> exact_defect;
  Verdict verdict = Verdict::neither;
  int k = 0;
  CoverMode mode = CoverMode::floating;
  /// Set when exact mode was requested but the inputs were not exact.
  bool fell_back = false;
  std::string warning;
  double h = 0;
  double tol = 0;
  std::size_t samples = 0;
  /// Cover value -> measure inside one lattice cell.
  std::map<int, double> histogram;

  std::string verdict_name() const;
};

/// Evaluates sum_k chi_Omega(x - M k) over one cell M[0,1)^d. Exact mode
/// (d <= 2, rational pieces and lattice) computes exact overlap measures;
/// float mode samples cell centres at step <= h and ignores cover values
/// occupying at most tol * vol(cell).
CoverReport cover_classify(const Region& omega, const GeneratorMatrix& m, double h, double tol,
                           CoverMode mode = CoverMode::exact);

/// Default step: 1/256 of the lattice cell diameter.
double default_step(const GeneratorMatrix& m);

struct FourierCheck {
  double max_residual = 0;
  Eigen::VectorXd argmax;
  std::size_t evaluated = 0;
};

/// Closed-form Fourier transform of chi_Omega at xi.
std::complex<double> indicator_transform(const Region& omega, const Eigen::VectorXd& xi);

/// max |chi_Omega^(xi)| over xi in M^{-T}([-K,K]^d cap Z^d) minus the origin.
FourierCheck fourier_tiling_check(const Region& omega, const GeneratorMatrix& m, int K);

/// Grid indicator of the Euclidean eps-neighbourhood; always a superset of Omega.
Region thicken(const Region& omega, double eps, double h);

/// center + gamma (Omega - center). Requires center in the closure of Omega.
Region star_dilate(const Region& omega, const Eigen::VectorXd& center, double gamma);
Region star_dilate(const Region& omega, const RationalVector& center, const Rational& gamma);

enum class FdVariant { upper, lower };

struct CommonDomain {
  Region omega;
  std::vector<GeneratorMatrix> lattices;
};

/// The convex common fundamental domain of Z^2, diag(q, 1/q) Z^2 and a
/// triangular lattice, q = m/n (upper) or n/m (lower).
CommonDomain common_fd_rational(int m, int n, FdVariant variant);

struct ScaledDomain {
  Region omega;
  double eps = 0;
  double gamma = 0;
  double h = 0;
  int iterations = 0;
  CoverReport certificate_a;
  CoverReport certificate_b;
};

/// Shrinks a common fundamental domain of s*A and B (s = |det B/det A|^{1/d})
/// about `center` to a fundamental domain of A, then bisects the largest eps
/// whose grid thickening stays inside the original domain.
ScaledDomain scaled_common_domain(const GeneratorMatrix& a, const GeneratorMatrix& b, const Region& omega_prime,
                                  const Eigen::VectorXd& center, double h, int iterations = 12);

}  // namespace tflat
