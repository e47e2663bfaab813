#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "tflat/box.hpp"
#include "tflat/mollifier.hpp"
#include "tflat/region.hpp"

namespace tflat {

using Complex = std::complex<double>;

/// How a sampled window is evaluated between its samples.
enum class Interpolation {
  cell,    // piecewise constant on the cells; exact for grid-aligned indicators
  linear,  // multilinear through the cell centres
  cubic,   // Catmull-Rom through the cell centres
};

/// Samples at the cell centres lo + (i + 1/2) h of the box [lo, lo + count h],
/// axis 0 varying fastest. Zero outside the box.
class SampledWindow {
 public:
  SampledWindow(Eigen::VectorXd lo, double h, std::vector<long> count, Interpolation interp);

  int dim() const { return static_cast<int>(lo_.size()); }
  double h() const { return h_; }
  const Eigen::VectorXd& lo() const { return lo_; }
  const std::vector<long>& count() const { return count_; }
  std::size_t size() const { return values_.size(); }
  Box box() const;

  Interpolation interpolation() const { return interp_; }
  void set_interpolation(Interpolation i) { interp_ = i; }

  Complex& operator[](std::size_t flat) { return values_[flat]; }
  const Complex& operator[](std::size_t flat) const { return values_[flat]; }
  std::vector<Complex>& values() { return values_; }
  const std::vector<Complex>& values() const { return values_; }

  std::size_t flat(const std::vector<long>& index) const;
  std::vector<long> unflatten(std::size_t flat) const;
  Eigen::VectorXd node(std::size_t flat) const;

  Complex operator()(const Eigen::VectorXd& p) const { return eval(p.data()); }
  /// Same as operator() on a raw point of dim() coordinates.
  Complex eval(const double* p) const;

  bool is_real() const;
  /// Riemann sum of |g|^2 over the cells.
  double norm2() const;
  /// Smallest box of whole cells holding every nonzero sample (an empty box when g = 0).
  Box support_box() const;
  /// True when the two outermost cell layers vanish, so interpolation cannot leak past the box.
  bool support_certified() const;

  SampledWindow scaled(Complex s) const;

  /// Construction recipe, echoed into reports.
  nlohmann::ordered_json meta;

 private:
  Complex eval_cell(const double* p) const;
  Complex eval_taps(const double* p, int order) const;

  Eigen::VectorXd lo_;
  double h_;
  std::vector<long> count_;
  std::vector<long> stride_;
  Interpolation interp_;
  std::vector<Complex> values_;
};

/// Empty grid covering `box` snapped outward to multiples of h, padded by `pad` cells per side.
SampledWindow window_grid(const Box& box, double h, int pad, Interpolation interp);

/// g = sqrt(chi_Omega * phi_eps) on the grid of step h.
SampledWindow smooth_window(const Region& omega, double eps, double h);
SampledWindow smooth_window(const Region& omega, const Mollifier& phi);

/// chi_Omega at the cell centres, evaluated cell-wise.
SampledWindow indicator_window(const Region& omega, double h);

/// (g1 (x) g2)(x, y) = g1(x) g2(y) for one-dimensional windows of equal step.
SampledWindow tensor_window(const SampledWindow& g1, const SampledWindow& g2);

/// Smooth g with chi_inner <= g <= chi_outer: the smooth window of inner enlarged by half the
/// smaller margin, mollified at that same radius.
SampledWindow plateau_window_1d(std::pair<double, double> inner, std::pair<double, double> outer, double h);

/// exp(-1 / (1 - |t - center|^2 / radius^2)) inside the ball, cubic interpolation.
SampledWindow bump_window(const Eigen::VectorXd& center, double radius, double h);

/// Largest forward-difference gradient norm over the samples.
double max_gradient(const SampledWindow& g);

}  // namespace tflat
