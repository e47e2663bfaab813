#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace tflat {

/// Radial profile on the unit ball, evaluated at |x| in [0, 1); must vanish for r >= 1.
using RadialProfile = std::function<double(double)>;

/// exp(-1 / (1 - r^2)) on r < 1, zero elsewhere.
double standard_bump(double r);

/// phi_eps(x) = c_d eps^{-d} profile(|x| / eps), normalized so its integral is 1.
class Mollifier {
 public:
  Mollifier(int dim, double eps, double h, RadialProfile profile = standard_bump);

  int dim() const { return dim_; }
  double eps() const { return eps_; }
  double h() const { return h_; }
  /// c_d, computed by quadrature of the continuous profile.
  double normalization() const { return c_; }

  double operator()(const Eigen::VectorXd& x) const { return radial(x.norm()); }
  double radial(double r) const;

  /// Riemann sum of phi_eps over the grid hZ^d (continuous normalization).
  double riemann_integral() const { return riemann_; }
  /// Integral of |x| phi_eps(x).
  double first_moment() const;

  /// Grid offsets z in hZ^d with |z| < eps and weights phi_eps(z) h^d rescaled to sum to 1.
  const std::vector<Eigen::VectorXd>& stencil_offsets() const { return offsets_; }
  const std::vector<double>& stencil_weights() const { return weights_; }

  /// d = 1: integral of phi_eps over (-inf, t].
  double cdf_1d(double t) const;
  /// d = 2: integral over [0, rho] of phi_eps(r) r dr; tends to 1/(2 pi).
  double radial_mass_2d(double rho) const;

 private:
  /// Integral over [0, s] of profile(r) r^{d-1} dr, s in [0, 1], by cubic Hermite on a table.
  double unit_mass(double s) const;
  /// Integral over [s, 1] of the same weight, exact to roundoff.
  double unit_tail(double s) const;

  int dim_;
  double eps_;
  double h_;
  RadialProfile profile_;
  double c_ = 0;
  double riemann_ = 0;
  std::vector<double> mass_;   // unit_mass at k / N
  std::vector<double> slope_;  // profile(s) s^{d-1} at k / N
  std::vector<double> tail_;   // integral over [k / N, 1]
  std::vector<Eigen::VectorXd> offsets_;
  std::vector<double> weights_;
};

/// Throws ResolutionError unless eps > 2h.
Mollifier mollifier(int dim, double eps, double h, RadialProfile profile = standard_bump);

}  // namespace tflat
