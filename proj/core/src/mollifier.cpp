#include "tflat/mollifier.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <numbers>

#include "tflat/config.hpp"
#include "tflat/error.hpp"

namespace tflat {

namespace {

constexpr int kTable = 4096;

using Gauss = boost::math::quadrature::gauss<double, 20>;

double sphere_area(int d) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

}  // namespace

double standard_bump(double r) {
  if (r < 0) r = -r;
  if (r >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - r * r));
}

Mollifier::Mollifier(int dim, double eps, double h, RadialProfile profile)
    : dim_(dim), eps_(eps), h_(h), profile_(std::move(profile)) {
  if (dim < 1) throw ConstructionError("mollifier dimension must be positive");
  if (!(h > 0)) throw ConstructionError("grid step must be positive");
  if (!(eps > 2 * h)) throw ResolutionError("mollifier radius must exceed two grid steps");

  const auto weight = [this](double s) { return profile_(s) * std::pow(s, dim_ - 1); };
  mass_.resize(kTable + 1);
  slope_.resize(kTable + 1);
  std::vector<double> piece(kTable);
  for (int k = 0; k < kTable; ++k)
    piece[k] = Gauss::integrate(weight, static_cast<double>(k) / kTable, static_cast<double>(k + 1) / kTable);
  mass_[0] = 0;
  slope_[0] = weight(0.0);
  for (int k = 1; k <= kTable; ++k) {
    mass_[k] = mass_[k - 1] + piece[k - 1];
    slope_[k] = weight(static_cast<double>(k) / kTable);
  }
  c_ = 1.0 / (sphere_area(dim_) * mass_[kTable]);
  // summed from the top so the tail keeps its relative accuracy
  tail_.assign(kTable + 1, 0.0);
  for (int k = kTable - 1; k >= 0; --k) tail_[k] = tail_[k + 1] + piece[k];

  const long reach = static_cast<long>(std::ceil(eps_ / h_));
  const double cells = std::pow(2.0 * static_cast<double>(reach) + 1.0, dim_);
  if (cells > static_cast<double>(limits().max_grid_cells)) throw ResourceError("mollifier stencil exceeds the grid cap");

  std::vector<long> k(static_cast<std::size_t>(dim_), -reach);
  const double cell = std::pow(h_, dim_);
  double total = 0;
  while (true) {
    Eigen::VectorXd z(dim_);
    for (int i = 0; i < dim_; ++i) z(i) = h_ * static_cast<double>(k[static_cast<std::size_t>(i)]);
    const double v = radial(z.norm());
    if (v > 0) {
      offsets_.push_back(z);
      weights_.push_back(v * cell);
      total += v * cell;
    }
    int a = 0;
    while (a < dim_) {
      if (++k[static_cast<std::size_t>(a)] <= reach) break;
      k[static_cast<std::size_t>(a)] = -reach;
      ++a;
    }
    if (a == dim_) break;
  }
  riemann_ = total;
  for (auto& w : weights_) w /= total;
}

double Mollifier::radial(double r) const {
  const double s = std::fabs(r) / eps_;
  if (s >= 1.0) return 0.0;
  return c_ * profile_(s) / std::pow(eps_, dim_);
}

double Mollifier::unit_mass(double s) const {
  if (s <= 0) return 0.0;
  if (s >= 1) return mass_[kTable];
  const double x = s * kTable;
  const int k = std::min(static_cast<int>(x), kTable - 1);
  const double t = x - k;
  const double dx = 1.0 / kTable;
  const double t2 = t * t, t3 = t2 * t;
  // cubic Hermite with exact end slopes
  return (2 * t3 - 3 * t2 + 1) * mass_[k] + (t3 - 2 * t2 + t) * dx * slope_[k] + (-2 * t3 + 3 * t2) * mass_[k + 1] +
         (t3 - t2) * dx * slope_[k + 1];
}

double Mollifier::unit_tail(double s) const {
  if (s <= 0) return mass_[kTable];
  if (s >= 1) return 0.0;
  const auto weight = [this](double r) { return profile_(r) * std::pow(r, dim_ - 1); };
  const int k = std::min(static_cast<int>(s * kTable), kTable - 1);
  return Gauss::integrate(weight, s, static_cast<double>(k + 1) / kTable) + tail_[k + 1];
}

double Mollifier::first_moment() const {
  const auto integrand = [this](double s) { return profile_(s) * std::pow(s, dim_); };
  double m = 0;
  for (int k = 0; k < 64; ++k) m += Gauss::integrate(integrand, k / 64.0, (k + 1) / 64.0);
  return eps_ * c_ * sphere_area(dim_) * m;
}

double Mollifier::cdf_1d(double t) const {
  if (dim_ != 1) throw PreconditionError("cdf_1d needs a one-dimensional mollifier");
  const double s = t / eps_;
  if (s <= -1) return 0.0;
  if (s >= 1) return 1.0;
  const double tail = c_ * unit_tail(std::fabs(s));
  return s < 0 ? tail : 1.0 - tail;
}

double Mollifier::radial_mass_2d(double rho) const {
  if (dim_ != 2) throw PreconditionError("radial_mass_2d needs a two-dimensional mollifier");
  return c_ * unit_mass(rho / eps_);
}

Mollifier mollifier(int dim, double eps, double h, RadialProfile profile) {
  return Mollifier(dim, eps, h, std::move(profile));
}

}  // namespace tflat
