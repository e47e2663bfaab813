#include "tflat/window.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tflat/config.hpp"
#include "tflat/error.hpp"

namespace tflat {

SampledWindow::SampledWindow(Eigen::VectorXd lo, double h, std::vector<long> count, Interpolation interp)
    : lo_(std::move(lo)), h_(h), count_(std::move(count)), interp_(interp) {
  if (!(h_ > 0)) throw ConstructionError("window grid step must be positive");
  if (static_cast<long>(count_.size()) != lo_.size()) throw ConstructionError("window origin and counts disagree");
  double cells = 1;
  for (long c : count_) {
    if (c <= 0) throw ConstructionError("window grid must have at least one cell per axis");
    cells *= static_cast<double>(c);
  }
  if (cells > static_cast<double>(limits().max_grid_cells)) throw ResourceError("window grid exceeds the grid cap");
  stride_.resize(count_.size());
  long s = 1;
  for (std::size_t a = 0; a < count_.size(); ++a) {
    stride_[a] = s;
    s *= count_[a];
  }
  values_.assign(static_cast<std::size_t>(s), Complex(0, 0));
}

Box SampledWindow::box() const {
  Box b{lo_, lo_, false};
  for (int a = 0; a < dim(); ++a) b.hi(a) = lo_(a) + h_ * static_cast<double>(count_[static_cast<std::size_t>(a)]);
  return b;
}

std::size_t SampledWindow::flat(const std::vector<long>& index) const {
  long f = 0;
  for (std::size_t a = 0; a < count_.size(); ++a) f += index[a] * stride_[a];
  return static_cast<std::size_t>(f);
}

std::vector<long> SampledWindow::unflatten(std::size_t flat) const {
  std::vector<long> idx(count_.size());
  auto rest = static_cast<long>(flat);
  for (std::size_t a = 0; a < count_.size(); ++a) {
    idx[a] = rest % count_[a];
    rest /= count_[a];
  }
  return idx;
}

Eigen::VectorXd SampledWindow::node(std::size_t flat) const {
  const auto idx = unflatten(flat);
  Eigen::VectorXd p(dim());
  for (int a = 0; a < dim(); ++a) p(a) = lo_(a) + (static_cast<double>(idx[static_cast<std::size_t>(a)]) + 0.5) * h_;
  return p;
}

Complex SampledWindow::eval_cell(const double* p) const {
  long f = 0;
  for (int a = 0; a < dim(); ++a) {
    const double u = (p[a] - lo_(a)) / h_;
    if (!(u >= 0)) return {};
    const auto i = static_cast<long>(std::floor(u));
    if (i >= count_[static_cast<std::size_t>(a)]) return {};
    f += i * stride_[static_cast<std::size_t>(a)];
  }
  return values_[static_cast<std::size_t>(f)];
}

Complex SampledWindow::eval_taps(const double* p, int order) const {
  const int d = dim();
  // per-axis tap indices and weights
  long first[8];
  double w[8][4];
  for (int a = 0; a < d; ++a) {
    const double u = (p[a] - lo_(a)) / h_ - 0.5;
    const auto n = static_cast<double>(count_[static_cast<std::size_t>(a)]);
    if (!(u > -2.0) || !(u < n + 1.0)) return {};
    const double i0 = std::floor(u);
    const double t = u - i0;
    if (order == 2) {
      first[a] = static_cast<long>(i0);
      w[a][0] = 1 - t;
      w[a][1] = t;
    } else {
      const double t2 = t * t, t3 = t2 * t;
      first[a] = static_cast<long>(i0) - 1;
      w[a][0] = 0.5 * (-t3 + 2 * t2 - t);
      w[a][1] = 0.5 * (3 * t3 - 5 * t2 + 2);
      w[a][2] = 0.5 * (-3 * t3 + 4 * t2 + t);
      w[a][3] = 0.5 * (t3 - t2);
    }
  }
  if (d == 1) {
    Complex s = 0;
    for (int i = 0; i < order; ++i) {
      const long k = first[0] + i;
      if (k >= 0 && k < count_[0]) s += w[0][i] * values_[static_cast<std::size_t>(k)];
    }
    return s;
  }
  if (d == 2) {
    Complex s = 0;
    for (int j = 0; j < order; ++j) {
      const long kj = first[1] + j;
      if (kj < 0 || kj >= count_[1]) continue;
      Complex row = 0;
      for (int i = 0; i < order; ++i) {
        const long ki = first[0] + i;
        if (ki >= 0 && ki < count_[0]) row += w[0][i] * values_[static_cast<std::size_t>(ki + kj * stride_[1])];
      }
      s += w[1][j] * row;
    }
    return s;
  }
  if (d > 8) throw UnsupportedError("interpolation supports at most 8 dimensions");
  Complex s = 0;
  std::vector<int> t(static_cast<std::size_t>(d), 0);
  while (true) {
    double weight = 1;
    long f = 0;
    bool inside = true;
    for (int a = 0; a < d && inside; ++a) {
      const long k = first[a] + t[static_cast<std::size_t>(a)];
      inside = k >= 0 && k < count_[static_cast<std::size_t>(a)];
      weight *= w[a][t[static_cast<std::size_t>(a)]];
      f += k * stride_[static_cast<std::size_t>(a)];
    }
    if (inside) s += weight * values_[static_cast<std::size_t>(f)];
    int a = 0;
    while (a < d) {
      if (++t[static_cast<std::size_t>(a)] < order) break;
      t[static_cast<std::size_t>(a)] = 0;
      ++a;
    }
    if (a == d) break;
  }
  return s;
}

Complex SampledWindow::eval(const double* p) const {
  switch (interp_) {
    case Interpolation::cell:
      return eval_cell(p);
    case Interpolation::linear:
      return eval_taps(p, 2);
    case Interpolation::cubic:
      return eval_taps(p, 4);
  }
  return {};
}

bool SampledWindow::is_real() const {
  return std::all_of(values_.begin(), values_.end(), [](const Complex& v) { return v.imag() == 0.0; });
}

double SampledWindow::norm2() const {
  double s = 0;
  for (const auto& v : values_) s += std::norm(v);
  return s * std::pow(h_, dim());
}

Box SampledWindow::support_box() const {
  const int d = dim();
  std::vector<long> lo(static_cast<std::size_t>(d), -1), hi(static_cast<std::size_t>(d), -1);
  for (std::size_t f = 0; f < values_.size(); ++f) {
    if (values_[f] == Complex(0, 0)) continue;
    const auto idx = unflatten(f);
    for (std::size_t a = 0; a < idx.size(); ++a) {
      if (lo[a] < 0 || idx[a] < lo[a]) lo[a] = idx[a];
      if (idx[a] > hi[a]) hi[a] = idx[a];
    }
  }
  Box b{lo_, lo_, false};
  if (lo[0] < 0) return b;
  for (int a = 0; a < d; ++a) {
    b.lo(a) = lo_(a) + h_ * static_cast<double>(lo[static_cast<std::size_t>(a)]);
    b.hi(a) = lo_(a) + h_ * static_cast<double>(hi[static_cast<std::size_t>(a)] + 1);
  }
  return b;
}

bool SampledWindow::support_certified() const {
  for (std::size_t f = 0; f < values_.size(); ++f) {
    if (values_[f] == Complex(0, 0)) continue;
    const auto idx = unflatten(f);
    for (std::size_t a = 0; a < idx.size(); ++a)
      if (idx[a] < 2 || idx[a] >= count_[a] - 2) return false;
  }
  return true;
}

SampledWindow SampledWindow::scaled(Complex s) const {
  SampledWindow out = *this;
  for (auto& v : out.values_) v *= s;
  return out;
}

SampledWindow window_grid(const Box& box, double h, int pad, Interpolation interp) {
  const int d = box.dim();
  Eigen::VectorXd lo(d);
  std::vector<long> count(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) {
    const double first = std::floor(box.lo(a) / h + 1e-9) - pad;
    const double last = std::ceil(box.hi(a) / h - 1e-9) + pad;
    lo(a) = first * h;
    count[static_cast<std::size_t>(a)] = static_cast<long>(last - first);
  }
  return SampledWindow(lo, h, count, interp);
}

namespace {

using Gauss = boost::math::quadrature::gauss<double, 20>;

// Integral of phi_eps over {y : p + y in [a, b)} for an interval piece.
double interval_mass(const Mollifier& phi, double a, double b, double p) {
  return phi.cdf_1d(p - a) - phi.cdf_1d(p - b);
}

// Flux of z Phi(|z|)/|z|^2 through the edge a -> b (both relative to the evaluation point),
// where Phi is the radial mass of phi. Summed over a counter-clockwise boundary this is the
// integral of phi over the enclosed polygon.
double edge_flux(const Mollifier& phi, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d d = b - a;
  const double len = d.norm();
  if (len == 0) return 0.0;
  const Eigen::Vector2d t = d / len;
  const Eigen::Vector2d n(t.y(), -t.x());
  const double p = a.dot(n);
  if (std::fabs(p) < 1e-300) return 0.0;
  const double s1 = a.dot(t), s2 = b.dot(t);
  const double eps = phi.eps();
  const double full = 1.0 / (2.0 * std::numbers::pi);
  const auto arc = [p](double lo, double hi) { return std::atan(hi / p) - std::atan(lo / p); };
  if (std::fabs(p) >= eps) return full * arc(s1, s2);

  const double se = std::sqrt(eps * eps - p * p);
  double out = 0;
  if (s1 < -se) out += full * arc(s1, std::min(s2, -se));
  if (s2 > se) out += full * arc(std::max(s1, se), s2);
  const double lo = std::max(s1, -se), hi = std::min(s2, se);
  if (lo >= hi) return out;

  const double centre = 0.5 * phi.radial(0.0);
  const auto integrand = [&](double s) {
    const double r2 = p * p + s * s;
    if (r2 < 1e-24 * eps * eps) return p * centre;
    return p * phi.radial_mass_2d(std::sqrt(r2)) / r2;
  };
  // panels split at s = 0 where the integrand peaks
  double breaks[8];
  int nb = 0;
  breaks[nb++] = lo;
  if (lo < 0 && hi > 0) breaks[nb++] = 0.0;
  breaks[nb++] = hi;
  for (int k = 0; k + 1 < nb; ++k) {
    const double a0 = breaks[k], a1 = breaks[k + 1];
    constexpr int kPanels = 3;
    for (int j = 0; j < kPanels; ++j)
      out += Gauss::integrate(integrand, a0 + (a1 - a0) * j / kPanels, a0 + (a1 - a0) * (j + 1) / kPanels);
  }
  return out;
}

double polygon_mass(const Mollifier& phi, const std::vector<Eigen::Vector2d>& poly, const Eigen::Vector2d& p) {
  const double eps = phi.eps();
  const std::size_t n = poly.size();
  bool deep = true, inside = true;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d a = poly[i] - p;
    const Eigen::Vector2d b = poly[(i + 1) % n] - p;
    const Eigen::Vector2d d = (b - a).normalized();
    const double dist = a.dot(Eigen::Vector2d(d.y(), -d.x()));
    // beyond a supporting line by eps: the ball misses the convex piece
    if (dist <= -eps) return 0.0;
    if (dist < eps) deep = false;
    if (dist < 0) inside = false;
  }
  if (deep) return 1.0;
  // corner regions: the supporting lines are all within eps but the ball can still miss
  double gap = 1e300;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d a = poly[i] - p;
    const Eigen::Vector2d e = poly[(i + 1) % n] - poly[i];
    const double t = std::clamp(-a.dot(e) / e.squaredNorm(), 0.0, 1.0);
    gap = std::min(gap, (a + t * e).norm());
  }
  if (!inside && gap >= eps) return 0.0;
  double s = 0;
  for (std::size_t i = 0; i < n; ++i) s += edge_flux(phi, poly[i] - p, poly[(i + 1) % n] - p);
  return s;
}

void finish(SampledWindow& g, const std::vector<double>& u) {
  for (std::size_t f = 0; f < u.size(); ++f) {
    // roundoff can push the convolution a hair outside [0, 1]
    const double v = std::clamp(u[f], 0.0, 1.0);
    g[f] = Complex(std::sqrt(v), 0.0);
  }
}

}  // namespace

SampledWindow smooth_window(const Region& omega, double eps, double h) {
  return smooth_window(omega, mollifier(omega.dim(), eps, h));
}

SampledWindow smooth_window(const Region& omega, const Mollifier& phi) {
  const int d = omega.dim();
  if (phi.dim() != d) throw PreconditionError("mollifier and region dimensions differ");
  const double eps = phi.eps(), h = phi.h();
  SampledWindow g = window_grid(omega.bounding_box().inflated(eps), h, 2, Interpolation::cubic);
  std::vector<double> u(g.size(), 0.0);

  if (d == 1 && omega.has_pieces()) {
    std::vector<std::pair<double, double>> intervals;
    for (const auto& piece : omega.pieces()) {
      const double a = piece.offset()(0), m = piece.matrix()(0, 0);
      intervals.emplace_back(std::min(a, a + m), std::max(a, a + m));
    }
    for (std::size_t f = 0; f < g.size(); ++f) {
      const double p = g.node(f)(0);
      for (const auto& [a, b] : intervals) u[f] += interval_mass(phi, a, b, p);
    }
  } else if (d == 2 && omega.has_pieces()) {
    struct Piece {
      std::vector<Eigen::Vector2d> poly;
      Box reach;
    };
    std::vector<Piece> pieces;
    for (const auto& piece : omega.pieces()) pieces.push_back({polygon(piece), piece.bounding_box().inflated(eps)});
    for (std::size_t f = 0; f < g.size(); ++f) {
      const Eigen::VectorXd p = g.node(f);
      for (const auto& piece : pieces)
        if (piece.reach.contains(p)) u[f] += polygon_mass(phi, piece.poly, Eigen::Vector2d(p(0), p(1)));
    }
  } else {
    // grid-only regions and d >= 3: sum over the normalized stencil
    const auto& z = phi.stencil_offsets();
    const auto& w = phi.stencil_weights();
    for (std::size_t f = 0; f < g.size(); ++f) {
      const Eigen::VectorXd p = g.node(f);
      double s = 0;
      for (std::size_t j = 0; j < z.size(); ++j)
        if (omega.contains(p - z[j])) s += w[j];
      u[f] = s;
    }
  }
  finish(g, u);
  g.meta = {{"recipe", "smooth"}, {"eps", eps}, {"h", h}, {"measure", omega.measure()}};
  return g;
}

SampledWindow indicator_window(const Region& omega, double h) {
  SampledWindow g = window_grid(omega.bounding_box(), h, 2, Interpolation::cell);
  for (std::size_t f = 0; f < g.size(); ++f)
    if (omega.contains(g.node(f))) g[f] = 1.0;
  g.meta = {{"recipe", "indicator"}, {"h", h}, {"measure", omega.measure()}};
  return g;
}

SampledWindow tensor_window(const SampledWindow& g1, const SampledWindow& g2) {
  if (g1.dim() != 1 || g2.dim() != 1) throw PreconditionError("tensor_window takes two one-dimensional windows");
  if (std::fabs(g1.h() - g2.h()) > 1e-12 * g1.h()) throw PreconditionError("tensor factors need equal grid steps");
  Interpolation interp = Interpolation::cell;
  for (auto i : {g1.interpolation(), g2.interpolation()})
    if (static_cast<int>(i) > static_cast<int>(interp)) interp = i;
  SampledWindow g(Eigen::Vector2d(g1.lo()(0), g2.lo()(0)), g1.h(), {g1.count()[0], g2.count()[0]}, interp);
  for (long j = 0; j < g2.count()[0]; ++j)
    for (long i = 0; i < g1.count()[0]; ++i)
      g[static_cast<std::size_t>(i + j * g1.count()[0])] = g1[static_cast<std::size_t>(i)] * g2[static_cast<std::size_t>(j)];
  g.meta = {{"recipe", "tensor"}, {"factors", {g1.meta, g2.meta}}};
  return g;
}

SampledWindow plateau_window_1d(std::pair<double, double> inner, std::pair<double, double> outer, double h) {
  const auto [a, b] = inner;
  const auto [c, d] = outer;
  if (!(a <= b) || !(c <= a) || !(b <= d)) throw PreconditionError("plateau needs inner inside outer");
  const double delta = 0.5 * std::min(a - c, d - b);
  if (!(delta > 2 * h)) throw ResolutionError("plateau margin is not resolved by the grid");
  const Region enlarged = Region::box(Eigen::VectorXd::Constant(1, a - delta), Eigen::VectorXd::Constant(1, b + delta));
  SampledWindow g = smooth_window(enlarged, delta, h);
  g.meta = {{"recipe", "plateau"}, {"inner", {a, b}}, {"outer", {c, d}}, {"eps", delta}, {"h", h}};
  return g;
}

SampledWindow bump_window(const Eigen::VectorXd& center, double radius, double h) {
  if (!(radius > 0)) throw PreconditionError("bump radius must be positive");
  const int d = static_cast<int>(center.size());
  const Box box{center.array() - radius, center.array() + radius, false};
  SampledWindow g = window_grid(box, h, 2, Interpolation::cubic);
  for (std::size_t f = 0; f < g.size(); ++f) g[f] = standard_bump((g.node(f) - center).norm() / radius);
  g.meta = {{"recipe", "bump"},
            {"center", std::vector<double>(center.data(), center.data() + d)},
            {"radius", radius},
            {"h", h}};
  return g;
}

double max_gradient(const SampledWindow& g) {
  double best = 0;
  const int d = g.dim();
  for (std::size_t f = 0; f < g.size(); ++f) {
    const auto idx = g.unflatten(f);
    double sq = 0;
    for (int a = 0; a < d; ++a) {
      auto next = idx;
      if (++next[static_cast<std::size_t>(a)] >= g.count()[static_cast<std::size_t>(a)]) continue;
      sq += std::norm((g[g.flat(next)] - g[f]) / g.h());
    }
    best = std::max(best, std::sqrt(sq));
  }
  return best;
}

}  // namespace tflat
