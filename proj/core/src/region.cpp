#include "tflat/region.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tflat/config.hpp"
#include "tflat/error.hpp"

namespace tflat {

// ---------------------------------------------------------------------------
// GridIndicator

GridIndicator::GridIndicator(double h, std::vector<long> origin, std::vector<long> count)
    : h_(h), origin_(std::move(origin)), count_(std::move(count)) {
  if (!(h_ > 0) || !std::isfinite(h_)) throw ConstructionError("grid step must be positive");
  if (origin_.size() != count_.size() || origin_.empty()) throw ConstructionError("grid dimension mismatch");
  double total = 1.0;
  for (long c : count_) {
    if (c <= 0) throw ConstructionError("grid needs at least one cell per axis");
    total *= static_cast<double>(c);
  }
  if (total > static_cast<double>(limits().max_grid_cells))
    throw ResourceError("grid of " + std::to_string(static_cast<long long>(total)) + " cells exceeds the cell cap");
  values_.assign(static_cast<std::size_t>(total), 0);
}

GridIndicator GridIndicator::covering(const Box& box, double h) {
  if (!(h > 0)) throw ConstructionError("grid step must be positive");
  if (!box.lo.allFinite() || !box.hi.allFinite()) throw UnsupportedError("cannot grid an unbounded box");
  const int d = box.dim();
  std::vector<long> origin(static_cast<std::size_t>(d)), count(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    const double a = std::floor(box.lo(i) / h + 1e-9);
    const double b = std::ceil(box.hi(i) / h - 1e-9);
    if (std::fabs(a) > 1e15 || std::fabs(b) > 1e15) throw ResourceError("grid index overflow");
    origin[static_cast<std::size_t>(i)] = static_cast<long>(a);
    count[static_cast<std::size_t>(i)] = std::max(1L, static_cast<long>(b - a));
  }
  return GridIndicator(h, origin, count);
}

Box GridIndicator::box() const {
  const int d = dim();
  Box b{Eigen::VectorXd(d), Eigen::VectorXd(d), true};
  for (int i = 0; i < d; ++i) {
    b.lo(i) = h_ * static_cast<double>(origin_[static_cast<std::size_t>(i)]);
    b.hi(i) = h_ * static_cast<double>(origin_[static_cast<std::size_t>(i)] + count_[static_cast<std::size_t>(i)]);
  }
  return b;
}

std::vector<long> GridIndicator::unflatten(std::size_t flat) const {
  std::vector<long> idx(count_.size());
  for (std::size_t a = 0; a < count_.size(); ++a) {
    idx[a] = static_cast<long>(flat % static_cast<std::size_t>(count_[a]));
    flat /= static_cast<std::size_t>(count_[a]);
  }
  return idx;
}

Eigen::VectorXd GridIndicator::cell_lo(std::size_t flat) const {
  const auto idx = unflatten(flat);
  Eigen::VectorXd p(dim());
  for (int a = 0; a < dim(); ++a)
    p(a) = h_ * static_cast<double>(origin_[static_cast<std::size_t>(a)] + idx[static_cast<std::size_t>(a)]);
  return p;
}

Eigen::VectorXd GridIndicator::cell_center(std::size_t flat) const {
  return cell_lo(flat).array() + 0.5 * h_;
}

bool GridIndicator::at(const Eigen::VectorXd& p) const {
  std::size_t flat = 0;
  std::size_t stride = 1;
  for (int a = 0; a < dim(); ++a) {
    const auto ua = static_cast<std::size_t>(a);
    const double cell = std::floor(p(a) / h_) - static_cast<double>(origin_[ua]);
    if (cell < 0 || cell >= static_cast<double>(count_[ua])) return false;
    flat += static_cast<std::size_t>(cell) * stride;
    stride *= static_cast<std::size_t>(count_[ua]);
  }
  return values_[flat] != 0;
}

std::size_t GridIndicator::ones() const {
  return static_cast<std::size_t>(std::count_if(values_.begin(), values_.end(), [](std::uint8_t v) { return v != 0; }));
}

double GridIndicator::measure() const { return static_cast<double>(ones()) * std::pow(h_, dim()); }

// ---------------------------------------------------------------------------
// Region

Region::Region(int dim, std::vector<Parallelepiped> pieces, std::optional<GridIndicator> grid)
    : dim_(dim), pieces_(std::move(pieces)), grid_(std::move(grid)) {
  if (dim_ <= 0) throw ConstructionError("region dimension must be positive");
  if (pieces_.empty() && !grid_) throw ConstructionError("region needs pieces or a grid");
  for (const auto& p : pieces_)
    if (p.dim() != dim_) throw ConstructionError("piece dimension differs from region dimension");
  if (grid_ && grid_->dim() != dim_) throw ConstructionError("grid dimension differs from region dimension");
  if (!(measure() > 0)) throw ConstructionError("region has zero measure");
  certify_disjoint();
}

Region Region::from_grid(GridIndicator grid) {
  const int d = grid.dim();
  return Region(d, {}, std::move(grid));
}

Region Region::box(const RationalVector& lo, const RationalVector& hi) {
  const auto d = lo.size();
  if (hi.size() != d) throw ConstructionError("box bounds differ in dimension");
  RationalVector diag(d);
  for (std::size_t i = 0; i < d; ++i) diag[i] = hi[i] - lo[i];
  return single(Parallelepiped(lo, RationalMatrix::diagonal(diag)));
}

Region Region::box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  return single(Parallelepiped(lo, Eigen::MatrixXd((hi - lo).asDiagonal())));
}

bool Region::is_exact() const {
  if (pieces_.empty()) return false;
  return std::all_of(pieces_.begin(), pieces_.end(), [](const Parallelepiped& p) { return p.is_exact(); });
}

double Region::measure() const {
  if (pieces_.empty()) return grid_->measure();
  if (const auto q = exact_measure()) return q->get_d();
  double m = 0.0;
  for (const auto& p : pieces_) m += p.measure();
  return m;
}

std::optional<Rational> Region::exact_measure() const {
  if (!is_exact()) return std::nullopt;
  Rational m = 0;
  for (const auto& p : pieces_) m += *p.exact_measure();
  return m;
}

bool Region::contains(const Eigen::VectorXd& p) const {
  if (pieces_.empty()) return grid_->at(p);
  return std::any_of(pieces_.begin(), pieces_.end(), [&](const Parallelepiped& q) { return q.contains(p); });
}

double Region::distance(const Eigen::VectorXd& p) const {
  if (pieces_.empty()) throw UnsupportedError("distance needs a piecewise region");
  double best = INFINITY;
  for (const auto& q : pieces_) best = std::min(best, q.distance(p));
  return best;
}

Box Region::bounding_box() const {
  if (pieces_.empty()) {
    // tight box around the set cells
    const auto& g = *grid_;
    Box b{Eigen::VectorXd::Constant(dim_, INFINITY), Eigen::VectorXd::Constant(dim_, -INFINITY), false};
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!g[i]) continue;
      const Eigen::VectorXd lo = g.cell_lo(i);
      b.lo = b.lo.cwiseMin(lo);
      b.hi = b.hi.cwiseMax(Eigen::VectorXd(lo.array() + g.h()));
    }
    return b;
  }
  Box b = pieces_.front().bounding_box();
  for (const auto& p : pieces_) b = b.hull(p.bounding_box());
  return b;
}

double Region::diameter() const {
  if (pieces_.empty()) return (bounding_box().hi - bounding_box().lo).norm();
  double best = 0.0;
  std::vector<Eigen::VectorXd> all;
  for (const auto& p : pieces_)
    for (auto& v : p.vertices()) all.push_back(std::move(v));
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j) best = std::max(best, (all[i] - all[j]).norm());
  return best;
}

Eigen::VectorXd Region::centroid() const {
  if (pieces_.empty()) {
    const auto& g = *grid_;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim_);
    double n = 0;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (g[i]) {
        acc += g.cell_center(i);
        n += 1;
      }
    return acc / n;
  }
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim_);
  double total = 0.0;
  for (const auto& p : pieces_) {
    acc += p.measure() * p.centroid();
    total += p.measure();
  }
  return acc / total;
}

std::optional<RationalVector> Region::exact_centroid() const {
  if (!is_exact()) return std::nullopt;
  RationalVector acc(static_cast<std::size_t>(dim_), Rational(0));
  Rational total = 0;
  for (const auto& p : pieces_) {
    const Rational w = *p.exact_measure();
    const auto& o = *p.exact_offset();
    const auto& q = *p.exact_matrix();
    for (int i = 0; i < dim_; ++i) {
      Rational c = o[static_cast<std::size_t>(i)];
      for (int j = 0; j < dim_; ++j) c += q(i, j) / 2;
      acc[static_cast<std::size_t>(i)] += w * c;
    }
    total += w;
  }
  for (auto& c : acc) c /= total;
  return acc;
}

Region Region::translated(const Eigen::VectorXd& v) const {
  std::vector<Parallelepiped> moved;
  for (const auto& p : pieces_) moved.push_back(p.translated(v));
  if (pieces_.empty()) throw UnsupportedError("translating a grid-only region");
  return Region(dim_, std::move(moved));
}

Region Region::translated(const RationalVector& v) const {
  std::vector<Parallelepiped> moved;
  for (const auto& p : pieces_) moved.push_back(p.translated(v));
  if (pieces_.empty()) throw UnsupportedError("translating a grid-only region");
  return Region(dim_, std::move(moved));
}

GridIndicator Region::rasterize(double h, double pad) const {
  if (pieces_.empty()) {
    if (std::fabs(grid_->h() - h) > 1e-15 * h) throw UnsupportedError("re-gridding a grid-only region");
    return *grid_;
  }
  GridIndicator g = GridIndicator::covering(bounding_box().inflated(pad), h);
  const int d = dim_;
  for (const auto& piece : pieces_) {
    // visit only the cells under this piece's bounding box
    const Box pb = piece.bounding_box();
    std::vector<long> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      lo[ua] = std::max(0L, static_cast<long>(std::floor(pb.lo(a) / h)) - g.origin()[ua] - 1);
      hi[ua] = std::min(g.count()[ua] - 1, static_cast<long>(std::ceil(pb.hi(a) / h)) - g.origin()[ua] + 1);
    }
    std::vector<long> idx = lo;
    while (true) {
      std::size_t flat = 0, stride = 1;
      Eigen::VectorXd c(d);
      for (int a = 0; a < d; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        flat += static_cast<std::size_t>(idx[ua]) * stride;
        stride *= static_cast<std::size_t>(g.count()[ua]);
        c(a) = h * (static_cast<double>(g.origin()[ua] + idx[ua]) + 0.5);
      }
      if (piece.contains(c)) g[flat] = 1;
      int a = 0;
      while (a < d) {
        const auto ua = static_cast<std::size_t>(a);
        if (++idx[ua] <= hi[ua]) break;
        idx[ua] = lo[ua];
        ++a;
      }
      if (a == d) break;
    }
  }
  return g;
}

void Region::certify_disjoint() const {
  if (pieces_.size() < 2) return;
  const double total = measure();
  double overlap = 0.0;
  for (std::size_t i = 0; i < pieces_.size(); ++i)
    for (std::size_t j = i + 1; j < pieces_.size(); ++j) {
      const Box a = pieces_[i].bounding_box();
      const Box b = pieces_[j].bounding_box();
      bool boxes_meet = true;
      for (int k = 0; k < dim_; ++k)
        if (a.hi(k) <= b.lo(k) || b.hi(k) <= a.lo(k)) boxes_meet = false;
      if (!boxes_meet) continue;
      if (dim_ == 1) {
        overlap += std::max(0.0, std::min(a.hi(0), b.hi(0)) - std::max(a.lo(0), b.lo(0)));
      } else if (dim_ == 2) {
        overlap += convex_overlap_area(polygon(pieces_[i]), polygon(pieces_[j]));
      } else {
        // best effort: midpoint sampling of the bounding-box intersection
        Box inter{a.lo.cwiseMax(b.lo), a.hi.cwiseMin(b.hi), false};
        const int n = 24;
        long hits = 0, total_samples = 1;
        for (int k = 0; k < dim_; ++k) total_samples *= n;
        for (long s = 0; s < total_samples; ++s) {
          long rem = s;
          Eigen::VectorXd p(dim_);
          for (int k = 0; k < dim_; ++k) {
            p(k) = inter.lo(k) + (static_cast<double>(rem % n) + 0.5) / n * (inter.hi(k) - inter.lo(k));
            rem /= n;
          }
          if (pieces_[i].contains(p) && pieces_[j].contains(p)) ++hits;
        }
        overlap += inter.volume() * static_cast<double>(hits) / static_cast<double>(total_samples);
      }
    }
  if (overlap >= 1e-9 * total) throw ConstructionError("region pieces overlap (measure " + std::to_string(overlap) + ")");
}

// ---------------------------------------------------------------------------
// Fourier check

namespace {

const double kPi = std::acos(-1.0);

// sin(pi a) / (pi a) with exact zeros at nonzero integers
double sinc_pi(double a) {
  if (a == 0.0) return 1.0;
  const double r = a - std::round(a);
  if (r == 0.0) return 0.0;
  const double s = std::sin(kPi * r) * (static_cast<long long>(std::round(a)) % 2 == 0 ? 1.0 : -1.0);
  return s / (kPi * a);
}

// e^{-2 pi i t}
std::complex<double> cis_neg(double t) {
  const double r = t - std::floor(t);
  return {std::cos(2 * kPi * r), -std::sin(2 * kPi * r)};
}

// Fractional part of an exact rational as a double in [0,1).
double frac_of(const Rational& q) {
  Integer f;
  mpz_fdiv_q(f.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return Rational(q - Rational(f)).get_d();
}

// Rational a reduced mod 2 into [-1, 1), keeping integrality exact.
double reduce_mod2(const Rational& a) {
  Rational half = a / 2;
  Integer f;
  mpz_fdiv_q(f.get_mpz_t(), half.get_num_mpz_t(), half.get_den_mpz_t());
  Rational r = a - Rational(2 * f);
  if (r >= 1) r -= 2;
  return r.get_d();
}

std::complex<double> piece_transform(const Parallelepiped& p, const Eigen::VectorXd& xi) {
  const int d = p.dim();
  const Eigen::VectorXd a = p.matrix().transpose() * xi;
  std::complex<double> value = p.measure() * cis_neg(xi.dot(p.offset()));
  for (int i = 0; i < d; ++i) value *= cis_neg(0.5 * a(i)) * sinc_pi(a(i));
  return value;
}

std::complex<double> piece_transform_exact(const Parallelepiped& p, const RationalVector& xi) {
  const int d = p.dim();
  const auto& q = *p.exact_matrix();
  const auto& o = *p.exact_offset();
  Rational phase = 0;
  for (int i = 0; i < d; ++i) phase += xi[static_cast<std::size_t>(i)] * o[static_cast<std::size_t>(i)];
  std::complex<double> value = p.exact_measure()->get_d() * cis_neg(frac_of(phase));
  for (int i = 0; i < d; ++i) {
    Rational ai = 0;
    for (int j = 0; j < d; ++j) ai += q(j, i) * xi[static_cast<std::size_t>(j)];
    // e^{-pi i a} sin(pi a)/(pi a), with a reduced mod 2 for the trigonometric parts
    const double red = reduce_mod2(ai);
    const double s = (red == 0.0 || red == -1.0) ? 0.0 : std::sin(kPi * red);
    const double mag = ai == 0 ? 1.0 : s / (kPi * ai.get_d());
    value *= cis_neg(0.5 * red) * mag;
  }
  return value;
}

}  // namespace

std::complex<double> indicator_transform(const Region& omega, const Eigen::VectorXd& xi) {
  if (!omega.has_pieces()) throw UnsupportedError("closed-form transform needs a piecewise region");
  std::complex<double> sum = 0.0;
  for (const auto& p : omega.pieces()) sum += piece_transform(p, xi);
  return sum;
}

FourierCheck fourier_tiling_check(const Region& omega, const GeneratorMatrix& m, int K) {
  if (!omega.has_pieces()) throw UnsupportedError("closed-form transform needs a piecewise region");
  if (K < 1) throw PreconditionError("truncation radius must be at least 1");
  const int d = omega.dim();
  if (m.dim() != d) throw PreconditionError("lattice and region dimensions differ");
  const GeneratorMatrix dm = dual(m);
  const bool exact = omega.is_exact() && dm.is_exact();
  FourierCheck out;
  out.argmax = Eigen::VectorXd::Zero(d);
  std::vector<long> j(static_cast<std::size_t>(d), -K);
  while (true) {
    const bool origin = std::all_of(j.begin(), j.end(), [](long v) { return v == 0; });
    if (!origin) {
      double r;
      Eigen::VectorXd xi;
      if (exact) {
        RationalVector jq;
        for (long v : j) jq.emplace_back(v);
        const RationalVector xq = dm.exact()->apply(jq);
        std::complex<double> sum = 0.0;
        for (const auto& p : omega.pieces()) sum += piece_transform_exact(p, xq);
        r = std::abs(sum);
        xi = to_real(xq);
      } else {
        Eigen::VectorXd jv(d);
        for (int i = 0; i < d; ++i) jv(i) = static_cast<double>(j[static_cast<std::size_t>(i)]);
        xi = dm.real() * jv;
        r = std::abs(indicator_transform(omega, xi));
      }
      ++out.evaluated;
      if (r > out.max_residual) {
        out.max_residual = r;
        out.argmax = xi;
      }
    }
    int a = 0;
    while (a < d) {
      if (++j[static_cast<std::size_t>(a)] <= K) break;
      j[static_cast<std::size_t>(a)] = -K;
      ++a;
    }
    if (a == d) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Thickening and dilation

Region thicken(const Region& omega, double eps, double h) {
  if (!(eps > 0)) throw PreconditionError("thickening radius must be positive");
  if (!(h > 0)) throw PreconditionError("grid step must be positive");
  const int d = omega.dim();
  const double reach = eps + h * std::sqrt(static_cast<double>(d));
  if (!omega.has_pieces()) {
    const auto& src = *omega.grid();
    if (std::fabs(src.h() - h) > 1e-12 * h) throw UnsupportedError("grid-only thickening needs the region's own step");
    GridIndicator g = GridIndicator::covering(src.box().inflated(reach + h), h);
    const long radius = static_cast<long>(std::ceil(reach / h));
    std::vector<std::vector<long>> offsets;
    std::vector<long> o(static_cast<std::size_t>(d), -radius);
    while (true) {
      double n2 = 0;
      for (long v : o) n2 += static_cast<double>(v * v);
      if (std::sqrt(n2) * h < reach) offsets.push_back(o);
      int a = 0;
      while (a < d) {
        if (++o[static_cast<std::size_t>(a)] <= radius) break;
        o[static_cast<std::size_t>(a)] = -radius;
        ++a;
      }
      if (a == d) break;
    }
    for (std::size_t i = 0; i < src.size(); ++i) {
      if (!src[i]) continue;
      const auto idx = src.unflatten(i);
      for (const auto& off : offsets) {
        std::size_t flat = 0, stride = 1;
        for (int a = 0; a < d; ++a) {
          const auto ua = static_cast<std::size_t>(a);
          const long cell = src.origin()[ua] + idx[ua] + off[ua] - g.origin()[ua];
          flat += static_cast<std::size_t>(cell) * stride;
          stride *= static_cast<std::size_t>(g.count()[ua]);
        }
        g[flat] = 1;
      }
    }
    return Region::from_grid(std::move(g));
  }
  GridIndicator g = GridIndicator::covering(omega.bounding_box().inflated(eps + h), h);
  const double threshold = eps + 0.5 * h * std::sqrt(static_cast<double>(d));
  for (std::size_t i = 0; i < g.size(); ++i)
    if (omega.distance(g.cell_center(i)) < threshold) g[i] = 1;
  return Region::from_grid(std::move(g));
}

Region star_dilate(const Region& omega, const Eigen::VectorXd& center, double gamma) {
  if (!(gamma > 0 && gamma <= 1)) throw PreconditionError("star dilation factor must lie in (0, 1]");
  if (!omega.has_pieces()) throw UnsupportedError("star dilation of a grid-only region");
  if (center.size() != omega.dim()) throw PreconditionError("center dimension mismatch");
  if (omega.distance(center) > 1e-12) throw PreconditionError("star center is not in the region");
  std::vector<Parallelepiped> pieces;
  for (const auto& p : omega.pieces()) pieces.push_back(p.dilated(center, gamma));
  return Region(omega.dim(), std::move(pieces));
}

Region star_dilate(const Region& omega, const RationalVector& center, const Rational& gamma) {
  if (!(gamma > 0 && gamma <= 1)) throw PreconditionError("star dilation factor must lie in (0, 1]");
  if (!omega.has_pieces()) throw UnsupportedError("star dilation of a grid-only region");
  if (static_cast<int>(center.size()) != omega.dim()) throw PreconditionError("center dimension mismatch");
  if (omega.distance(to_real(center)) > 1e-12) throw PreconditionError("star center is not in the region");
  std::vector<Parallelepiped> pieces;
  for (const auto& p : omega.pieces()) pieces.push_back(p.dilated(center, gamma));
  return Region(omega.dim(), std::move(pieces));
}

// ---------------------------------------------------------------------------
// Constructive domains

CommonDomain common_fd_rational(int m, int n, FdVariant variant) {
  if (m < 1 || n < 1) throw PreconditionError("m and n must be positive");
  if (std::gcd(m, n) != 1) throw PreconditionError("m and n must be coprime");
  const Rational mq(m), nq(n), inv_n(1, n);
  RationalMatrix shape(2, 2);
  RationalMatrix scaling(2, 2);
  if (variant == FdVariant::upper) {
    shape(0, 0) = inv_n;
    shape(0, 1) = mq;
    shape(1, 1) = nq;
    scaling(0, 0) = Rational(m, n);
    scaling(1, 1) = Rational(n, m);
  } else {
    shape(0, 0) = nq;
    shape(1, 0) = mq;
    shape(1, 1) = inv_n;
    scaling(0, 0) = Rational(n, m);
    scaling(1, 1) = Rational(m, n);
  }
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      shape(i, j).canonicalize();
      scaling(i, j).canonicalize();
    }
  Region omega = Region::single(Parallelepiped(RationalVector{0, 0}, shape));
  return {std::move(omega), {GeneratorMatrix::identity(2), GeneratorMatrix(scaling), GeneratorMatrix(shape)}};
}

namespace {

// Every cell of the thickened grid has all corners in one closed piece of the outer region.
bool grid_inside(const GridIndicator& g, const Region& outer) {
  const int d = g.dim();
  const double slack = 1e-12;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g[i]) continue;
    const Eigen::VectorXd lo = g.cell_lo(i);
    bool inside_some = false;
    for (const auto& piece : outer.pieces()) {
      bool all = true;
      for (long mask = 0; mask < (1L << d) && all; ++mask) {
        Eigen::VectorXd c = lo;
        for (int a = 0; a < d; ++a)
          if ((mask >> a) & 1) c(a) += g.h();
        all = piece.contains_closed(c, slack);
      }
      if (all) {
        inside_some = true;
        break;
      }
    }
    if (!inside_some) return false;
  }
  return true;
}

}  // namespace

ScaledDomain scaled_common_domain(const GeneratorMatrix& a, const GeneratorMatrix& b, const Region& omega_prime,
                                  const Eigen::VectorXd& center, double h, int iterations) {
  const int d = a.dim();
  if (b.dim() != d || omega_prime.dim() != d) throw PreconditionError("dimension mismatch");
  if (!omega_prime.has_pieces()) throw UnsupportedError("scaled domain needs a piecewise region");
  if (!(h > 0)) throw PreconditionError("grid step must be positive");
  const double det_a = std::fabs(a.det());
  const double det_b = std::fabs(b.det());
  if (std::fabs(det_a - det_b) <= 1e-12 * det_b)
    throw DegenerateMargin("|det A| = |det B| leaves no room to thicken");
  if (!(det_a < det_b)) throw PreconditionError("scaled domain needs |det A| < |det B|");

  // s = |det B / det A|^{1/d}, exact when the ratio is a perfect d-th power (d <= 2)
  std::optional<Rational> s_exact;
  if (a.is_exact() && b.is_exact() && d <= 2) {
    Rational ratio = abs(Rational(*b.exact_det() / *a.exact_det()));
    ratio.canonicalize();
    if (d == 1) {
      s_exact = ratio;
    } else {
      const auto num = exact_sqrt(ratio.get_num());
      const auto den = exact_sqrt(ratio.get_den());
      if (num && den) s_exact = Rational(*num, *den);
    }
  }
  const double s = s_exact ? s_exact->get_d() : std::pow(det_b / det_a, 1.0 / d);
  const GeneratorMatrix sa = s_exact ? a.scaled(*s_exact) : a.scaled(s);

  const CoverReport cert_a = cover_classify(omega_prime, sa, h, 1e-9, CoverMode::exact);
  const CoverReport cert_b = cover_classify(omega_prime, b, h, 1e-9, CoverMode::exact);
  using V = CoverReport::Verdict;
  if (cert_a.verdict != V::tiling || cert_b.verdict != V::tiling)
    throw PreconditionError("the given domain is not a common fundamental domain of s*A and B");

  double gamma_d;
  std::optional<Region> shrunk;
  if (s_exact && omega_prime.is_exact()) {
    RationalVector cq;
    for (int i = 0; i < d; ++i) cq.emplace_back(center(i));
    const Rational gamma = Rational(1) / *s_exact;
    shrunk = star_dilate(omega_prime, cq, gamma);
    gamma_d = gamma.get_d();
  } else {
    gamma_d = 1.0 / s;
    shrunk = star_dilate(omega_prime, center, gamma_d);
  }
  ScaledDomain out{std::move(*shrunk), 0.0, gamma_d, h, iterations, cert_a, cert_b};

  const auto fits = [&](double eps) { return grid_inside(thicken(out.omega, eps, h).grid().value(), omega_prime); };
  double lo = 0.0;
  double hi = std::max((1.0 - out.gamma) * omega_prime.diameter(), 4 * h);
  for (int grow = 0; grow < 20 && fits(hi); ++grow) {
    lo = hi;
    hi *= 2;
  }
  for (int it = 0; it < iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (fits(mid))
      lo = mid;
    else
      hi = mid;
  }
  out.eps = lo;
  if (out.eps < h) throw DegenerateMargin("certified thickening radius fell below the grid step");
  return out;
}

}  // namespace tflat
