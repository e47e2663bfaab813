#include "tflat/frame.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <thread>
#include <tuple>

#include "tflat/error.hpp"

namespace tflat {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

using Ranges = std::vector<std::pair<long, long>>;

// Calls fn(k) for every integer vector in the (inclusive) ranges, axis 0 fastest.
template <class Fn>
void for_each_index(const Ranges& r, Fn&& fn) {
  const std::size_t d = r.size();
  for (const auto& [lo, hi] : r)
    if (lo > hi) return;
  std::vector<long> k(d);
  for (std::size_t a = 0; a < d; ++a) k[a] = r[a].first;
  while (true) {
    fn(k);
    std::size_t a = 0;
    while (a < d) {
      if (++k[a] <= r[a].second) break;
      k[a] = r[a].first;
      ++a;
    }
    if (a == d) return;
  }
}

Eigen::VectorXd to_vec(const std::vector<long>& k) {
  Eigen::VectorXd v(static_cast<int>(k.size()));
  for (std::size_t i = 0; i < k.size(); ++i) v(static_cast<int>(i)) = static_cast<double>(k[i]);
  return v;
}

// Box outside of which g is zero, including the reach of the interpolation stencil.
std::optional<Box> effective_support(const SampledWindow& g) {
  const Box s = g.support_box();
  if ((s.hi - s.lo).minCoeff() <= 0) return std::nullopt;
  switch (g.interpolation()) {
    case Interpolation::cell:
      return s;
    case Interpolation::linear:
      return s.inflated(g.h());
    case Interpolation::cubic:
      return s.inflated(2 * g.h());
  }
  return s;
}

Box intersect(const Box& a, const Box& b) {
  return Box{a.lo.cwiseMax(b.lo), a.hi.cwiseMin(b.hi), false};
}

bool empty(const Box& b) { return (b.hi - b.lo).minCoeff() < 0; }

// Half-extent per axis of M [-J, J]^d.
Eigen::VectorXd image_halfwidth(const Eigen::MatrixXd& m, double j) { return m.cwiseAbs().rowwise().sum() * j; }

// Runs body(i) for i in [0, n), split over the available hardware threads.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(hw, n / 16 + 1);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) body(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace

// ---- lattice and system -------------------------------------------------------------

TFLattice::TFLattice(GeneratorMatrix a, GeneratorMatrix b, std::optional<Eigen::MatrixXd> d)
    : A(std::move(a)), B(std::move(b)), D(std::move(d)) {
  if (A.dim() != B.dim()) throw ConstructionError("time and frequency generators differ in dimension");
  if (D && (D->rows() != A.dim() || D->cols() != A.dim()))
    throw ConstructionError("shear block must be d x d");
  if (D && D->isZero(0.0)) D.reset();
}

TFLattice::TFLattice(const SeparableTFLattice& l) : TFLattice(l.A(), l.B()) {}

double TFLattice::density() const { return 1.0 / std::fabs(A.det() * B.det()); }

SeparableTFLattice TFLattice::as_separable() const {
  if (D) throw PreconditionError("lattice has a shear block and is not separable");
  return SeparableTFLattice(A, B);
}

GaborSystem::GaborSystem(SampledWindow window, TFLattice l) : g(std::move(window)), lattice(std::move(l)) {
  if (g.dim() != lattice.dim()) throw PreconditionError("window and lattice dimensions differ");
}

// ---- coefficients -------------------------------------------------------------------

std::vector<Complex> gabor_coeffs(const SampledWindow& f, const SampledWindow& g, const Eigen::VectorXd& x,
                                  const std::vector<Eigen::VectorXd>& omegas) {
  const int d = f.dim();
  if (g.dim() != d || x.size() != d) throw PreconditionError("gabor_coeff dimensions differ");
  std::vector<Complex> out(omegas.size(), Complex(0, 0));
  const auto sf = effective_support(f);
  const auto sg = effective_support(g);
  if (!sf || !sg) return out;
  const Box overlap = intersect(f.support_box(), sg->translated(x));
  if (empty(overlap)) return out;

  // node range of f inside the overlap
  Ranges r(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) {
    const double h = f.h();
    const long lo = static_cast<long>(std::floor((overlap.lo(a) - f.lo()(a)) / h - 0.5));
    const long hi = static_cast<long>(std::ceil((overlap.hi(a) - f.lo()(a)) / h - 0.5));
    r[static_cast<std::size_t>(a)] = {std::max(0L, lo), std::min(f.count()[static_cast<std::size_t>(a)] - 1, hi)};
  }
  const double cell = std::pow(f.h(), d);
  std::vector<Complex> prod;
  std::vector<long> idx;  // d entries per product
  Eigen::VectorXd t(d);
  for_each_index(r, [&](const std::vector<long>& k) {
    const Complex fv = f[f.flat(k)];
    if (fv == Complex(0, 0)) return;
    for (int a = 0; a < d; ++a) t(a) = f.lo()(a) + (static_cast<double>(k[static_cast<std::size_t>(a)]) + 0.5) * f.h();
    const Complex gv = g(t - x);
    if (gv == Complex(0, 0)) return;
    prod.push_back(fv * std::conj(gv) * cell);
    idx.insert(idx.end(), k.begin(), k.end());
  });
  if (prod.empty()) return out;

  std::vector<std::vector<Complex>> phase(static_cast<std::size_t>(d));
  for (std::size_t w = 0; w < omegas.size(); ++w) {
    const Eigen::VectorXd& om = omegas[w];
    if (om.size() != d) throw PreconditionError("frequency dimension differs");
    for (int a = 0; a < d; ++a) {
      auto& e = phase[static_cast<std::size_t>(a)];
      const auto [lo, hi] = r[static_cast<std::size_t>(a)];
      e.resize(static_cast<std::size_t>(hi - lo + 1));
      for (long i = lo; i <= hi; ++i) {
        const double ta = f.lo()(a) + (static_cast<double>(i) + 0.5) * f.h();
        e[static_cast<std::size_t>(i - lo)] = std::polar(1.0, -kTwoPi * om(a) * ta);
      }
    }
    Complex s = 0;
    for (std::size_t p = 0; p < prod.size(); ++p) {
      Complex e = prod[p];
      for (int a = 0; a < d; ++a)
        e *= phase[static_cast<std::size_t>(a)][static_cast<std::size_t>(idx[p * static_cast<std::size_t>(d) + static_cast<std::size_t>(a)] - r[static_cast<std::size_t>(a)].first)];
      s += e;
    }
    out[w] = s;
  }
  return out;
}

Complex gabor_coeff(const SampledWindow& f, const SampledWindow& g, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& omega) {
  return gabor_coeffs(f, g, x, {omega})[0];
}

// ---- Gramian ------------------------------------------------------------------------

int resolved_section(int dim, const GramianOptions& opt) {
  if (opt.section >= 0) return opt.section;
  return dim == 1 ? 16 : 3;
}

namespace {

// Integer range of M^{-1}(box) per axis, from a precomputed inverse; no allocation.
void fast_range(const Eigen::MatrixXd& inv, const double* lo, const double* hi, long J, long* out_lo, long* out_hi) {
  const auto d = inv.rows();
  for (Eigen::Index i = 0; i < d; ++i) {
    double mn = 0, mx = 0;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double u = inv(i, j) * lo[j], v = inv(i, j) * hi[j];
      mn += std::min(u, v);
      mx += std::max(u, v);
    }
    out_lo[i] = std::max(-J, static_cast<long>(std::floor(mn - 1e-9)));
    out_hi[i] = std::min(J, static_cast<long>(std::ceil(mx + 1e-9)));
  }
}

// Everything about G(x) that does not depend on x.
class GramianEngine {
 public:
  GramianEngine(const SampledWindow& g, const TFLattice& lattice, const GramianOptions& opt)
      : g_(g), d_(lattice.dim()), J_(resolved_section(lattice.dim(), opt)) {
    if (g.dim() != d_) throw PreconditionError("window and lattice dimensions differ");
    if (d_ > 8) throw UnsupportedError("gramian supports at most 8 dimensions");
    support_ = effective_support(g);
    A_ = lattice.A.real();
    Bt_ = lattice.B.inverse_transpose().real();
    BtInv_ = lattice.B.real().transpose();
    scale_ = 1.0 / std::fabs(lattice.B.det());
    if (lattice.D) theta_ = lattice.B.real().inverse() * *lattice.D;
    reach_ = image_halfwidth(Bt_, static_cast<double>(J_));
    side_ = 2 * J_ + 1;
    n_ = 1;
    for (int a = 0; a < d_; ++a) n_ *= side_;
  }

  Eigen::Index size() const { return n_; }
  int section() const { return static_cast<int>(J_); }

  std::vector<std::vector<long>> indices() const {
    std::vector<std::vector<long>> out;
    for_each_index(Ranges(static_cast<std::size_t>(d_), {-J_, J_}), [&](const std::vector<long>& j) { out.push_back(j); });
    return out;
  }

  /// Fills m (n x n) with G(x); returns false when no entry off the diagonal was touched.
  bool fill(const Eigen::VectorXd& x, Eigen::MatrixXcd& m) const {
    m.setZero(n_, n_);
    if (!support_) return false;
    const Box lbox{x - support_->hi - reach_, x - support_->lo + reach_, false};
    const Ranges lrange = coefficient_range(A_, lbox);
    bool coupled = false;
    double p0[8], lo[8], hi[8], p[8], th[8];
    long jlo[8], jhi[8], j[8];
    std::vector<std::pair<Eigen::Index, Complex>> v;
    v.reserve(64);
    for_each_index(lrange, [&](const std::vector<long>& l) {
      bool inside = true;
      for (int a = 0; a < d_; ++a) {
        double al = 0;
        for (int b = 0; b < d_; ++b) al += A_(a, b) * static_cast<double>(l[static_cast<std::size_t>(b)]);
        if (al < lbox.lo(a) - 1e-12 || al > lbox.hi(a) + 1e-12) inside = false;
        p0[a] = x(a) - al;
        lo[a] = p0[a] - support_->hi(a);
        hi[a] = p0[a] - support_->lo(a);
      }
      if (!inside) return;
      fast_range(BtInv_, lo, hi, J_, jlo, jhi);
      for (int a = 0; a < d_; ++a)
        if (jlo[a] > jhi[a]) return;
      if (theta_)
        for (int a = 0; a < d_; ++a) {
          th[a] = 0;
          for (int b = 0; b < d_; ++b) th[a] += (*theta_)(a, b) * static_cast<double>(l[static_cast<std::size_t>(b)]);
        }
      v.clear();
      for (int a = 0; a < d_; ++a) j[a] = jlo[a];
      while (true) {
        for (int a = 0; a < d_; ++a) {
          double bj = 0;
          for (int b = 0; b < d_; ++b) bj += Bt_(a, b) * static_cast<double>(j[b]);
          p[a] = p0[a] - bj;
        }
        Complex val = g_.eval(p);
        if (val != Complex(0, 0)) {
          if (theta_) {
            double ph = 0;
            for (int a = 0; a < d_; ++a) ph += th[a] * static_cast<double>(j[a]);
            val *= std::polar(1.0, kTwoPi * ph);
          }
          Eigen::Index r = 0, stride = 1;
          for (int a = 0; a < d_; ++a) {
            r += (j[a] + J_) * stride;
            stride *= side_;
          }
          v.emplace_back(r, val);
        }
        int a = 0;
        while (a < d_) {
          if (++j[a] <= jhi[a]) break;
          j[a] = jlo[a];
          ++a;
        }
        if (a == d_) break;
      }
      if (v.size() > 1) coupled = true;
      for (const auto& [r, vr] : v)
        for (const auto& [c, vc] : v) m(r, c) += scale_ * vr * std::conj(vc);
    });
    return coupled;
  }

 private:
  const SampledWindow& g_;
  int d_;
  long J_;
  long side_ = 1;
  Eigen::Index n_ = 1;
  std::optional<Box> support_;
  Eigen::MatrixXd A_, Bt_, BtInv_;
  std::optional<Eigen::MatrixXd> theta_;
  Eigen::VectorXd reach_;
  double scale_ = 1;
};

}  // namespace

GramianSection gramian(const SampledWindow& g, const TFLattice& lattice, const Eigen::VectorXd& x,
                       const GramianOptions& opt) {
  if (x.size() != lattice.dim()) throw PreconditionError("gramian dimensions differ");
  const GramianEngine engine(g, lattice, opt);
  GramianSection out;
  out.indices = engine.indices();
  engine.fill(x, out.matrix);
  return out;
}

std::pair<double, double> hermitian_extremes(const Eigen::MatrixXcd& m) {
  const auto n = m.rows();
  if (n == 0) return {0.0, 0.0};
  // connected components of the sparsity graph; each is an invariant block
  std::vector<Eigen::Index> parent(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) parent[static_cast<std::size_t>(i)] = i;
  const auto find = [&](Eigen::Index i) {
    while (parent[static_cast<std::size_t>(i)] != i) {
      parent[static_cast<std::size_t>(i)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
      i = parent[static_cast<std::size_t>(i)];
    }
    return i;
  };
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (m(i, j) != Complex(0, 0) || m(j, i) != Complex(0, 0)) parent[static_cast<std::size_t>(find(i))] = find(j);

  std::map<Eigen::Index, std::vector<Eigen::Index>> blocks;
  for (Eigen::Index i = 0; i < n; ++i) blocks[find(i)].push_back(i);
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& [root, idx] : blocks) {
    if (idx.size() == 1) {
      const double v = m(idx[0], idx[0]).real();
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      continue;
    }
    const auto k = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXcd b(k, k);
    for (Eigen::Index r = 0; r < k; ++r)
      for (Eigen::Index c = 0; c < k; ++c) b(r, c) = m(idx[static_cast<std::size_t>(r)], idx[static_cast<std::size_t>(c)]);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(b, Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues().minCoeff());
    hi = std::max(hi, es.eigenvalues().maxCoeff());
  }
  return {lo, hi};
}

GramianReport frame_bounds(const SampledWindow& g, const TFLattice& lattice, int samples_per_axis,
                           const GramianOptions& opt) {
  const int d = lattice.dim();
  if (g.dim() != d) throw PreconditionError("window and lattice dimensions differ");
  if (samples_per_axis < 1) throw PreconditionError("need at least one sample per axis");
  const double total = std::pow(static_cast<double>(samples_per_axis), d);
  if (total > 1e8) throw ResourceError("too many x samples");

  GramianReport rep;
  rep.samples_per_axis = samples_per_axis;
  rep.section = resolved_section(d, opt);
  rep.h = g.h();
  rep.exact = g.interpolation() == Interpolation::cell;
  rep.tight_constant = lattice.density() * g.norm2();

  const Eigen::MatrixXd Bt = lattice.B.inverse_transpose().real();
  const Ranges grid(static_cast<std::size_t>(d), {0, samples_per_axis - 1});
  for_each_index(grid, [&](const std::vector<long>& i) {
    rep.x_samples.push_back(Bt * ((to_vec(i).array() + 0.5) / samples_per_axis).matrix());
  });
  const std::size_t n = rep.x_samples.size();
  rep.lambda_min.assign(n, 0.0);
  rep.lambda_max.assign(n, 0.0);
  const GramianEngine engine(g, lattice, opt);
  parallel_for(n, [&](std::size_t s) {
    Eigen::MatrixXcd m;
    if (engine.fill(rep.x_samples[s], m)) {
      std::tie(rep.lambda_min[s], rep.lambda_max[s]) = hermitian_extremes(m);
    } else {
      const Eigen::VectorXd diag = m.diagonal().real();
      rep.lambda_min[s] = diag.minCoeff();
      rep.lambda_max[s] = diag.maxCoeff();
    }
  });
  rep.a_est = std::max(0.0, *std::min_element(rep.lambda_min.begin(), rep.lambda_min.end()));
  rep.b_est = *std::max_element(rep.lambda_max.begin(), rep.lambda_max.end());
  for (std::size_t s = 0; s < n; ++s)
    rep.tight_residual = std::max({rep.tight_residual, std::fabs(rep.lambda_max[s] - rep.tight_constant),
                                   std::fabs(rep.lambda_min[s] - rep.tight_constant)});
  return rep;
}

double tight_residual(const SampledWindow& g, const TFLattice& lattice, int samples_per_axis,
                      const GramianOptions& opt) {
  return frame_bounds(g, lattice, samples_per_axis, opt).tight_residual;
}

nlohmann::ordered_json GramianReport::to_json(bool with_samples) const {
  nlohmann::ordered_json j;
  j["a_est"] = a_est;
  j["b_est"] = b_est;
  j["tight_constant"] = tight_constant;
  j["tight_residual"] = tight_residual;
  j["samples_per_axis"] = samples_per_axis;
  j["section"] = section;
  j["h"] = h;
  j["bounds"] = exact ? "exact at samples" : "certified at resolution";
  if (with_samples) {
    auto arr = nlohmann::ordered_json::array();
    for (std::size_t s = 0; s < x_samples.size(); ++s) {
      std::vector<double> xs(x_samples[s].data(), x_samples[s].data() + x_samples[s].size());
      arr.push_back({{"x", xs}, {"lambda_min", lambda_min[s]}, {"lambda_max", lambda_max[s]}});
    }
    j["samples"] = std::move(arr);
  }
  return j;
}

// ---- orthonormality on a lattice ----------------------------------------------------

namespace {

struct IndexPoint {
  std::vector<long> k, m;
  Eigen::VectorXd x, w;
};

std::vector<IndexPoint> ball_points(const SeparableTFLattice& l, double lo, double hi) {
  const int d = l.dim();
  const Box cube = Box::cube(d, -hi, hi);
  const Ranges kr = coefficient_range(l.A().real(), cube);
  const Ranges mr = coefficient_range(l.B().real(), cube);
  std::vector<IndexPoint> out;
  std::vector<std::pair<std::vector<long>, Eigen::VectorXd>> xs, ws;
  for_each_index(kr, [&](const std::vector<long>& k) {
    Eigen::VectorXd x = l.A().real() * to_vec(k);
    if (x.norm() <= hi) xs.emplace_back(k, std::move(x));
  });
  for_each_index(mr, [&](const std::vector<long>& m) {
    Eigen::VectorXd w = l.B().real() * to_vec(m);
    if (w.norm() <= hi) ws.emplace_back(m, std::move(w));
  });
  if (static_cast<double>(xs.size()) * static_cast<double>(ws.size()) > 1e7)
    throw ResourceError("orthonormality ball holds too many lattice points");
  for (const auto& [k, x] : xs)
    for (const auto& [m, w] : ws) {
      const double r = std::sqrt(x.squaredNorm() + w.squaredNorm());
      if (r <= hi && r > lo) out.push_back({k, m, x, w});
    }
  return out;
}

// max |<g, pi(delta) g>| over the given differences, grouped by their time part
double max_ambiguity(const SampledWindow& g, const SeparableTFLattice& l,
                     const std::map<std::vector<long>, std::vector<std::vector<long>>>& by_time) {
  double worst = 0;
  for (const auto& [k, ms] : by_time) {
    const Eigen::VectorXd x = l.A().real() * to_vec(k);
    std::vector<Eigen::VectorXd> omegas;
    omegas.reserve(ms.size());
    for (const auto& m : ms) omegas.push_back(l.B().real() * to_vec(m));
    for (const auto& v : gabor_coeffs(g, g, x, omegas)) worst = std::max(worst, std::abs(v));
  }
  return worst;
}

}  // namespace

OrthonormalityReport orthonormality(const SampledWindow& g, const SeparableTFLattice& lattice, double radius) {
  if (g.dim() != lattice.dim()) throw PreconditionError("window and lattice dimensions differ");
  if (!(radius >= 0)) throw PreconditionError("radius must be nonnegative");
  OrthonormalityReport rep;
  rep.radius = radius;
  rep.norm2 = g.norm2();
  rep.normalized = std::fabs(rep.norm2 - 1.0) <= 1e-6;

  const auto pts = ball_points(lattice, -1.0, radius);
  rep.points = pts.size();
  if (static_cast<double>(pts.size()) * static_cast<double>(pts.size()) > 4e7)
    throw ResourceError("orthonormality Gram matrix too large");
  std::set<std::pair<std::vector<long>, std::vector<long>>> diffs;
  for (const auto& p : pts)
    for (const auto& q : pts) {
      std::pair<std::vector<long>, std::vector<long>> dlt{q.k, q.m};
      bool zero = true;
      for (std::size_t a = 0; a < p.k.size(); ++a) {
        dlt.first[a] -= p.k[a];
        dlt.second[a] -= p.m[a];
        zero = zero && dlt.first[a] == 0 && dlt.second[a] == 0;
      }
      if (!zero) diffs.insert(std::move(dlt));
    }
  std::map<std::vector<long>, std::vector<std::vector<long>>> by_time;
  for (const auto& [k, m] : diffs) by_time[k].push_back(m);
  rep.residual = std::max(std::fabs(rep.norm2 - 1.0), max_ambiguity(g, lattice, by_time));

  // the next shell beyond the largest difference
  double step = 0;
  for (int a = 0; a < lattice.dim(); ++a)
    step = std::max({step, lattice.A().real().col(a).norm(), lattice.B().real().col(a).norm()});
  std::map<std::vector<long>, std::vector<std::vector<long>>> shell;
  for (const auto& p : ball_points(lattice, 2 * radius, 2 * radius + step)) shell[p.k].push_back(p.m);
  rep.tail_estimate = max_ambiguity(g, lattice, shell);
  return rep;
}

double orthonormality_residual(const SampledWindow& g, const SeparableTFLattice& lattice, double radius) {
  return orthonormality(g, lattice, radius).residual;
}

nlohmann::ordered_json OrthonormalityReport::to_json() const {
  nlohmann::ordered_json j;
  j["residual"] = residual;
  j["tail_estimate"] = tail_estimate;
  j["norm2"] = norm2;
  j["normalized"] = normalized;
  j["points"] = points;
  j["radius"] = radius;
  return j;
}

}  // namespace tflat
