#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "tflat/config.hpp"
#include "tflat/error.hpp"
#include "tflat/region.hpp"

namespace tflat {

std::string CoverReport::verdict_name() const {
  switch (verdict) {
    case Verdict::tiling:
      return "tiling";
    case Verdict::packing:
      return "packing";
    case Verdict::k_fold_tiling:
      return "k_fold_tiling(" + std::to_string(k) + ")";
    case Verdict::neither:
      break;
  }
  return "neither";
}

double default_step(const GeneratorMatrix& m) {
  const int d = m.dim();
  double diam = 0.0;
  // the longest diagonal of the cell M[0,1)^d
  for (long mask = 1; mask < (1L << d); ++mask) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < d; ++i)
      if ((mask >> i) & 1) s(i) = 1;
    for (long sign = 0; sign < (1L << d); ++sign) {
      Eigen::VectorXd t = s;
      for (int i = 0; i < d; ++i)
        if ((sign >> i) & 1) t(i) = -t(i);
      diam = std::max(diam, (m.real() * t).norm());
    }
  }
  return diam / 256.0;
}

namespace {

using QPoint = std::array<Rational, 2>;
using QPolygon = std::vector<QPoint>;

Integer qfloor(const Rational& q) {
  Integer r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

Integer qceil(const Rational& q) {
  Integer r;
  mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

Rational signed_area(const QPolygon& p) {
  Rational s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& a = p[i];
    const auto& b = p[(i + 1) % p.size()];
    s += a[0] * b[1] - a[1] * b[0];
  }
  return s / 2;
}

// Keep the part with sign * (p[axis] - c) >= 0.
QPolygon clip(const QPolygon& poly, int axis, const Rational& c, int sign) {
  QPolygon out;
  const auto f = [&](const QPoint& p) { return Rational(sign * (p[static_cast<std::size_t>(axis)] - c)); };
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const QPoint& cur = poly[i];
    const QPoint& prev = poly[(i + poly.size() - 1) % poly.size()];
    const Rational fc = f(cur);
    const Rational fp = f(prev);
    const auto cross_point = [&]() {
      const Rational t = fp / (fp - fc);
      return QPoint{prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1])};
    };
    if (fc >= 0) {
      if (fp < 0) out.push_back(cross_point());
      out.push_back(cur);
    } else if (fp >= 0) {
      out.push_back(cross_point());
    }
  }
  // drop repeated vertices
  QPolygon clean;
  for (const auto& p : out)
    if (clean.empty() || clean.back() != p) clean.push_back(p);
  while (clean.size() > 1 && clean.front() == clean.back()) clean.pop_back();
  return clean;
}

QPolygon clip_unit_square(QPolygon p) {
  p = clip(p, 0, Rational(0), 1);
  if (p.size() >= 3) p = clip(p, 0, Rational(1), -1);
  if (p.size() >= 3) p = clip(p, 1, Rational(0), 1);
  if (p.size() >= 3) p = clip(p, 1, Rational(1), -1);
  if (p.size() < 3 || signed_area(p) == 0) return {};
  return p;
}

struct Line {
  Rational slope;
  Rational intercept;
  Rational x0, x1;  // x-extent, x0 < x1
  int delta;        // +1 entering upwards, -1 leaving
  double fx0, fx1, fslope, fintercept;
};

// Exact measure of {u in [0,1)^2 : cover(u) = c} for each c, where the cover
// counts the given convex polygons (all inside the unit square).
std::map<int, Rational> sweep_2d(const std::vector<QPolygon>& polys) {
  std::vector<Line> lines;
  std::set<Rational> xs{Rational(0), Rational(1)};
  for (const auto& poly : polys) {
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const QPoint& a = poly[i];
      const QPoint& b = poly[(i + 1) % poly.size()];
      xs.insert(a[0]);
      if (a[0] == b[0]) continue;
      Line l;
      l.slope = (b[1] - a[1]) / (b[0] - a[0]);
      l.intercept = a[1] - l.slope * a[0];
      l.x0 = a[0] < b[0] ? a[0] : b[0];
      l.x1 = a[0] < b[0] ? b[0] : a[0];
      l.delta = b[0] > a[0] ? 1 : -1;
      l.fx0 = l.x0.get_d();
      l.fx1 = l.x1.get_d();
      l.fslope = l.slope.get_d();
      l.fintercept = l.intercept.get_d();
      lines.push_back(std::move(l));
    }
  }
  // crossings strictly inside both x-extents
  for (std::size_t i = 0; i < lines.size(); ++i)
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      const Line& p = lines[i];
      const Line& q = lines[j];
      const double lo = std::max(p.fx0, q.fx0);
      const double hi = std::min(p.fx1, q.fx1);
      if (lo >= hi + 1e-12) continue;
      const double ds = p.fslope - q.fslope;
      if (std::fabs(ds) > 1e-9 * (1.0 + std::fabs(p.fslope) + std::fabs(q.fslope))) {
        const double x = (q.fintercept - p.fintercept) / ds;
        const double margin = 1e-9 * (1.0 + std::fabs(x));
        if (x < lo - margin || x > hi + margin) continue;
      }
      if (p.slope == q.slope) continue;
      const Rational x = (q.intercept - p.intercept) / (p.slope - q.slope);
      if (x > p.x0 && x < p.x1 && x > q.x0 && x < q.x1) xs.insert(x);
    }

  std::map<int, Rational> hist;
  const std::vector<Rational> cuts(xs.begin(), xs.end());
  struct Active {
    Rational ya, yb, ym;
    int delta;
  };
  std::vector<Active> active;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const Rational& xa = cuts[s];
    const Rational& xb = cuts[s + 1];
    if (xa < 0 || xb > 1) continue;
    const Rational xm = (xa + xb) / 2;
    const Rational w = xb - xa;
    active.clear();
    const double fxa = xa.get_d(), fxb = xb.get_d();
    for (const auto& l : lines) {
      if (l.fx0 > fxa + 1e-12 || l.fx1 < fxb - 1e-12) {
        // cheap reject; confirm exactly only near the boundary
        if (l.fx0 > fxa + 1e-9 || l.fx1 < fxb - 1e-9) continue;
      }
      if (l.x0 > xa || l.x1 < xb) continue;
      active.push_back({l.slope * xa + l.intercept, l.slope * xb + l.intercept, l.slope * xm + l.intercept, l.delta});
    }
    std::sort(active.begin(), active.end(), [](const Active& a, const Active& b) { return a.ym < b.ym; });
    int count = 0;
    Rational prev_a = 0, prev_b = 0;
    std::size_t i = 0;
    while (i < active.size()) {
      const Rational& ya = active[i].ya;
      const Rational& yb = active[i].yb;
      const Rational gap = w * ((ya - prev_a) + (yb - prev_b)) / 2;
      if (gap != 0) hist[count] += gap;
      std::size_t j = i;
      while (j < active.size() && active[j].ym == active[i].ym) {
        count += active[j].delta;
        ++j;
      }
      prev_a = ya;
      prev_b = yb;
      i = j;
    }
    const Rational tail = w * ((1 - prev_a) + (1 - prev_b)) / 2;
    if (tail != 0) hist[count] += tail;
  }
  return hist;
}

std::map<int, Rational> exact_histogram_2d(const Region& omega, const RationalMatrix& m) {
  const RationalMatrix minv = m.inverse();
  std::vector<QPolygon> polys;
  const double cap = static_cast<double>(limits().max_lattice_points);
  for (const auto& piece : omega.pieces()) {
    const auto& o = *piece.exact_offset();
    const auto& q = *piece.exact_matrix();
    QPolygon base;
    const int corners[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    for (const auto& c : corners) {
      RationalVector v{o[0] + c[0] * q(0, 0) + c[1] * q(0, 1), o[1] + c[0] * q(1, 0) + c[1] * q(1, 1)};
      const RationalVector u = minv.apply(v);
      base.push_back({u[0], u[1]});
    }
    if (signed_area(base) < 0) std::reverse(base.begin(), base.end());
    Rational lo[2] = {base[0][0], base[0][1]}, hi[2] = {base[0][0], base[0][1]};
    for (const auto& p : base)
      for (int a = 0; a < 2; ++a) {
        if (p[static_cast<std::size_t>(a)] < lo[a]) lo[a] = p[static_cast<std::size_t>(a)];
        if (p[static_cast<std::size_t>(a)] > hi[a]) hi[a] = p[static_cast<std::size_t>(a)];
      }
    Integer kmin[2], kmax[2];
    for (int a = 0; a < 2; ++a) {
      kmin[a] = qfloor(Rational(-hi[a])) + 1;
      kmax[a] = qceil(Rational(1 - lo[a])) - 1;
    }
    const double sweep = Rational(Rational(kmax[0] - kmin[0] + 1) * Rational(kmax[1] - kmin[1] + 1)).get_d();
    if (sweep > cap) throw ResourceError("too many lattice translates intersect the cell");
    for (Integer kx = kmin[0]; kx <= kmax[0]; ++kx)
      for (Integer ky = kmin[1]; ky <= kmax[1]; ++ky) {
        QPolygon moved = base;
        for (auto& p : moved) {
          p[0] += kx;
          p[1] += ky;
        }
        QPolygon clipped = clip_unit_square(std::move(moved));
        if (!clipped.empty()) polys.push_back(std::move(clipped));
      }
  }
  return sweep_2d(polys);
}

std::map<int, Rational> exact_histogram_1d(const Region& omega, const RationalMatrix& m) {
  const Rational minv = 1 / m(0, 0);
  std::vector<std::pair<Rational, int>> events;
  for (const auto& piece : omega.pieces()) {
    Rational a = (*piece.exact_offset())[0] * minv;
    Rational b = ((*piece.exact_offset())[0] + (*piece.exact_matrix())(0, 0)) * minv;
    if (b < a) std::swap(a, b);
    const Integer kmin = qfloor(Rational(-b)) + 1;
    const Integer kmax = qceil(Rational(1 - a)) - 1;
    if (Rational(kmax - kmin).get_d() > static_cast<double>(limits().max_lattice_points))
      throw ResourceError("too many lattice translates intersect the cell");
    for (Integer k = kmin; k <= kmax; ++k) {
      Rational lo = a + k, hi = b + k;
      if (lo < 0) lo = 0;
      if (hi > 1) hi = 1;
      if (lo >= hi) continue;
      events.emplace_back(lo, 1);
      events.emplace_back(hi, -1);
    }
  }
  events.emplace_back(Rational(0), 0);
  events.emplace_back(Rational(1), 0);
  std::sort(events.begin(), events.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  std::map<int, Rational> hist;
  int count = 0;
  Rational prev = 0;
  for (const auto& [x, delta] : events) {
    if (x > prev) {
      hist[count] += x - prev;
      prev = x;
    }
    count += delta;
  }
  return hist;
}

void classify(CoverReport& r) {
  const int lo = static_cast<int>(r.min_cover);
  const int hi = static_cast<int>(r.max_cover);
  using V = CoverReport::Verdict;
  if (lo == hi && lo == 1) {
    r.verdict = V::tiling;
    r.k = 1;
  } else if (lo == hi && lo > 1) {
    r.verdict = V::k_fold_tiling;
    r.k = lo;
  } else if (hi <= 1) {
    r.verdict = V::packing;
  } else {
    r.verdict = V::neither;
  }
}

CoverReport exact_cover(const Region& omega, const GeneratorMatrix& m) {
  const RationalMatrix& mq = *m.exact();
  const std::map<int, Rational> hist = omega.dim() == 1 ? exact_histogram_1d(omega, mq) : exact_histogram_2d(omega, mq);
  const Rational vol = abs(mq.determinant());
  CoverReport r;
  r.mode = CoverMode::exact;
  Rational mean = 0;
  for (const auto& [c, area] : hist) mean += Rational(c) * area;
  // average cover = m(Omega) / vol(cell); used as the reference level k*
  Integer kstar_num = qfloor(Rational(mean + Rational(1, 2)));
  const long kstar = std::max(1L, kstar_num.get_si());
  Rational defect = 0;
  bool first = true;
  for (const auto& [c, area] : hist) {
    if (area == 0) continue;
    if (first) {
      r.min_cover = c;
      first = false;
    }
    r.max_cover = c;
    r.histogram[c] = Rational(area * vol).get_d();
    defect += abs(Rational(c - kstar)) * area * vol;
  }
  r.raw_min_cover = r.min_cover;
  r.raw_max_cover = r.max_cover;
  r.exact_defect = defect;
  r.defect_measure = defect.get_d();
  classify(r);
  return r;
}

CoverReport float_cover(const Region& omega, const GeneratorMatrix& m, double h, double tol) {
  const int d = omega.dim();
  const Eigen::MatrixXd& mr = m.real();
  const Eigen::MatrixXd minv = mr.inverse();
  std::vector<long> n(static_cast<std::size_t>(d));
  double total = 1.0;
  for (int i = 0; i < d; ++i) {
    n[static_cast<std::size_t>(i)] = std::max(1L, static_cast<long>(std::ceil(mr.col(i).norm() / h - 1e-9)));
    total *= static_cast<double>(n[static_cast<std::size_t>(i)]);
  }
  if (total > static_cast<double>(limits().max_grid_cells)) throw ResourceError("cover sampling grid exceeds the cell cap");

  // Per shape: bounding box of its preimage under M, to bound the translates that can contain a sample.
  struct Shape {
    const Parallelepiped* piece;
    Eigen::VectorXd ulo, uhi;
  };
  std::vector<Shape> shapes;
  const auto unit_box = [&](const Box& b) {
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(d, INFINITY), hi = Eigen::VectorXd::Constant(d, -INFINITY);
    for (long mask = 0; mask < (1L << d); ++mask) {
      Eigen::VectorXd c(d);
      for (int i = 0; i < d; ++i) c(i) = (mask >> i) & 1 ? b.hi(i) : b.lo(i);
      const Eigen::VectorXd u = minv * c;
      lo = lo.cwiseMin(u);
      hi = hi.cwiseMax(u);
    }
    return std::pair{lo, hi};
  };
  if (omega.has_pieces()) {
    for (const auto& p : omega.pieces()) {
      auto [lo, hi] = unit_box(p.bounding_box());
      shapes.push_back({&p, lo, hi});
    }
  } else {
    auto [lo, hi] = unit_box(omega.grid()->box());
    shapes.push_back({nullptr, lo, hi});
  }

  const double cell_volume = std::fabs(mr.determinant());
  const double weight = cell_volume / total;
  std::map<int, std::size_t> counts;
  std::vector<long> idx(static_cast<std::size_t>(d), 0);
  Eigen::VectorXd u(d);
  for (std::size_t s = 0; s < static_cast<std::size_t>(total); ++s) {
    std::size_t rem = s;
    for (int i = 0; i < d; ++i) {
      const auto ni = static_cast<std::size_t>(n[static_cast<std::size_t>(i)]);
      u(i) = (static_cast<double>(rem % ni) + 0.5) / static_cast<double>(ni);
      rem /= ni;
    }
    const Eigen::VectorXd x = mr * u;
    int cover = 0;
    for (const auto& sh : shapes) {
      std::vector<long> kmin(static_cast<std::size_t>(d)), kmax(static_cast<std::size_t>(d));
      for (int i = 0; i < d; ++i) {
        kmin[static_cast<std::size_t>(i)] = static_cast<long>(std::floor(u(i) - sh.uhi(i) - 1e-9));
        kmax[static_cast<std::size_t>(i)] = static_cast<long>(std::ceil(u(i) - sh.ulo(i) + 1e-9));
      }
      std::vector<long> k = kmin;
      while (true) {
        Eigen::VectorXd kv(d);
        for (int i = 0; i < d; ++i) kv(i) = static_cast<double>(k[static_cast<std::size_t>(i)]);
        const Eigen::VectorXd y = x - mr * kv;
        if (sh.piece ? sh.piece->contains(y) : omega.grid()->at(y)) ++cover;
        int a = 0;
        while (a < d) {
          if (++k[static_cast<std::size_t>(a)] <= kmax[static_cast<std::size_t>(a)]) break;
          k[static_cast<std::size_t>(a)] = kmin[static_cast<std::size_t>(a)];
          ++a;
        }
        if (a == d) break;
      }
    }
    ++counts[cover];
  }

  CoverReport r;
  r.mode = CoverMode::floating;
  r.samples = static_cast<std::size_t>(total);
  r.raw_min_cover = counts.begin()->first;
  r.raw_max_cover = counts.rbegin()->first;
  const double allowance = tol * total;
  double acc = 0;
  r.min_cover = r.raw_max_cover;
  for (const auto& [c, cnt] : counts) {
    acc += static_cast<double>(cnt);
    if (acc > allowance) {
      r.min_cover = c;
      break;
    }
  }
  acc = 0;
  r.max_cover = r.raw_min_cover;
  for (auto it = counts.rbegin(); it != counts.rend(); ++it) {
    acc += static_cast<double>(it->second);
    if (acc > allowance) {
      r.max_cover = it->first;
      break;
    }
  }
  double mean = 0;
  for (const auto& [c, cnt] : counts) mean += c * static_cast<double>(cnt) / total;
  const long kstar = std::max(1L, std::lround(mean));
  for (const auto& [c, cnt] : counts) {
    r.histogram[c] = weight * static_cast<double>(cnt);
    r.defect_measure += std::fabs(static_cast<double>(c - kstar)) * weight * static_cast<double>(cnt);
  }
  classify(r);
  return r;
}

}  // namespace

CoverReport cover_classify(const Region& omega, const GeneratorMatrix& m, double h, double tol, CoverMode mode) {
  if (m.dim() != omega.dim()) throw PreconditionError("lattice and region dimensions differ");
  if (!(tol > 0)) throw PreconditionError("tolerance must be positive");
  const Box bb = omega.bounding_box();
  if (!bb.lo.allFinite() || !bb.hi.allFinite()) throw UnsupportedError("region is unbounded");
  CoverReport r;
  std::string warning;
  bool fell_back = false;
  if (mode == CoverMode::exact) {
    if (omega.dim() <= 2 && omega.is_exact() && m.is_exact()) {
      r = exact_cover(omega, m);
      r.h = 0;
      r.tol = 0;
      return r;
    }
    fell_back = true;
    if (omega.dim() > 2)
      warning = "exact cover needs d <= 2; used float sampling";
    else if (!omega.is_exact())
      warning = "region is not exactly rational; used float sampling";
    else
      warning = "lattice is not exactly rational; used float sampling";
  }
  if (!(h > 0)) throw PreconditionError("grid step must be positive");
  r = float_cover(omega, m, h, tol);
  r.h = h;
  r.tol = tol;
  r.fell_back = fell_back;
  r.warning = warning;
  return r;
}

}  // namespace tflat
