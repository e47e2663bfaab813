#include "tflat/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "tflat/error.hpp"

namespace tflat {
namespace {

double segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab - p).norm();
}

double snap(double s) {
  const double r = std::round(s);
  return std::fabs(s - r) <= 1e-12 ? r : s;
}

}  // namespace

Parallelepiped::Parallelepiped(const Eigen::VectorXd& offset, const Eigen::MatrixXd& matrix)
    : offset_(offset), matrix_(matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() != offset.size() || offset.size() == 0)
    throw ConstructionError("parallelepiped offset/matrix size mismatch");
  if (!matrix.allFinite() || !offset.allFinite()) throw ConstructionError("parallelepiped has non-finite data");
  double hadamard = 1.0;
  for (Eigen::Index j = 0; j < matrix.cols(); ++j) hadamard *= matrix.col(j).norm();
  if (hadamard == 0.0 || std::fabs(matrix.determinant()) <= 1e-13 * hadamard)
    throw ConstructionError("degenerate parallelepiped");
  inverse_ = matrix.inverse();
}

Parallelepiped::Parallelepiped(const RationalVector& offset, const RationalMatrix& matrix)
    : Parallelepiped(to_real(offset), matrix.to_real()) {
  if (matrix.determinant() == 0) throw ConstructionError("degenerate parallelepiped");
  // mpq_class(int, int) does not canonicalize, and comparisons assume it
  offset_q_ = offset;
  for (auto& v : *offset_q_) v.canonicalize();
  matrix_q_ = matrix;
  for (int i = 0; i < matrix.rows(); ++i)
    for (int j = 0; j < matrix.cols(); ++j) (*matrix_q_)(i, j).canonicalize();
}

double Parallelepiped::measure() const {
  if (matrix_q_) return Rational(abs(matrix_q_->determinant())).get_d();
  return std::fabs(matrix_.determinant());
}

std::optional<Rational> Parallelepiped::exact_measure() const {
  if (!matrix_q_) return std::nullopt;
  return Rational(abs(matrix_q_->determinant()));
}

Eigen::VectorXd Parallelepiped::local(const Eigen::VectorXd& p) const { return inverse_ * (p - offset_); }

bool Parallelepiped::contains(const Eigen::VectorXd& p) const {
  const Eigen::VectorXd s = local(p);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double v = snap(s(i));
    if (v < 0.0 || v >= 1.0) return false;
  }
  return true;
}

bool Parallelepiped::contains_closed(const Eigen::VectorXd& p, double slack) const {
  const Eigen::VectorXd s = local(p);
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) < -slack || s(i) > 1.0 + slack) return false;
  return true;
}

double Parallelepiped::distance(const Eigen::VectorXd& p) const {
  const int d = dim();
  if (d == 1) {
    const double a = std::min(offset_(0), offset_(0) + matrix_(0, 0));
    const double b = std::max(offset_(0), offset_(0) + matrix_(0, 0));
    if (p(0) < a) return a - p(0);
    if (p(0) > b) return p(0) - b;
    return 0.0;
  }
  if (contains_closed(p, 0.0)) return 0.0;
  if (d == 2) {
    const auto poly = polygon(*this);
    double best = INFINITY;
    for (std::size_t i = 0; i < poly.size(); ++i)
      best = std::min(best, segment_distance(p, poly[i], poly[(i + 1) % poly.size()]));
    return best;
  }
  // Box-constrained least squares min ||offset + M s - p||, s in [0,1]^d, by
  // cyclic coordinate descent (convex, so it converges to the minimum).
  Eigen::VectorXd s = local(p).cwiseMax(0.0).cwiseMin(1.0);
  Eigen::VectorXd r = offset_ + matrix_ * s - p;
  for (int sweep = 0; sweep < 500; ++sweep) {
    double moved = 0.0;
    for (int i = 0; i < d; ++i) {
      const double cc = matrix_.col(i).squaredNorm();
      const double target = std::clamp(s(i) - matrix_.col(i).dot(r) / cc, 0.0, 1.0);
      const double delta = target - s(i);
      if (delta != 0.0) {
        r += delta * matrix_.col(i);
        s(i) = target;
        moved = std::max(moved, std::fabs(delta));
      }
    }
    if (moved < 1e-14) break;
  }
  return r.norm();
}

std::vector<Eigen::VectorXd> Parallelepiped::vertices() const {
  const int d = dim();
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(1) << d);
  for (long mask = 0; mask < (1L << d); ++mask) {
    Eigen::VectorXd v = offset_;
    for (int i = 0; i < d; ++i)
      if ((mask >> i) & 1) v += matrix_.col(i);
    out.push_back(v);
  }
  return out;
}

Box Parallelepiped::bounding_box() const {
  const auto vs = vertices();
  Box b{vs.front(), vs.front(), false};
  for (const auto& v : vs) {
    b.lo = b.lo.cwiseMin(v);
    b.hi = b.hi.cwiseMax(v);
  }
  return b;
}

Parallelepiped Parallelepiped::translated(const Eigen::VectorXd& v) const {
  return Parallelepiped(Eigen::VectorXd(offset_ + v), matrix_);
}

Parallelepiped Parallelepiped::translated(const RationalVector& v) const {
  if (!is_exact()) return translated(to_real(v));
  RationalVector o = *offset_q_;
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += v[i];
  return Parallelepiped(o, *matrix_q_);
}

Parallelepiped Parallelepiped::dilated(const Eigen::VectorXd& center, double gamma) const {
  if (!(gamma > 0)) throw PreconditionError("dilation factor must be positive");
  return Parallelepiped(Eigen::VectorXd(center + gamma * (offset_ - center)), Eigen::MatrixXd(gamma * matrix_));
}

Parallelepiped Parallelepiped::dilated(const RationalVector& center, const Rational& gamma) const {
  if (gamma <= 0) throw PreconditionError("dilation factor must be positive");
  if (!is_exact()) return dilated(to_real(center), gamma.get_d());
  RationalVector o(offset_q_->size());
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = center[i] + gamma * ((*offset_q_)[i] - center[i]);
  return Parallelepiped(o, matrix_q_->scaled(gamma));
}

Parallelepiped Parallelepiped::transformed(const Eigen::MatrixXd& l) const {
  return Parallelepiped(Eigen::VectorXd(l * offset_), Eigen::MatrixXd(l * matrix_));
}

std::vector<Eigen::Vector2d> polygon(const Parallelepiped& p) {
  if (p.dim() != 2) throw PreconditionError("polygon view needs d = 2");
  const Eigen::Vector2d o = p.offset();
  const Eigen::Vector2d a = p.matrix().col(0);
  const Eigen::Vector2d b = p.matrix().col(1);
  std::vector<Eigen::Vector2d> v{o, o + a, o + a + b, o + b};
  if (p.matrix().determinant() < 0) std::reverse(v.begin(), v.end());
  return v;
}

namespace {

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

double polygon_area(const std::vector<Eigen::Vector2d>& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += cross(p[i], p[(i + 1) % p.size()]);
  return 0.5 * s;
}

}  // namespace

double convex_overlap_area(const std::vector<Eigen::Vector2d>& p, const std::vector<Eigen::Vector2d>& q) {
  // Sutherland-Hodgman: clip p by every edge of the counter-clockwise polygon q.
  std::vector<Eigen::Vector2d> out = p;
  for (std::size_t e = 0; e < q.size() && !out.empty(); ++e) {
    const Eigen::Vector2d a = q[e];
    const Eigen::Vector2d b = q[(e + 1) % q.size()];
    const auto side = [&](const Eigen::Vector2d& x) { return cross(b - a, x - a); };
    std::vector<Eigen::Vector2d> next;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const Eigen::Vector2d& cur = out[i];
      const Eigen::Vector2d& prev = out[(i + out.size() - 1) % out.size()];
      const double sc = side(cur);
      const double sp = side(prev);
      if (sc >= 0) {
        if (sp < 0) next.push_back(prev + (cur - prev) * (sp / (sp - sc)));
        next.push_back(cur);
      } else if (sp >= 0) {
        next.push_back(prev + (cur - prev) * (sp / (sp - sc)));
      }
    }
    out = std::move(next);
  }
  if (out.size() < 3) return 0.0;
  return std::fabs(polygon_area(out));
}

}  // namespace tflat
