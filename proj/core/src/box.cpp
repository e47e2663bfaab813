#include "tflat/box.hpp"

#include "tflat/error.hpp"

namespace tflat {

Box Box::cube(int d, double lo, double hi, bool half_open) {
  return Box{Eigen::VectorXd::Constant(d, lo), Eigen::VectorXd::Constant(d, hi), half_open};
}

double Box::volume() const {
  double v = 1.0;
  for (Eigen::Index i = 0; i < lo.size(); ++i) v *= std::max(0.0, hi(i) - lo(i));
  return v;
}

bool Box::contains(const Eigen::VectorXd& p, double tol) const {
  if (p.size() != lo.size()) throw PreconditionError("point/box dimension mismatch");
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (p(i) < lo(i) - tol) return false;
    if (half_open ? p(i) >= hi(i) - tol : p(i) > hi(i) + tol) return false;
  }
  return true;
}

Box Box::hull(const Box& other) const {
  return Box{lo.cwiseMin(other.lo), hi.cwiseMax(other.hi), half_open && other.half_open};
}

Box Box::translated(const Eigen::VectorXd& v) const { return Box{lo + v, hi + v, half_open}; }

Box Box::inflated(double r) const {
  return Box{lo.array() - r, hi.array() + r, half_open};
}

}  // namespace tflat
