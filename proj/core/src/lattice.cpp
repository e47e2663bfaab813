#include "tflat/lattice.hpp"

#include <cmath>
#include <functional>

#include "tflat/config.hpp"
#include "tflat/error.hpp"

namespace tflat {

GeneratorMatrix::GeneratorMatrix(const Eigen::MatrixXd& m) : real_(m) { validate(); }

GeneratorMatrix::GeneratorMatrix(const RationalMatrix& q) : real_(q.to_real()), exact_(q) { validate(); }

GeneratorMatrix::GeneratorMatrix(const Eigen::MatrixXd& m, const RationalMatrix& q) : real_(m), exact_(q) {
  if (q.rows() != m.rows() || q.cols() != m.cols()) throw ConstructionError("exact and float views differ in size");
  const Eigen::MatrixXd diff = q.to_real() - m;
  if (diff.cwiseAbs().maxCoeff() > 1e-12) throw ConstructionError("exact and float views disagree");
  validate();
}

void GeneratorMatrix::validate() const {
  if (real_.rows() == 0 || real_.rows() != real_.cols()) throw ConstructionError("generator must be square and non-empty");
  if (!real_.allFinite()) throw ConstructionError("generator has non-finite entries");
  if (exact_) {
    if (exact_->determinant() == 0) throw ConstructionError("singular generator");
    return;
  }
  // Relative test: det against the product of column norms (Hadamard bound).
  double hadamard = 1.0;
  for (Eigen::Index j = 0; j < real_.cols(); ++j) hadamard *= real_.col(j).norm();
  if (hadamard == 0.0 || std::fabs(real_.determinant()) <= 1e-13 * hadamard)
    throw ConstructionError("singular generator");
}

GeneratorMatrix GeneratorMatrix::parse(std::string_view text) { return from_parsed(parse_matrix(text)); }

GeneratorMatrix GeneratorMatrix::from_parsed(const ParsedMatrix& p) {
  if (p.exact) return GeneratorMatrix(*p.exact);
  return GeneratorMatrix(p.real);
}

GeneratorMatrix GeneratorMatrix::identity(int d) { return GeneratorMatrix(RationalMatrix::identity(d)); }

GeneratorMatrix GeneratorMatrix::diagonal(const RationalVector& diag) {
  return GeneratorMatrix(RationalMatrix::diagonal(diag));
}

double GeneratorMatrix::det() const {
  if (exact_) return exact_->determinant().get_d();
  return real_.determinant();
}

std::optional<Rational> GeneratorMatrix::exact_det() const {
  if (!exact_) return std::nullopt;
  return exact_->determinant();
}

GeneratorMatrix GeneratorMatrix::inverse() const {
  if (exact_) return GeneratorMatrix(exact_->inverse());
  return GeneratorMatrix(Eigen::MatrixXd(real_.inverse()));
}

GeneratorMatrix GeneratorMatrix::transpose() const {
  if (exact_) return GeneratorMatrix(exact_->transpose());
  return GeneratorMatrix(Eigen::MatrixXd(real_.transpose()));
}

GeneratorMatrix GeneratorMatrix::inverse_transpose() const {
  if (exact_) return GeneratorMatrix(exact_->inverse().transpose());
  return GeneratorMatrix(Eigen::MatrixXd(real_.inverse().transpose()));
}

GeneratorMatrix GeneratorMatrix::operator*(const GeneratorMatrix& rhs) const {
  if (dim() != rhs.dim()) throw ConstructionError("generator dimension mismatch");
  if (exact_ && rhs.exact_) return GeneratorMatrix((*exact_) * (*rhs.exact_));
  return GeneratorMatrix(Eigen::MatrixXd(real_ * rhs.real_));
}

GeneratorMatrix GeneratorMatrix::scaled(double s) const { return GeneratorMatrix(Eigen::MatrixXd(real_ * s)); }

GeneratorMatrix GeneratorMatrix::scaled(const Rational& s) const {
  if (exact_) return GeneratorMatrix(exact_->scaled(s));
  return scaled(s.get_d());
}

SeparableTFLattice::SeparableTFLattice(GeneratorMatrix a, GeneratorMatrix b) : a_(std::move(a)), b_(std::move(b)) {
  if (a_.dim() != b_.dim()) throw ConstructionError("time and frequency generators differ in dimension");
}

double density(const GeneratorMatrix& m) { return 1.0 / std::fabs(m.det()); }

double density(const SeparableTFLattice& l) { return 1.0 / std::fabs(l.A().det() * l.B().det()); }

std::optional<Rational> exact_density(const GeneratorMatrix& m) {
  const auto d = m.exact_det();
  if (!d) return std::nullopt;
  return Rational(1) / abs(*d);
}

std::optional<Rational> exact_density(const SeparableTFLattice& l) {
  const auto da = l.A().exact_det();
  const auto db = l.B().exact_det();
  if (!da || !db) return std::nullopt;
  return Rational(1) / abs(Rational(*da * *db));
}

GeneratorMatrix dual(const GeneratorMatrix& m) { return m.inverse_transpose(); }

SeparableTFLattice adjoint_separable(const SeparableTFLattice& l) {
  return SeparableTFLattice(dual(l.B()), dual(l.A()));
}

Eigen::MatrixXd symplectic_form(int d) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  j.topRightCorner(d, d) = Eigen::MatrixXd::Identity(d, d);
  j.bottomLeftCorner(d, d) = -Eigen::MatrixXd::Identity(d, d);
  return j;
}

bool is_symplectic(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() != m.cols() || m.rows() % 2 != 0 || m.rows() == 0)
    throw PreconditionError("symplectic test needs an even square matrix");
  const Eigen::MatrixXd j = symplectic_form(static_cast<int>(m.rows() / 2));
  return (m.transpose() * j * m - j).cwiseAbs().maxCoeff() <= tol;
}

bool is_symplectic(const RationalMatrix& m) {
  if (m.rows() != m.cols() || m.rows() % 2 != 0 || m.rows() == 0)
    throw PreconditionError("symplectic test needs an even square matrix");
  const int d = m.rows() / 2;
  RationalMatrix j(2 * d, 2 * d);
  for (int i = 0; i < d; ++i) {
    j(i, d + i) = 1;
    j(d + i, i) = -1;
  }
  return m.transpose() * j * m == j;
}

std::vector<std::pair<long, long>> coefficient_range(const Eigen::MatrixXd& m, const Box& box) {
  const int d = static_cast<int>(m.rows());
  if (box.dim() != d) throw PreconditionError("box dimension does not match generator");
  if (!box.lo.allFinite() || !box.hi.allFinite()) throw PreconditionError("box must be bounded");
  const Eigen::MatrixXd inv = m.inverse();
  Eigen::VectorXd kmin = Eigen::VectorXd::Constant(d, INFINITY);
  Eigen::VectorXd kmax = Eigen::VectorXd::Constant(d, -INFINITY);
  for (long corner = 0; corner < (1L << d); ++corner) {
    Eigen::VectorXd c(d);
    for (int i = 0; i < d; ++i) c(i) = (corner >> i) & 1 ? box.hi(i) : box.lo(i);
    const Eigen::VectorXd k = inv * c;
    kmin = kmin.cwiseMin(k);
    kmax = kmax.cwiseMax(k);
  }
  std::vector<std::pair<long, long>> range(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    // one unit of slack absorbs rounding in the corner images
    const double lo = std::floor(kmin(i)) - 1;
    const double hi = std::ceil(kmax(i)) + 1;
    if (std::fabs(lo) > 4e18 || std::fabs(hi) > 4e18) throw ResourceError("lattice coefficient range overflows");
    range[static_cast<std::size_t>(i)] = {static_cast<long>(lo), static_cast<long>(hi)};
  }
  return range;
}

std::vector<LatticePoint> enumerate_points(const GeneratorMatrix& m, const Box& box) {
  const int d = m.dim();
  const auto range = coefficient_range(m.real(), box);
  const double cap = static_cast<double>(limits().max_lattice_points);
  const double expected = box.volume() / std::fabs(m.det());
  if (expected > cap) throw ResourceError("box holds about " + std::to_string(expected) + " lattice points, over the cap");
  double sweep = 1.0;
  for (const auto& [lo, hi] : range) sweep *= static_cast<double>(hi - lo + 1);
  // A very skewed generator can make the coefficient box much larger than the point count.
  if (sweep > 64.0 * cap + 1e6) throw ResourceError("coefficient sweep exceeds the lattice point cap");

  std::optional<RationalVector> lo_q, hi_q;
  if (m.is_exact()) {
    lo_q.emplace();
    hi_q.emplace();
    for (int i = 0; i < d; ++i) {
      lo_q->emplace_back(box.lo(i));
      hi_q->emplace_back(box.hi(i));
    }
  }

  std::vector<LatticePoint> out;
  std::vector<long> k(static_cast<std::size_t>(d));
  RationalVector kq(static_cast<std::size_t>(d));
  std::function<void(int)> rec = [&](int axis) {
    if (axis == d) {
      Eigen::VectorXd kv(d);
      for (int i = 0; i < d; ++i) kv(i) = static_cast<double>(k[static_cast<std::size_t>(i)]);
      if (m.is_exact()) {
        for (int i = 0; i < d; ++i) kq[static_cast<std::size_t>(i)] = Rational(k[static_cast<std::size_t>(i)]);
        const RationalVector xq = m.exact()->apply(kq);
        for (int i = 0; i < d; ++i) {
          const auto& x = xq[static_cast<std::size_t>(i)];
          if (x < (*lo_q)[static_cast<std::size_t>(i)]) return;
          if (box.half_open ? x >= (*hi_q)[static_cast<std::size_t>(i)] : x > (*hi_q)[static_cast<std::size_t>(i)])
            return;
        }
        out.push_back({k, to_real(xq)});
      } else {
        const Eigen::VectorXd x = m.real() * kv;
        const double tol = 1e-12 * (1.0 + x.cwiseAbs().maxCoeff());
        if (!box.contains(x, tol)) return;
        out.push_back({k, x});
      }
      return;
    }
    const auto [lo, hi] = range[static_cast<std::size_t>(axis)];
    for (long v = lo; v <= hi; ++v) {
      k[static_cast<std::size_t>(axis)] = v;
      rec(axis + 1);
    }
  };
  rec(0);
  return out;
}

namespace {

void swap_columns(RationalMatrix& h, int a, int b) {
  for (int r = 0; r < h.rows(); ++r) std::swap(h(r, a), h(r, b));
}

// col_a <- p*col_a + q*col_b, col_b <- r*col_a + s*col_b (simultaneously)
void combine_columns(RationalMatrix& h, int a, int b, const Integer& p, const Integer& q, const Integer& r,
                     const Integer& s) {
  for (int row = 0; row < h.rows(); ++row) {
    const Rational x = h(row, a);
    const Rational y = h(row, b);
    h(row, a) = Rational(p) * x + Rational(q) * y;
    h(row, b) = Rational(r) * x + Rational(s) * y;
  }
}

Integer as_integer(const Rational& q) {
  if (q.get_den() != 1) throw PreconditionError("Hermite normal form needs an integer matrix");
  return q.get_num();
}

}  // namespace

RationalMatrix hermite_normal_form(const RationalMatrix& integer_matrix) {
  const int n = integer_matrix.rows();
  if (n != integer_matrix.cols()) throw PreconditionError("Hermite normal form needs a square matrix");
  RationalMatrix h = integer_matrix;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) (void)as_integer(h(i, j));

  for (int row = 0; row < n; ++row) {
    // clear h(row, j) for j > row by extended-gcd column steps
    for (int j = row + 1; j < n; ++j) {
      const Integer a = as_integer(h(row, row));
      const Integer b = as_integer(h(row, j));
      if (b == 0) continue;
      if (a == 0) {
        swap_columns(h, row, j);
        continue;
      }
      Integer g, s, t;
      mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
      // [a b] * [[s, -b/g], [t, a/g]] = [g 0], determinant 1
      const Integer bg = b / g;
      const Integer ag = a / g;
      combine_columns(h, row, j, s, t, Integer(-bg), ag);
    }
    if (h(row, row) == 0) throw PreconditionError("Hermite normal form of a singular matrix");
    if (h(row, row) < 0)
      for (int r = 0; r < n; ++r) h(r, row) = -h(r, row);
    const Integer diag = as_integer(h(row, row));
    for (int j = 0; j < row; ++j) {
      const Integer v = as_integer(h(row, j));
      Integer q;
      mpz_fdiv_q(q.get_mpz_t(), v.get_mpz_t(), diag.get_mpz_t());
      if (q == 0) continue;
      for (int r = 0; r < n; ++r) h(r, j) -= Rational(q) * h(r, row);
    }
  }
  return h;
}

RationalMatrix canonical_basis(const RationalMatrix& m) {
  const Integer den = m.common_denominator();
  const Rational scale(den);
  return hermite_normal_form(m.scaled(scale)).scaled(Rational(1) / scale);
}

namespace {

std::pair<RationalMatrix, bool> exact_or_rationalized(const GeneratorMatrix& g) {
  if (g.exact()) return {*g.exact(), false};
  const Eigen::MatrixXd& m = g.real();
  RationalMatrix q(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      const auto r = rationalize(v, 1'000'000, 1e-9 * (1.0 + std::fabs(v)));
      if (!r) throw UnsupportedError("entry has no rational approximation with denominator <= 1e6");
      q(static_cast<int>(i), static_cast<int>(j)) = *r;
    }
  return {q, true};
}

}  // namespace

LatticeEquality same_lattice(const GeneratorMatrix& a, const GeneratorMatrix& b) {
  if (a.dim() != b.dim()) return {false, false};
  const auto [qa, approx_a] = exact_or_rationalized(a);
  const auto [qb, approx_b] = exact_or_rationalized(b);
  return {canonical_basis(qa) == canonical_basis(qb), approx_a || approx_b};
}

}  // namespace tflat
