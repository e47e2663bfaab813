#include "tflat/matrix.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

#include "tflat/error.hpp"

namespace tflat {

RationalMatrix::RationalMatrix(int rows, int cols)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols), Rational(0)) {
  if (rows < 0 || cols < 0) throw ConstructionError("negative matrix size");
}

RationalMatrix RationalMatrix::identity(int n) {
  RationalMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

RationalMatrix RationalMatrix::diagonal(const RationalVector& diag) {
  const int n = static_cast<int>(diag.size());
  RationalMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = diag[static_cast<std::size_t>(i)];
  return m;
}

RationalMatrix RationalMatrix::from_rows(const std::vector<RationalVector>& rows) {
  if (rows.empty()) throw ConstructionError("empty matrix");
  const int r = static_cast<int>(rows.size());
  const int c = static_cast<int>(rows.front().size());
  RationalMatrix m(r, c);
  for (int i = 0; i < r; ++i) {
    if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != c)
      throw ConstructionError("ragged matrix rows");
    for (int j = 0; j < c; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

RationalMatrix RationalMatrix::from_real(const Eigen::MatrixXd& m) {
  RationalMatrix out(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
  for (int i = 0; i < out.rows(); ++i)
    for (int j = 0; j < out.cols(); ++j) out(i, j) = Rational(m(i, j));
  return out;
}

RationalMatrix RationalMatrix::transpose() const {
  RationalMatrix t(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

RationalMatrix RationalMatrix::operator*(const RationalMatrix& rhs) const {
  if (cols_ != rhs.rows_) throw ConstructionError("matrix product size mismatch");
  RationalMatrix out(rows_, rhs.cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < rhs.cols_; ++j) {
      Rational acc = 0;
      for (int k = 0; k < cols_; ++k) acc += (*this)(i, k) * rhs(k, j);
      out(i, j) = acc;
    }
  return out;
}

RationalMatrix RationalMatrix::operator+(const RationalMatrix& rhs) const {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw ConstructionError("matrix sum size mismatch");
  RationalMatrix out(rows_, cols_);
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] + rhs.data_[i];
  return out;
}

RationalMatrix RationalMatrix::operator-(const RationalMatrix& rhs) const {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw ConstructionError("matrix difference size mismatch");
  RationalMatrix out(rows_, cols_);
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] - rhs.data_[i];
  return out;
}

RationalMatrix RationalMatrix::scaled(const Rational& s) const {
  RationalMatrix out(rows_, cols_);
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] * s;
  return out;
}

RationalVector RationalMatrix::apply(const RationalVector& v) const {
  if (static_cast<int>(v.size()) != cols_) throw ConstructionError("matrix-vector size mismatch");
  RationalVector out(static_cast<std::size_t>(rows_), Rational(0));
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) out[static_cast<std::size_t>(i)] += (*this)(i, j) * v[static_cast<std::size_t>(j)];
  return out;
}

Rational RationalMatrix::determinant() const {
  if (rows_ != cols_) throw ConstructionError("determinant of non-square matrix");
  RationalMatrix a = *this;
  Rational det = 1;
  const int n = rows_;
  for (int col = 0; col < n; ++col) {
    int pivot = -1;
    for (int r = col; r < n; ++r)
      if (a(r, col) != 0) {
        pivot = r;
        break;
      }
    if (pivot < 0) return Rational(0);
    if (pivot != col) {
      for (int c = 0; c < n; ++c) std::swap(a(pivot, c), a(col, c));
      det = -det;
    }
    det *= a(col, col);
    for (int r = col + 1; r < n; ++r) {
      if (a(r, col) == 0) continue;
      const Rational f = a(r, col) / a(col, col);
      for (int c = col; c < n; ++c) a(r, c) -= f * a(col, c);
    }
  }
  return det;
}

RationalMatrix RationalMatrix::inverse() const {
  if (rows_ != cols_) throw ConstructionError("inverse of non-square matrix");
  const int n = rows_;
  RationalMatrix a = *this;
  RationalMatrix inv = identity(n);
  for (int col = 0; col < n; ++col) {
    int pivot = -1;
    for (int r = col; r < n; ++r)
      if (a(r, col) != 0) {
        pivot = r;
        break;
      }
    if (pivot < 0) throw ConstructionError("singular matrix");
    if (pivot != col)
      for (int c = 0; c < n; ++c) {
        std::swap(a(pivot, c), a(col, c));
        std::swap(inv(pivot, c), inv(col, c));
      }
    const Rational p = a(col, col);
    for (int c = 0; c < n; ++c) {
      a(col, c) /= p;
      inv(col, c) /= p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col || a(r, col) == 0) continue;
      const Rational f = a(r, col);
      for (int c = 0; c < n; ++c) {
        a(r, c) -= f * a(col, c);
        inv(r, c) -= f * inv(col, c);
      }
    }
  }
  return inv;
}

Integer RationalMatrix::common_denominator() const {
  Integer l = 1;
  for (const auto& q : data_) {
    Integer den = q.get_den();
    mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), den.get_mpz_t());
  }
  return l;
}

Eigen::MatrixXd RationalMatrix::to_real() const {
  Eigen::MatrixXd m(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j).get_d();
  return m;
}

bool RationalMatrix::operator==(const RationalMatrix& rhs) const {
  return rows_ == rhs.rows_ && cols_ == rhs.cols_ && data_ == rhs.data_;
}

Eigen::VectorXd to_real(const RationalVector& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i].get_d();
  return out;
}

namespace {

struct Entry {
  double value;
  std::optional<Rational> exact;
};

class MatrixLexer {
 public:
  explicit MatrixLexer(std::string_view s) : s_(s) {}

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool peek(char c) {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == c;
  }
  void expect(char c) {
    if (!peek(c)) throw ParseError(std::string("expected '") + c + "' in matrix literal '" + std::string(s_) + "'");
    ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= s_.size();
  }

  Entry entry() {
    skip_ws();
    const auto start = pos_;
    int depth = 0;
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == '(') ++depth;
      if (c == ')') --depth;
      if (depth == 0 && (c == ',' || c == ']')) break;
      ++pos_;
    }
    std::string_view tok = s_.substr(start, pos_ - start);
    while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.back()))) tok.remove_suffix(1);
    if (tok.empty()) throw ParseError("empty matrix entry in '" + std::string(s_) + "'");
    bool negative = false;
    std::string_view body = tok;
    if (body.front() == '-' || body.front() == '+') {
      negative = body.front() == '-';
      body.remove_prefix(1);
    }
    if (body.substr(0, 5) == "sqrt(" && body.back() == ')') {
      const Rational arg = parse_rational(body.substr(5, body.size() - 6));
      if (arg < 0) throw ParseError("sqrt of negative number");
      const double v = std::sqrt(arg.get_d());
      return {negative ? -v : v, std::nullopt};
    }
    const Rational q = parse_rational(tok);
    return {q.get_d(), q};
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

ParsedMatrix parse_matrix(std::string_view text) {
  MatrixLexer lex(text);
  std::vector<std::vector<Entry>> rows;
  if (!lex.peek('[')) {
    rows.push_back({lex.entry()});
    if (!lex.at_end()) throw ParseError("trailing characters in matrix literal");
  } else {
    lex.expect('[');
    if (!lex.peek('[')) {
      // "[a]" is a 1x1 matrix
      std::vector<Entry> row{lex.entry()};
      lex.expect(']');
      rows.push_back(std::move(row));
    } else {
      while (true) {
        lex.expect('[');
        std::vector<Entry> row;
        while (true) {
          row.push_back(lex.entry());
          if (lex.peek(',')) {
            lex.expect(',');
            continue;
          }
          lex.expect(']');
          break;
        }
        rows.push_back(std::move(row));
        if (lex.peek(',')) {
          lex.expect(',');
          continue;
        }
        lex.expect(']');
        break;
      }
    }
    if (!lex.at_end()) throw ParseError("trailing characters in matrix literal");
  }
  const auto n_rows = rows.size();
  const auto n_cols = rows.front().size();
  for (const auto& r : rows)
    if (r.size() != n_cols) throw ParseError("ragged matrix literal '" + std::string(text) + "'");

  ParsedMatrix out;
  out.real.resize(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_cols));
  bool exact = true;
  for (std::size_t i = 0; i < n_rows; ++i)
    for (std::size_t j = 0; j < n_cols; ++j) {
      out.real(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].value;
      exact = exact && rows[i][j].exact.has_value();
    }
  if (exact) {
    RationalMatrix q(static_cast<int>(n_rows), static_cast<int>(n_cols));
    for (std::size_t i = 0; i < n_rows; ++i)
      for (std::size_t j = 0; j < n_cols; ++j) q(static_cast<int>(i), static_cast<int>(j)) = *rows[i][j].exact;
    out.exact = std::move(q);
  }
  return out;
}

std::string format_matrix(const RationalMatrix& m) {
  std::ostringstream os;
  os << '[';
  for (int i = 0; i < m.rows(); ++i) {
    os << (i ? ",[" : "[");
    for (int j = 0; j < m.cols(); ++j) os << (j ? "," : "") << to_string(m(i, j));
    os << ']';
  }
  os << ']';
  return os.str();
}

std::string format_matrix(const Eigen::MatrixXd& m) {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    os << (i ? ",[" : "[");
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << m(i, j);
    os << ']';
  }
  os << ']';
  return os.str();
}

}  // namespace tflat
