#include "tflat/rational.hpp"

#include <cctype>
#include <cmath>

#include "tflat/error.hpp"

namespace tflat {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

Rational parse_decimal(std::string_view s) {
  bool negative = false;
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  long exponent = 0;
  if (const auto e = s.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view exp_part = s.substr(e + 1);
    bool exp_negative = false;
    if (!exp_part.empty() && (exp_part.front() == '+' || exp_part.front() == '-')) {
      exp_negative = exp_part.front() == '-';
      exp_part.remove_prefix(1);
    }
    if (!all_digits(exp_part) || exp_part.size() > 6) throw ParseError("bad exponent in number");
    exponent = std::stol(std::string(exp_part));
    if (exp_negative) exponent = -exponent;
    s = s.substr(0, e);
  }
  std::string digits;
  long frac_digits = 0;
  if (const auto dot = s.find('.'); dot != std::string_view::npos) {
    const auto int_part = s.substr(0, dot);
    const auto frac_part = s.substr(dot + 1);
    if ((!int_part.empty() && !all_digits(int_part)) || (!frac_part.empty() && !all_digits(frac_part)) ||
        (int_part.empty() && frac_part.empty()))
      throw ParseError("malformed decimal literal");
    digits = std::string(int_part) + std::string(frac_part);
    frac_digits = static_cast<long>(frac_part.size());
  } else {
    if (!all_digits(s)) throw ParseError("malformed number '" + std::string(s) + "'");
    digits = std::string(s);
  }
  // base 10: the default base 0 reads a leading zero as octal
  Integer num(digits, 10);
  Integer scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(exponent - frac_digits)));
  Rational q;
  if (exponent - frac_digits >= 0)
    q = Rational(num * scale);
  else
    q = Rational(num, scale);
  q.canonicalize();
  return negative ? Rational(-q) : q;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const auto s = trim(text);
  if (s.empty()) throw ParseError("empty number");
  if (const auto slash = s.find('/'); slash != std::string_view::npos) {
    const Rational num = parse_decimal(trim(s.substr(0, slash)));
    const Rational den = parse_decimal(trim(s.substr(slash + 1)));
    if (den == 0) throw ParseError("zero denominator in '" + std::string(s) + "'");
    return num / den;
  }
  return parse_decimal(s);
}

std::string to_string(const Rational& q) { return q.get_str(); }

std::optional<Rational> rationalize(double x, long max_den, double tol) {
  if (!std::isfinite(x)) return std::nullopt;
  // Convergents p_k/q_k of the continued fraction of x.
  long double rem = x;
  Integer p_prev = 1, q_prev = 0;
  Integer p = static_cast<long>(std::floor(rem)), q = 1;
  long double frac = rem - std::floor(rem);
  for (int iter = 0; iter < 64; ++iter) {
    const Rational cand(p, q);
    if (std::fabs(cand.get_d() - x) <= tol) {
      Rational r = cand;
      r.canonicalize();
      return r;
    }
    if (frac < 1e-18L) break;
    rem = 1.0L / frac;
    const long a = static_cast<long>(std::floor(rem));
    frac = rem - std::floor(rem);
    Integer p_next = a * p + p_prev;
    Integer q_next = a * q + q_prev;
    if (q_next > max_den) break;
    p_prev = p;
    q_prev = q;
    p = p_next;
    q = q_next;
  }
  const Rational last(p, q);
  if (std::fabs(last.get_d() - x) <= tol) {
    Rational r = last;
    r.canonicalize();
    return r;
  }
  return std::nullopt;
}

std::optional<Integer> exact_sqrt(const Integer& v) {
  if (v < 0) return std::nullopt;
  Integer root;
  mpz_sqrt(root.get_mpz_t(), v.get_mpz_t());
  if (root * root == v) return root;
  return std::nullopt;
}

}  // namespace tflat
