#include "tflat/pipeline.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "tflat/error.hpp"
#include "tflat/io.hpp"

namespace tflat {

namespace {

// Strictly inside the bound; equality (up to rounding) does not count.
bool below(double x, double bound) { return x < bound * (1 - 1e-12); }

std::optional<long> as_integer(double x, double tol) {
  const double r = std::round(x);
  if (std::fabs(x - r) > tol * std::max(1.0, std::fabs(x))) return std::nullopt;
  if (std::fabs(r) > 1e9) return std::nullopt;
  return static_cast<long>(r);
}

std::optional<long> integer_sqrt(long v) {
  if (v < 1) return std::nullopt;
  const auto r = static_cast<long>(std::llround(std::sqrt(static_cast<double>(v))));
  for (long c = std::max(1L, r - 1); c <= r + 1; ++c)
    if (c * c == v) return c;
  return std::nullopt;
}

// Triangular forms: the off-diagonal entry is m n alpha, the far diagonal n^2 alpha.
std::optional<FormMatch> match_triangular(const Eigen::Matrix2d& p, SeparableForm form, double tol) {
  const double alpha = form == SeparableForm::upper ? p(0, 0) : p(1, 1);
  const double far = form == SeparableForm::upper ? p(1, 1) : p(0, 0);
  const double off = form == SeparableForm::upper ? p(0, 1) : p(1, 0);
  if (alpha == 0) return std::nullopt;
  const auto nn = as_integer(far / alpha, tol);
  if (!nn) return std::nullopt;
  const auto n = integer_sqrt(*nn);
  if (!n) return std::nullopt;
  const auto mn = as_integer(off / alpha, tol);
  if (!mn || *mn % *n != 0) return std::nullopt;
  const long m = *mn / *n;
  if (std::gcd(m, *n) != 1) return std::nullopt;
  if (!below(std::fabs(alpha), 1.0 / static_cast<double>(*n))) return std::nullopt;
  FormMatch f;
  f.form = form;
  f.alpha = alpha;
  f.m = static_cast<int>(m);
  f.n = static_cast<int>(*n);
  return f;
}

RationalMatrix form_pattern(const FormMatch& f) {
  const Rational m(f.m), n(f.n);
  RationalMatrix q(2, 2);
  switch (f.form) {
    case SeparableForm::scalar:
      q(0, 0) = 1;
      q(1, 1) = 1;
      break;
    case SeparableForm::diagonal:
      q(0, 0) = m * m;
      q(1, 1) = n * n;
      break;
    case SeparableForm::upper:
      q(0, 0) = 1;
      q(0, 1) = m * n;
      q(1, 1) = n * n;
      break;
    case SeparableForm::lower:
      q(0, 0) = n * n;
      q(1, 0) = m * n;
      q(1, 1) = 1;
      break;
  }
  return q;
}

bool same_lattice_data(const TFLattice& x, const TFLattice& y) {
  const auto close = [](const Eigen::MatrixXd& u, const Eigen::MatrixXd& v) {
    return (u - v).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, v.cwiseAbs().maxCoeff());
  };
  if (!close(x.A.real(), y.A.real()) || !close(x.B.real(), y.B.real())) return false;
  if (x.D.has_value() != y.D.has_value()) return false;
  return !x.D || close(*x.D, *y.D);
}

bool is_identity(const Eigen::MatrixXd& m) { return m.isIdentity(0.0); }

GeneratorMatrix diag2(double x, double y) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(0, 0) = x;
  m(1, 1) = y;
  return GeneratorMatrix(m);
}

std::string rational_text(double x, const PipelineOptions& opt) {
  const auto q = rationalize(x, opt.max_denominator, opt.rational_tol);
  return q ? to_string(*q) : std::string();
}

}  // namespace

std::string form_name(SeparableForm f) {
  switch (f) {
    case SeparableForm::scalar:
      return "scalar";
    case SeparableForm::diagonal:
      return "diagonal";
    case SeparableForm::upper:
      return "upper";
    case SeparableForm::lower:
      break;
  }
  return "lower";
}

std::optional<FormMatch> match_form(const Eigen::Matrix2d& p, const PipelineOptions& opt) {
  const double scale = p.cwiseAbs().maxCoeff();
  if (!(scale > 0) || !std::isfinite(scale)) return std::nullopt;
  const double det = p.determinant();
  if (!(std::fabs(det) > 0)) return std::nullopt;
  const double tol = opt.rational_tol;
  const bool upper_zero = std::fabs(p(0, 1)) <= 1e-12 * scale;
  const bool lower_zero = std::fabs(p(1, 0)) <= 1e-12 * scale;

  std::optional<FormMatch> found;
  if (upper_zero && lower_zero) {
    if (std::fabs(p(0, 0) - p(1, 1)) <= tol * scale) {
      const double alpha = 0.5 * (p(0, 0) + p(1, 1));
      if (below(std::fabs(alpha), 1.0)) {
        found = FormMatch{};
        found->form = SeparableForm::scalar;
        found->alpha = alpha;
      }
    } else if (p(0, 0) * p(1, 1) > 0) {
      const auto q = rationalize(std::sqrt(p(0, 0) / p(1, 1)), opt.max_denominator, tol);
      if (q && q->get_num().fits_sint_p() && q->get_den().fits_sint_p()) {
        const int m = static_cast<int>(q->get_num().get_si());
        const int n = static_cast<int>(q->get_den().get_si());
        const double alpha = p(1, 1) / (static_cast<double>(n) * n);
        if (below(std::fabs(alpha) * m * n, 1.0)) {
          found = FormMatch{};
          found->form = SeparableForm::diagonal;
          found->alpha = alpha;
          found->m = m;
          found->n = n;
        }
      }
    }
  }
  if (!found && lower_zero) found = match_triangular(p, SeparableForm::upper, tol);
  if (!found && upper_zero) found = match_triangular(p, SeparableForm::lower, tol);
  if (!found) return std::nullopt;
  found->product = p;
  found->rescaled = p / std::sqrt(std::fabs(det));
  return found;
}

// ---- constructions ---------------------------------------------------------------------

PipelineDescriptor separable_reduce(const GeneratorMatrix& a, const GeneratorMatrix& b, const PipelineOptions& opt) {
  if (a.dim() != 2 || b.dim() != 2) throw UnsupportedError("the separable construction is two-dimensional");
  const Eigen::Matrix2d p = b.real().transpose() * a.real();
  const auto match = match_form(p, opt);
  if (!match) {
    std::ostringstream msg;
    msg << "B^T A = " << format_matrix(Eigen::MatrixXd(p)) << " matches none of the separable forms"
        << " (denominator bound " << opt.max_denominator << ", residual " << opt.rational_tol << ")";
    throw Unclassified(msg.str());
  }

  PipelineDescriptor out;
  out.route = "separable";
  out.options = opt;
  out.form = match;
  out.target = TFLattice(a, b);

  // exact B^T A when alpha is a short rational, so the domain certificates run in exact arithmetic
  const RationalMatrix pattern = form_pattern(*match);
  const auto alpha_q = rationalize(match->alpha, opt.max_denominator, 1e-14 * std::max(1.0, std::fabs(match->alpha)));
  const GeneratorMatrix product = alpha_q ? GeneratorMatrix(pattern.scaled(*alpha_q)) : GeneratorMatrix(Eigen::MatrixXd(p));
  if (alpha_q) out.notes["alpha_exact"] = to_string(*alpha_q);

  // the triangular lattice (1/n, m; 0, n) Z^2 only depends on m modulo n
  int m_fd = match->m;
  if (match->form == SeparableForm::upper || match->form == SeparableForm::lower) {
    m_fd = ((match->m % match->n) + match->n) % match->n;
    if (m_fd == 0) m_fd = 1;
  }
  switch (match->form) {
    case SeparableForm::scalar:
      out.common_domain = Region::box(RationalVector{0, 0}, RationalVector{1, 1});
      break;
    case SeparableForm::diagonal:
    case SeparableForm::upper:
      out.common_domain = common_fd_rational(m_fd, match->n, FdVariant::upper).omega;
      break;
    case SeparableForm::lower:
      out.common_domain = common_fd_rational(m_fd, match->n, FdVariant::lower).omega;
      break;
  }
  if (m_fd != match->m) out.notes["m_for_domain"] = m_fd;
  const auto c = out.common_domain->exact_centroid();
  out.center = c ? to_real(*c) : out.common_domain->centroid();

  ScaledDomain sd = scaled_common_domain(product, GeneratorMatrix::identity(2), *out.common_domain, out.center, opt.h,
                                         opt.iterations);
  out.omega = std::move(sd.omega);
  out.eps = sd.eps;
  out.gamma = sd.gamma;
  out.reduced = TFLattice(product, GeneratorMatrix::identity(2));

  const GeneratorMatrix bit = b.inverse_transpose();
  if (!is_identity(bit.real())) out.transport.push_back(MetaplecticOp::dilation(bit));
  out.tight_expected = true;
  return out;
}

PipelineDescriptor diag_pipeline(double a, double b, double c, double d, const PipelineOptions& opt) {
  if (!(a > 0 && b > 0 && c > 0 && d > 0)) throw PreconditionError("diagonal lattice parameters must be positive");
  const double ac = a * c, bd = b * d;
  if (!(ac * bd < 1)) throw PreconditionError("abcd < 1 is necessary for a frame");

  PipelineDescriptor out;
  out.route = "diag";
  out.options = opt;
  out.target = TFLattice(diag2(a, b), diag2(c, d));
  out.notes["ac"] = ac;
  out.notes["bd"] = bd;

  if (ac < 1 && bd < 1) {
    out.diag_case = 1;
    out.reduced = out.target;
    out.plateaus.push_back({{0.0, a}, {(ac - 1) / (2 * c), (ac + 1) / (2 * c)}});
    out.plateaus.push_back({{0.0, b}, {(bd - 1) / (2 * d), (bd + 1) / (2 * d)}});
    return out;
  }

  if (ac * bd < 0.5) {
    out.diag_case = 2;
    Eigen::MatrixXd shape = Eigen::MatrixXd::Zero(2, 2);
    shape(0, 0) = ac;
    shape(1, 1) = bd;
    // the long side carries the half-unit shear; its half-gap to the next translate is eps
    if (ac >= bd) {
      shape(1, 0) = 0.5;
      out.eps = (1 - 2 * ac * bd) / (4 * ac);
    } else {
      shape(0, 1) = 0.5;
      out.eps = (1 - 2 * ac * bd) / (4 * bd);
    }
    out.omega = Region::single(Parallelepiped(Eigen::VectorXd::Zero(2), shape));
    out.reduced = TFLattice(diag2(ac, bd), GeneratorMatrix::identity(2));
    if (c != 1 || d != 1) out.transport.push_back(MetaplecticOp::dilation(diag2(1 / c, 1 / d)));
    out.tight_expected = true;
    return out;
  }

  const double ratio = std::sqrt(ac / bd);
  const auto q = rationalize(ratio, opt.max_denominator, opt.rational_tol);
  if (q) {
    PipelineDescriptor sep = separable_reduce(diag2(a, b), diag2(c, d), opt);
    sep.route = "diag";
    sep.diag_case = 3;
    sep.notes["ac"] = ac;
    sep.notes["bd"] = bd;
    sep.notes["sqrt_ac_over_bd"] = to_string(*q);
    return sep;
  }
  std::ostringstream msg;
  msg << "no case applies: ac = " << ac << ", bd = " << bd << ", sqrt(ac/bd) = " << ratio
      << " has no rational approximation with denominator <= " << opt.max_denominator << " within "
      << opt.rational_tol;
  throw Unclassified(msg.str());
}

PipelineDescriptor block_pipeline(const GeneratorMatrix& a, const Eigen::MatrixXd& d, const GeneratorMatrix& b,
                                  const PipelineOptions& opt) {
  const BlockReduction red = block_triangular_reduce(a, d, b);
  const auto positive_diagonal = [](const Eigen::MatrixXd& m) {
    return m(0, 1) == 0 && m(1, 0) == 0 && m(0, 0) > 0 && m(1, 1) > 0;
  };
  if (a.dim() != 2) throw UnsupportedError("the block-triangular construction is two-dimensional");
  PipelineDescriptor out = positive_diagonal(a.real()) && positive_diagonal(b.real())
                               ? diag_pipeline(a.real()(0, 0), a.real()(1, 1), b.real()(0, 0), b.real()(1, 1), opt)
                               : separable_reduce(a, b, opt);
  out.notes["separable_route"] = out.route;
  if (out.diag_case) out.notes["separable_case"] = out.diag_case;
  out.route = "block";
  out.target = TFLattice(a, b, d);
  if (!red.op.matrix().isZero(0.0)) out.transport.push_back(red.op.inverse());
  return out;
}

// ---- execution -------------------------------------------------------------------------

SampledWindow build_reduced_window(const PipelineDescriptor& p) {
  const double h = p.options.h;
  if (!p.plateaus.empty()) {
    std::vector<SampledWindow> f;
    for (const auto& pl : p.plateaus) f.push_back(plateau_window_1d(pl.inner, pl.outer, h));
    if (f.size() == 1) return f.front();
    if (f.size() == 2) return tensor_window(f[0], f[1]);
    throw UnsupportedError("plateau tensors beyond two factors");
  }
  if (!p.omega) throw PreconditionError("descriptor has neither a domain nor plateau factors");
  return smooth_window(*p.omega, p.eps, h);
}

PipelineResult execute(const PipelineDescriptor& p) {
  if (!p.target || !p.reduced) throw PreconditionError("descriptor has no lattice");
  SampledWindow g = build_reduced_window(p);
  TFLattice l = *p.reduced;
  for (const auto& op : p.transport) {
    g = op.apply(g);
    l = op.apply(l);
  }
  if (!same_lattice_data(l, *p.target)) throw Error("transported lattice does not match the target lattice");

  GramianReport rep = frame_bounds(g, *p.target, p.options.samples);
  const bool certified = g.support_certified();
  const double grad = max_gradient(g);
  const bool passed = p.tight_expected ? rep.tight_residual <= p.options.tol
                                       : rep.a_est >= p.options.tol * rep.tight_constant;
  return PipelineResult{std::move(g), *p.target, std::move(rep), certified, grad, p.tight_expected, passed && certified};
}

// ---- serialization ---------------------------------------------------------------------

nlohmann::ordered_json PipelineDescriptor::to_json() const {
  Json j;
  j["route"] = route;
  if (diag_case) j["case"] = diag_case;
  if (target) j["lattice"] = lattice_to_json(*target);
  if (reduced) j["reduced_lattice"] = lattice_to_json(*reduced);
  if (form) {
    Json f;
    f["form"] = form_name(form->form);
    f["alpha"] = form->alpha;
    const std::string aq = rational_text(form->alpha, options);
    if (!aq.empty()) f["alpha_rational"] = aq;
    f["m"] = form->m;
    f["n"] = form->n;
    f["BtA"] = matrix_to_json(form->product);
    f["rescaled"] = matrix_to_json(form->rescaled);
    j["form"] = std::move(f);
  }
  if (common_domain) j["common_domain"] = region_to_json(*common_domain);
  if (omega) j["omega"] = region_to_json(*omega);
  if (center.size()) {
    Json cj = Json::array();
    for (int i = 0; i < center.size(); ++i) cj.push_back(center(i));
    j["center"] = std::move(cj);
  }
  if (gamma > 0) j["gamma"] = gamma;
  if (eps > 0) j["eps"] = eps;
  if (!plateaus.empty()) {
    Json pj = Json::array();
    for (const auto& pl : plateaus)
      pj.push_back({{"inner", {pl.inner.first, pl.inner.second}}, {"outer", {pl.outer.first, pl.outer.second}}});
    j["plateaus"] = std::move(pj);
  }
  Json tj = Json::array();
  for (const auto& op : transport) tj.push_back(op.to_json());
  j["transport"] = std::move(tj);
  j["tight_expected"] = tight_expected;
  j["notes"] = notes;
  j["options"] = {{"h", options.h},
                  {"iterations", options.iterations},
                  {"samples", options.samples},
                  {"tol", options.tol},
                  {"max_denominator", options.max_denominator},
                  {"rational_tol", options.rational_tol}};
  return j;
}

nlohmann::ordered_json PipelineResult::to_json() const {
  Json j;
  j["lattice"] = lattice_to_json(lattice);
  j["bounds"] = bounds.to_json();
  Json w;
  Json lo = Json::array();
  for (int i = 0; i < window.dim(); ++i) lo.push_back(window.lo()(i));
  w["lo"] = std::move(lo);
  w["h"] = window.h();
  w["count"] = window.count();
  w["interpolation"] = interpolation_name(window.interpolation());
  w["norm2"] = window.norm2();
  w["real"] = window.is_real();
  w["support_certified"] = support_certified;
  w["max_gradient"] = max_gradient;
  j["window"] = std::move(w);
  j["tight_expected"] = tight_expected;
  j["passed"] = passed;
  return j;
}

}  // namespace tflat
