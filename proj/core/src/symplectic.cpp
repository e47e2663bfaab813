#include "tflat/symplectic.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "tflat/config.hpp"
#include "tflat/error.hpp"
#include "tflat/io.hpp"

namespace tflat {

namespace {

constexpr double kPi = std::numbers::pi;

double reach(const SampledWindow& g) {
  switch (g.interpolation()) {
    case Interpolation::cubic:
      return 2 * g.h();
    case Interpolation::linear:
      return g.h();
    case Interpolation::cell:
      break;
  }
  return 0.0;
}

void check_square(const Eigen::MatrixXd& m, int d, const char* what) {
  if (m.rows() != d || m.cols() != d) throw PreconditionError(std::string(what) + " must be d x d");
}

}  // namespace

// ---- generators ------------------------------------------------------------------------

MetaplecticOp MetaplecticOp::dilation(const GeneratorMatrix& p) {
  return MetaplecticOp(MetaplecticKind::dilation, p.dim(), p.real());
}

MetaplecticOp MetaplecticOp::chirp(const Eigen::MatrixXd& c) {
  if (c.rows() != c.cols() || c.rows() == 0) throw PreconditionError("chirp matrix must be square");
  const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
  if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw PreconditionError("chirp matrix must be symmetric");
  return MetaplecticOp(MetaplecticKind::chirp, static_cast<int>(c.rows()), 0.5 * (c + c.transpose()));
}

MetaplecticOp MetaplecticOp::fourier(int d, int sign) {
  if (d < 1) throw PreconditionError("dimension must be positive");
  if (sign != 1 && sign != -1) throw PreconditionError("Fourier sign must be +1 or -1");
  return MetaplecticOp(MetaplecticKind::fourier, d, Eigen::MatrixXd(), sign);
}

std::string MetaplecticOp::name() const {
  switch (kind_) {
    case MetaplecticKind::dilation:
      return "dilation";
    case MetaplecticKind::chirp:
      return "chirp";
    case MetaplecticKind::fourier:
      return sign_ > 0 ? "fourier" : "inverse_fourier";
  }
  return "";
}

MetaplecticOp MetaplecticOp::inverse() const {
  switch (kind_) {
    case MetaplecticKind::dilation:
      return MetaplecticOp(kind_, d_, matrix_.inverse());
    case MetaplecticKind::chirp:
      return MetaplecticOp(kind_, d_, -matrix_);
    case MetaplecticKind::fourier:
      break;
  }
  return MetaplecticOp(kind_, d_, matrix_, -sign_);
}

Eigen::MatrixXd MetaplecticOp::symplectic_matrix() const {
  const int d = d_;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  switch (kind_) {
    case MetaplecticKind::dilation:
      m.topLeftCorner(d, d) = matrix_;
      m.bottomRightCorner(d, d) = matrix_.inverse().transpose();
      break;
    case MetaplecticKind::chirp:
      m.topLeftCorner(d, d) = id;
      m.bottomLeftCorner(d, d) = matrix_;
      m.bottomRightCorner(d, d) = id;
      break;
    case MetaplecticKind::fourier:
      m.topRightCorner(d, d) = sign_ * id;
      m.bottomLeftCorner(d, d) = -sign_ * id;
      break;
  }
  return m;
}

SampledWindow MetaplecticOp::apply(const SampledWindow& g) const {
  if (g.dim() != d_) throw PreconditionError("window and operator dimensions differ");
  switch (kind_) {
    case MetaplecticKind::dilation:
      return apply_dilation(g, GeneratorMatrix(matrix_));
    case MetaplecticKind::chirp:
      return apply_chirp(g, matrix_);
    case MetaplecticKind::fourier:
      break;
  }
  return apply_fourier(g, sign_);
}

TFLattice MetaplecticOp::apply(const TFLattice& l) const {
  if (l.dim() != d_) throw PreconditionError("lattice and operator dimensions differ");
  switch (kind_) {
    case MetaplecticKind::dilation: {
      const GeneratorMatrix p(matrix_);
      const GeneratorMatrix pit = p.inverse_transpose();
      std::optional<Eigen::MatrixXd> d;
      if (l.D) d = pit.real() * *l.D;
      return TFLattice(p * l.A, pit * l.B, d);
    }
    case MetaplecticKind::chirp: {
      Eigen::MatrixXd d = matrix_ * l.A.real();
      if (l.D) d += *l.D;
      // the reduction of a block-triangular lattice lands exactly on D = 0 up to rounding
      const double scale = std::max(1.0, l.B.real().cwiseAbs().maxCoeff());
      if (d.cwiseAbs().maxCoeff() <= 1e-12 * scale) return TFLattice(l.A, l.B);
      return TFLattice(l.A, l.B, d);
    }
    case MetaplecticKind::fourier:
      break;
  }
  if (l.D) throw UnsupportedError("Fourier transport of a sheared lattice");
  // (A k, B m) -> (B m, -A k); -A generates the same lattice as A
  return TFLattice(l.B, l.A);
}

nlohmann::ordered_json MetaplecticOp::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = name();
  if (kind_ != MetaplecticKind::fourier) j["matrix"] = matrix_to_json(matrix_);
  j["symplectic"] = matrix_to_json(symplectic_matrix());
  return j;
}

// ---- window transforms -----------------------------------------------------------------

SampledWindow apply_dilation(const SampledWindow& g, const GeneratorMatrix& p) {
  const int d = g.dim();
  if (p.dim() != d) throw PreconditionError("window and dilation dimensions differ");
  const double det = p.det();
  if (!(std::fabs(det) > 0)) throw PreconditionError("dilation matrix must be invertible");
  const Eigen::MatrixXd& P = p.real();
  const Eigen::MatrixXd Pinv = P.inverse();
  const double sigma_min = Eigen::JacobiSVD<Eigen::MatrixXd>(P).singularValues().minCoeff();
  const double h = g.h() * std::min(1.0, sigma_min);
  const double scale = 1.0 / std::sqrt(std::fabs(det));

  const Box s = g.support_box();
  if ((s.hi - s.lo).minCoeff() <= 0) {
    SampledWindow out(g.lo(), g.h(), g.count(), g.interpolation());
    out.meta = g.meta;
    return out;
  }
  const Box src = s.inflated(reach(g));
  Box image{P * src.lo, P * src.lo, false};
  for (unsigned corner = 0; corner < (1u << d); ++corner) {
    Eigen::VectorXd v(d);
    for (int a = 0; a < d; ++a) v(a) = (corner >> a) & 1u ? src.hi(a) : src.lo(a);
    const Eigen::VectorXd w = P * v;
    image.lo = image.lo.cwiseMin(w);
    image.hi = image.hi.cwiseMax(w);
  }

  // two empty layers beyond the image keep the output support-certified
  SampledWindow out = window_grid(image, h, 3, g.interpolation());
  Eigen::VectorXd y(d);
  for (std::size_t f = 0; f < out.size(); ++f) {
    y.noalias() = Pinv * out.node(f);
    out[f] = scale * g.eval(y.data());
  }
  out.meta = {{"recipe", "dilation"}, {"matrix", matrix_to_json(P)}, {"source", g.meta}};
  return out;
}

SampledWindow apply_chirp(const SampledWindow& g, const Eigen::MatrixXd& c) {
  check_square(c, g.dim(), "chirp matrix");
  const double cscale = std::max(1.0, c.cwiseAbs().maxCoeff());
  if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-12 * cscale) throw PreconditionError("chirp matrix must be symmetric");
  SampledWindow out = g;
  for (std::size_t f = 0; f < out.size(); ++f) {
    if (out[f] == Complex(0, 0)) continue;
    const Eigen::VectorXd x = out.node(f);
    out[f] *= std::polar(1.0, kPi * x.dot(c * x));
  }
  out.meta = {{"recipe", "chirp"}, {"matrix", matrix_to_json(c)}, {"source", g.meta}};
  return out;
}

namespace {

struct FftwFree {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};
struct PlanFree {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};

}  // namespace

SampledWindow apply_fourier(const SampledWindow& g, int sign) {
  const int d = g.dim();
  long longest = 0;
  for (long c : g.count()) longest = std::max(longest, c);
  long n = 1;
  while (n < 2 * longest) n *= 2;
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(n);
  if (static_cast<double>(total) > static_cast<double>(limits().max_grid_cells))
    throw ResourceError("Fourier grid exceeds the grid cap");

  // t_j = a + j h and w_k = b + k h' with h h' = 1 / n, so w_k t_j = ab + b j h + a k h' + jk / n
  const double h = g.h();
  const double hw = 1.0 / (static_cast<double>(n) * h);
  const double b = -0.5 * static_cast<double>(n) * hw + 0.5 * hw;
  Eigen::VectorXd a(d);
  for (int ax = 0; ax < d; ++ax) a(ax) = g.lo()(ax) + 0.5 * h;
  const double s = sign;

  std::unique_ptr<fftw_complex[], FftwFree> buf(fftw_alloc_complex(total));
  std::fill_n(reinterpret_cast<double*>(buf.get()), 2 * total, 0.0);
  std::vector<int> dims(static_cast<std::size_t>(d), static_cast<int>(n));
  std::unique_ptr<fftw_plan_s, PlanFree> plan(fftw_plan_dft(d, dims.data(), buf.get(), buf.get(),
                                                            sign > 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE));

  // axis 0 varies fastest in both layouts
  for (std::size_t f = 0; f < g.size(); ++f) {
    if (g[f] == Complex(0, 0)) continue;
    const auto idx = g.unflatten(f);
    std::size_t w = 0, stride = 1;
    double phase = 0;
    for (int ax = 0; ax < d; ++ax) {
      const auto j = idx[static_cast<std::size_t>(ax)];
      phase += b * static_cast<double>(j) * h;
      w += static_cast<std::size_t>(j) * stride;
      stride *= static_cast<std::size_t>(n);
    }
    const Complex v = g[f] * std::polar(1.0, -2 * kPi * s * phase);
    buf[w][0] = v.real();
    buf[w][1] = v.imag();
  }
  fftw_execute(plan.get());

  SampledWindow out(Eigen::VectorXd::Constant(d, -0.5 * static_cast<double>(n) * hw), hw,
                    std::vector<long>(static_cast<std::size_t>(d), n), Interpolation::cubic);
  const double cell = std::pow(h, d);
  for (std::size_t f = 0; f < out.size(); ++f) {
    const auto idx = out.unflatten(f);
    double phase = 0;
    for (int ax = 0; ax < d; ++ax) phase += a(ax) * (b + static_cast<double>(idx[static_cast<std::size_t>(ax)]) * hw);
    out[f] = cell * Complex(buf[f][0], buf[f][1]) * std::polar(1.0, -2 * kPi * s * phase);
  }
  out.meta = {{"recipe", sign > 0 ? "fourier" : "inverse_fourier"}, {"source", g.meta}};
  return out;
}

// ---- block-triangular lattices ---------------------------------------------------------

BlockReduction block_triangular_reduce(const GeneratorMatrix& a, const Eigen::MatrixXd& d, const GeneratorMatrix& b) {
  const int dim = a.dim();
  if (b.dim() != dim) throw PreconditionError("A and B differ in dimension");
  check_square(d, dim, "shear block D");
  const Eigen::MatrixXd s = d * a.real().inverse();
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw NotReducible("D A^{-1} is not symmetric");
  const Eigen::MatrixXd c = -0.5 * (s + s.transpose());
  return {SeparableTFLattice(a, b), MetaplecticOp::chirp(c)};
}

}  // namespace tflat
