#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>

#include "tflat/config.hpp"
#include "tflat/error.hpp"
#include "tflat/frame.hpp"

namespace tflat {

namespace {

using Ranges = std::vector<std::pair<long, long>>;

struct FftwFree {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};
using Buffer = std::unique_ptr<fftw_complex[], FftwFree>;

struct PlanFree {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanFree>;

std::optional<Box> effective_support(const SampledWindow& g) {
  const Box s = g.support_box();
  if ((s.hi - s.lo).minCoeff() <= 0) return std::nullopt;
  const double reach = g.interpolation() == Interpolation::cubic ? 2 * g.h()
                       : g.interpolation() == Interpolation::linear ? g.h()
                                                                    : 0.0;
  return s.inflated(reach);
}

// The torus R^d / B^{-T} Z^d sampled at t_m = B^{-T} (m + 1/2) / N, and the shifts x in A Z^d
// whose window meets supp f. Each shift carries its periodized product f conj(T_x g) in
// Fourier space.
class TorusFrame {
 public:
  TorusFrame(const SampledWindow& f, const SampledWindow& g, const SeparableTFLattice& l) : f_(f), g_(g), l_(l) {
    d_ = l.dim();
    if (f.dim() != d_ || g.dim() != d_) throw PreconditionError("window, function and lattice dimensions differ");
    const auto sf = effective_support(f);
    const auto sg = effective_support(g);
    if (!sf || !sg) throw PreconditionError("parseval needs nonzero f and g");
    sf_ = *sf;
    sg_ = *sg;
    Bt_ = l.B().inverse_transpose().real();
    detB_ = std::fabs(l.B().det());

    // torus spacing no coarser than the finer of the two grids
    const double h = std::min(f.h(), g.h());
    double longest = 0;
    for (int a = 0; a < d_; ++a) longest = std::max(longest, Bt_.col(a).norm());
    N_ = 2 * static_cast<long>(std::ceil(longest / (2 * h) - 1e-9));
    total_ = 1;
    for (int a = 0; a < d_; ++a) total_ *= static_cast<std::size_t>(N_);
    if (static_cast<double>(total_) > static_cast<double>(limits().max_grid_cells))
      throw ResourceError("torus grid exceeds the grid cap");

    const Box xbox{sf_.lo - sg_.hi, sf_.hi - sg_.lo, false};
    for (const auto& p : enumerate_points(l.A(), xbox)) shifts_.push_back(p.x);

    // every lifted torus point where f or the reconstruction can be nonzero
    Box region = sf_;
    for (const auto& x : shifts_) region = region.hull(sg_.translated(x));
    const Eigen::MatrixXd step = Bt_ / static_cast<double>(N_);
    const Eigen::VectorXd half = step * Eigen::VectorXd::Constant(d_, 0.5);
    prange_ = coefficient_range(step, Box{region.lo - half, region.hi - half, false});
    std::size_t count = 1;
    for (const auto& [lo, hi] : prange_) count *= static_cast<std::size_t>(hi - lo + 1);
    if (static_cast<double>(count) > static_cast<double>(limits().max_grid_cells))
      throw ResourceError("reconstruction grid exceeds the grid cap");
    points_.reserve(count);
    std::vector<long> m(static_cast<std::size_t>(d_));
    for (std::size_t a = 0; a < static_cast<std::size_t>(d_); ++a) m[a] = prange_[a].first;
    while (true) {
      Eigen::VectorXd mv(d_);
      std::size_t wrap = 0, stride = 1;
      for (int a = 0; a < d_; ++a) {
        mv(a) = static_cast<double>(m[static_cast<std::size_t>(a)]);
        const long r = ((m[static_cast<std::size_t>(a)] % N_) + N_) % N_;
        // FFTW is row-major, so axis 0 is the fastest (last) FFTW dimension
        wrap += static_cast<std::size_t>(r) * stride;
        stride *= static_cast<std::size_t>(N_);
      }
      const Eigen::VectorXd t = step * mv + half;
      if (region.contains(t)) points_.push_back({t, wrap, f(t)});
      std::size_t a = 0;
      while (a < static_cast<std::size_t>(d_)) {
        if (++m[a] <= prange_[a].second) break;
        m[a] = prange_[a].first;
        ++a;
      }
      if (a == static_cast<std::size_t>(d_)) break;
    }

    // |B n| for each FFT bin
    radius_.resize(total_);
    for (std::size_t w = 0; w < total_; ++w) {
      Eigen::VectorXd n(d_);
      std::size_t rest = w;
      for (int a = 0; a < d_; ++a) {
        const auto r = static_cast<long>(rest % static_cast<std::size_t>(N_));
        rest /= static_cast<std::size_t>(N_);
        n(a) = static_cast<double>(r < N_ / 2 ? r : r - N_);
      }
      radius_[w] = (l.B().real() * n).norm();
    }

    buf_.reset(fftw_alloc_complex(total_));
    std::vector<int> dims(static_cast<std::size_t>(d_), static_cast<int>(N_));
    forward_.reset(fftw_plan_dft(d_, dims.data(), buf_.get(), buf_.get(), FFTW_FORWARD, FFTW_ESTIMATE));
    backward_.reset(fftw_plan_dft(d_, dims.data(), buf_.get(), buf_.get(), FFTW_BACKWARD, FFTW_ESTIMATE));

    // forward transforms of every shift, kept for the truncation choice and reconstruction
    spectra_.reserve(shifts_.size());
    gvals_.reserve(shifts_.size());
    for (const auto& x : shifts_) {
      std::memset(buf_.get(), 0, sizeof(fftw_complex) * total_);
      std::vector<Complex> gv(points_.size(), Complex(0, 0));
      bool any = false;
      for (std::size_t p = 0; p < points_.size(); ++p) {
        const Eigen::VectorXd u = points_[p].t - x;
        if (!sg_.contains(u)) continue;
        gv[p] = g(u);
        const Complex prod = points_[p].f * std::conj(gv[p]);
        if (prod == Complex(0, 0)) continue;
        buf_[points_[p].wrap][0] += prod.real();
        buf_[points_[p].wrap][1] += prod.imag();
        any = true;
      }
      if (!any) continue;
      fftw_execute(forward_.get());
      spectra_.emplace_back(reinterpret_cast<Complex*>(buf_.get()), reinterpret_cast<Complex*>(buf_.get()) + total_);
      gvals_.push_back(std::move(gv));
    }
  }

  long torus_points() const { return N_; }
  std::size_t shifts() const { return spectra_.size(); }

  /// sqrt of the coefficient energy with |omega| > R, relative to the total.
  double tail(double R) const {
    double all = 0, out = 0;
    for (const auto& s : spectra_)
      for (std::size_t w = 0; w < total_; ++w) {
        const double e = std::norm(s[w]);
        all += e;
        if (radius_[w] > R) out += e;
      }
    return all > 0 ? std::sqrt(out / all) : 0.0;
  }

  double largest_bin() const { return *std::max_element(radius_.begin(), radius_.end()); }

  double nyquist() const {
    double r = INFINITY;
    for (int a = 0; a < d_; ++a) r = std::min(r, l_.B().real().col(a).norm());
    return r * static_cast<double>(N_ / 2);
  }

  double residual(double R, double c) {
    std::vector<Complex> rec(points_.size(), Complex(0, 0));
    const double norm = 1.0 / (static_cast<double>(total_) * detB_);
    for (std::size_t s = 0; s < spectra_.size(); ++s) {
      for (std::size_t w = 0; w < total_; ++w) {
        const Complex v = radius_[w] <= R ? spectra_[s][w] : Complex(0, 0);
        buf_[w][0] = v.real();
        buf_[w][1] = v.imag();
      }
      fftw_execute(backward_.get());
      const auto& gv = gvals_[s];
      for (std::size_t p = 0; p < points_.size(); ++p) {
        if (gv[p] == Complex(0, 0)) continue;
        const fftw_complex& b = buf_[points_[p].wrap];
        rec[p] += c * norm * gv[p] * Complex(b[0], b[1]);
      }
    }
    double err = 0, ref = 0;
    for (std::size_t p = 0; p < points_.size(); ++p) {
      err += std::norm(rec[p] - points_[p].f);
      ref += std::norm(points_[p].f);
    }
    return ref > 0 ? std::sqrt(err / ref) : 0.0;
  }

 private:
  struct Point {
    Eigen::VectorXd t;
    std::size_t wrap;
    Complex f;
  };

  const SampledWindow& f_;
  const SampledWindow& g_;
  const SeparableTFLattice& l_;
  int d_ = 0;
  Box sf_, sg_;
  Eigen::MatrixXd Bt_;
  double detB_ = 1;
  long N_ = 0;
  std::size_t total_ = 0;
  std::vector<Eigen::VectorXd> shifts_;
  Ranges prange_;
  std::vector<Point> points_;
  std::vector<double> radius_;
  Buffer buf_;
  Plan forward_, backward_;
  std::vector<std::vector<Complex>> spectra_;
  std::vector<std::vector<Complex>> gvals_;
};

double pick_truncation(const TorusFrame& tf, const SeparableTFLattice& l, double tol) {
  double step = INFINITY;
  for (int a = 0; a < l.dim(); ++a) step = std::min(step, l.B().real().col(a).norm());
  const double top = tf.nyquist();
  for (double R = step; R < top; R += step)
    if (tf.tail(R) < 0.1 * tol) return R;
  throw ResolutionError("coefficient tail does not fall below 0.1 tol before the torus Nyquist radius");
}

}  // namespace

double default_truncation(const SampledWindow& f, const SampledWindow& g, const SeparableTFLattice& lattice,
                          double tol) {
  const TorusFrame tf(f, g, lattice);
  return pick_truncation(tf, lattice, tol);
}

ParsevalReport parseval(const SampledWindow& f, const SampledWindow& g, const SeparableTFLattice& lattice,
                        double truncation, double tol) {
  TorusFrame tf(f, g, lattice);
  ParsevalReport rep;
  if (truncation > 0) {
    rep.truncation = truncation;
  } else {
    rep.default_truncation = pick_truncation(tf, lattice, tol);
    rep.truncation = rep.default_truncation;
  }
  if (rep.truncation > tf.largest_bin() + 1e-9) throw ResolutionError("truncation radius exceeds every frequency on the torus grid");
  rep.tail = tf.tail(rep.truncation);
  rep.torus_points = static_cast<int>(tf.torus_points());
  rep.shifts = tf.shifts();
  rep.tight_constant = density(lattice) * g.norm2();
  rep.residual = tf.residual(rep.truncation, 1.0 / rep.tight_constant);
  return rep;
}

double parseval_residual(const SampledWindow& f, const SampledWindow& g, const SeparableTFLattice& lattice,
                         double truncation) {
  return parseval(f, g, lattice, truncation).residual;
}

nlohmann::ordered_json ParsevalReport::to_json() const {
  nlohmann::ordered_json j;
  j["residual"] = residual;
  j["truncation"] = truncation;
  if (default_truncation > 0) j["default_truncation"] = default_truncation;
  j["coefficient_tail"] = tail;
  j["torus_points_per_axis"] = torus_points;
  j["shifts"] = shifts;
  j["tight_constant"] = tight_constant;
  return j;
}

}  // namespace tflat
