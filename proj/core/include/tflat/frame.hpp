#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <optional>
#include <vector>

#include "tflat/lattice.hpp"
#include "tflat/window.hpp"

namespace tflat {

/// Time-frequency lattice {(A k, B m + D k) : k, m in Z^d}. D = 0 is the separable lattice A Z^d x B Z^d;
/// a nonzero D appears after a chirp is transported onto a separable lattice.
struct TFLattice {
  GeneratorMatrix A;
  GeneratorMatrix B;
  std::optional<Eigen::MatrixXd> D;

  TFLattice(GeneratorMatrix a, GeneratorMatrix b, std::optional<Eigen::MatrixXd> d = std::nullopt);
  TFLattice(const SeparableTFLattice& l);  // NOLINT: implicit on purpose

  int dim() const { return A.dim(); }
  bool separable() const { return !D.has_value(); }
  double density() const;
  /// Only for D = 0.
  SeparableTFLattice as_separable() const;
};

struct GaborSystem {
  SampledWindow g;
  TFLattice lattice;

  GaborSystem(SampledWindow window, TFLattice l);
};

/// <f, M_w T_x g> = int f(t) e^{-2 pi i <w, t>} conj(g(t - x)) dt as a Riemann sum over the grid of f.
Complex gabor_coeff(const SampledWindow& f, const SampledWindow& g, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& omega);

/// gabor_coeff for many frequencies at one time shift; reuses the product f conj(T_x g).
std::vector<Complex> gabor_coeffs(const SampledWindow& f, const SampledWindow& g, const Eigen::VectorXd& x,
                                  const std::vector<Eigen::VectorXd>& omegas);

struct GramianOptions {
  /// Half-width J of the centred section j in [-J, J]^d of the bi-infinite index set;
  /// negative picks 16 for d = 1 and 3 otherwise.
  int section = -1;
};

int resolved_section(int dim, const GramianOptions& opt);

struct GramianSection {
  std::vector<std::vector<long>> indices;  // j for each row
  Eigen::MatrixXcd matrix;
};

/// Section of G_jk(x) = |det B|^{-1} sum_l conj(g(x - B^{-T}k - A l)) g(x - B^{-T}j - A l)
/// (with the phase e^{2 pi i <B^{-1} D l, j - k>} when D is present).
GramianSection gramian(const SampledWindow& g, const TFLattice& lattice, const Eigen::VectorXd& x,
                       const GramianOptions& opt = {});

/// Smallest and largest eigenvalue of a Hermitian matrix, split into its connected blocks first.
std::pair<double, double> hermitian_extremes(const Eigen::MatrixXcd& m);

struct GramianReport {
  std::vector<Eigen::VectorXd> x_samples;
  std::vector<double> lambda_min;
  std::vector<double> lambda_max;
  double a_est = 0;
  double b_est = 0;
  double tight_constant = 0;  // d(Lambda) |g|^2
  double tight_residual = 0;  // max over samples of |G(x) - c I|
  int samples_per_axis = 0;
  int section = 0;
  double h = 0;
  /// Bounds are exact at the samples (indicator window in cell mode); otherwise certified at resolution only.
  bool exact = false;

  nlohmann::ordered_json to_json(bool with_samples = false) const;
};

/// Eigenvalue extremes of G(x) over the cell-centred grid of n points per axis in B^{-T}[0,1)^d.
GramianReport frame_bounds(const SampledWindow& g, const TFLattice& lattice, int samples_per_axis,
                           const GramianOptions& opt = {});

double tight_residual(const SampledWindow& g, const TFLattice& lattice, int samples_per_axis,
                      const GramianOptions& opt = {});

struct OrthonormalityReport {
  double residual = 0;       // max |Gram - I|
  double tail_estimate = 0;  // largest |<g, pi(delta) g>| just outside the differences used
  double norm2 = 0;
  bool normalized = false;  // |g|^2 = 1 within 1e-6
  std::size_t points = 0;   // lattice points in the ball
  double radius = 0;

  nlohmann::ordered_json to_json() const;
};

/// Gram matrix of {pi(lambda) g : lambda in the lattice, |lambda| <= radius}, compared with I.
/// Pass the adjoint lattice to test the dual side of a tight frame.
OrthonormalityReport orthonormality(const SampledWindow& g, const SeparableTFLattice& lattice, double radius);

double orthonormality_residual(const SampledWindow& g, const SeparableTFLattice& lattice, double radius);

struct ParsevalReport {
  double residual = 0;  // relative L2 error of the reconstruction
  double truncation = 0;
  double default_truncation = 0;  // 0 when an explicit truncation was given
  double tail = 0;  // relative coefficient energy outside the truncation radius
  int torus_points = 0;
  std::size_t shifts = 0;
  double tight_constant = 0;

  nlohmann::ordered_json to_json() const;
};

/// Smallest radius (in steps of the shortest B column) whose relative coefficient tail is below 0.1 tol.
double default_truncation(const SampledWindow& f, const SampledWindow& g, const SeparableTFLattice& lattice,
                          double tol = 1e-2);

/// f ~ c sum <f, pi(lambda) g> pi(lambda) g over |omega| <= truncation, c = 1 / (d(Lambda) |g|^2).
/// truncation <= 0 selects default_truncation(tol).
ParsevalReport parseval(const SampledWindow& f, const SampledWindow& g, const SeparableTFLattice& lattice,
                        double truncation = 0, double tol = 1e-2);

double parseval_residual(const SampledWindow& f, const SampledWindow& g, const SeparableTFLattice& lattice,
                         double truncation = 0);

}  // namespace tflat
