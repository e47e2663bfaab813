#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tflat/frame.hpp"
#include "tflat/region.hpp"
#include "tflat/symplectic.hpp"
#include "tflat/window.hpp"

namespace tflat {

struct PipelineOptions {
  double h = 1.0 / 256;
  /// Bisection steps for the thickening radius of a shrunk common domain.
  int iterations = 12;
  /// x samples per axis for the frame-bound check after execution.
  int samples = 32;
  /// Acceptance: tight_residual <= tol for tight constructions, a_est >= tol * c otherwise.
  double tol = 5e-3;
  /// Rationality detection: continued fractions with this denominator bound and residual.
  long max_denominator = 10000;
  double rational_tol = 1e-9;
};

/// The four shapes of B^T A (2 x 2) handled by the separable construction, m, n coprime:
///   scalar    alpha I,                           |alpha| < 1
///   diagonal  diag(m^2 alpha, n^2 alpha),         |alpha| < 1 / (m n)
///   upper     (alpha, m n alpha; 0, n^2 alpha),   |alpha| < 1 / n
///   lower     (n^2 alpha, 0; m n alpha, alpha),   |alpha| < 1 / n
enum class SeparableForm { scalar, diagonal, upper, lower };

std::string form_name(SeparableForm f);

struct FormMatch {
  SeparableForm form = SeparableForm::scalar;
  double alpha = 0;
  int m = 1;
  int n = 1;
  Eigen::Matrix2d product;   // B^T A
  Eigen::Matrix2d rescaled;  // |det B^T A|^{-1/2} B^T A
};

/// First form (in the order above) that B^T A matches; nullopt when none does. A bound met
/// with equality does not match.
std::optional<FormMatch> match_form(const Eigen::Matrix2d& bta, const PipelineOptions& opt = {});

struct Plateau {
  std::pair<double, double> inner;
  std::pair<double, double> outer;
};

/// Everything needed to rebuild the window: the lattice it is built on, the recipe, and the
/// metaplectic operators that carry it to the target lattice.
struct PipelineDescriptor {
  std::string route;  // "diag", "separable" or "block"
  int diag_case = 0;  // 1, 2 or 3 on the diag route
  std::optional<TFLattice> target;
  std::optional<TFLattice> reduced;

  // smooth recipe: g' = sqrt(chi_omega * phi_eps)
  std::optional<FormMatch> form;
  std::optional<Region> common_domain;  // common fundamental domain before shrinking
  std::optional<Region> omega;
  Eigen::VectorXd center;
  double gamma = 0;
  double eps = 0;

  // tensor recipe: one plateau window per axis
  std::vector<Plateau> plateaus;

  std::vector<MetaplecticOp> transport;
  bool tight_expected = false;
  /// Free-form facts from the case selection (ratios, rational approximations, ...).
  nlohmann::ordered_json notes = nlohmann::ordered_json::object();
  PipelineOptions options;

  nlohmann::ordered_json to_json() const;
};

/// Lattice a Z x b Z x c Z x d Z (A = diag(a, b), B = diag(c, d)); picks the first case that applies:
/// (1) ac < 1 and bd < 1, (2) abcd < 1/2, (3) sqrt(ac / bd) rational. Throws Unclassified otherwise.
PipelineDescriptor diag_pipeline(double a, double b, double c, double d, const PipelineOptions& opt = {});

/// Lattice A Z^2 x B Z^2 with B^T A in one of the separable forms. Throws Unclassified otherwise.
PipelineDescriptor separable_reduce(const GeneratorMatrix& a, const GeneratorMatrix& b, const PipelineOptions& opt = {});

/// Lattice (A 0; D B) Z^4: chirp reduction, then the diag or separable route for (A, B).
PipelineDescriptor block_pipeline(const GeneratorMatrix& a, const Eigen::MatrixXd& d, const GeneratorMatrix& b,
                                  const PipelineOptions& opt = {});

struct PipelineResult {
  SampledWindow window;
  TFLattice lattice;
  GramianReport bounds;
  bool support_certified = false;
  double max_gradient = 0;
  bool tight_expected = false;
  bool passed = false;

  nlohmann::ordered_json to_json() const;
};

PipelineResult execute(const PipelineDescriptor& p);

/// The window of the descriptor on its reduced lattice, before transport.
SampledWindow build_reduced_window(const PipelineDescriptor& p);

}  // namespace tflat
