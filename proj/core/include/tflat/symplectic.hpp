#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <string>

#include "tflat/frame.hpp"
#include "tflat/lattice.hpp"
#include "tflat/window.hpp"

namespace tflat {

enum class MetaplecticKind { dilation, chirp, fourier };

/// One generator of the metaplectic group together with its symplectic matrix.
///   dilation(P): (x, w) -> (P x, P^{-T} w),  g -> |det P|^{-1/2} g(P^{-1} .)
///   chirp(C):    (x, w) -> (x, w + C x),     g -> e^{pi i <., C .>} g
///   fourier:     (x, w) -> (w, -x),          g -> g^ (sign -1 is the inverse transform)
class MetaplecticOp {
 public:
  static MetaplecticOp dilation(const GeneratorMatrix& p);
  static MetaplecticOp chirp(const Eigen::MatrixXd& c);
  static MetaplecticOp fourier(int d, int sign = 1);

  MetaplecticKind kind() const { return kind_; }
  int dim() const { return d_; }
  /// P for a dilation, C for a chirp, empty for the Fourier transform.
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  std::string name() const;

  MetaplecticOp inverse() const;
  /// The 2d x 2d symplectic matrix acting on (x, w).
  Eigen::MatrixXd symplectic_matrix() const;

  SampledWindow apply(const SampledWindow& g) const;
  /// Image of the lattice; (apply(g), apply(l)) has the frame bounds of (g, l).
  TFLattice apply(const TFLattice& l) const;

  nlohmann::ordered_json to_json() const;

 private:
  MetaplecticOp(MetaplecticKind k, int d, Eigen::MatrixXd m, int sign = 1)
      : kind_(k), d_(d), matrix_(std::move(m)), sign_(sign) {}

  MetaplecticKind kind_;
  int d_;
  Eigen::MatrixXd matrix_;
  int sign_;
};

/// (mu h)(x) = |det P|^{-1/2} h(P^{-1} x), resampled at step h * min(1, sigma_min(P)) over the
/// image of the support box. Keeps the interpolation mode of g.
SampledWindow apply_dilation(const SampledWindow& g, const GeneratorMatrix& p);

/// g(x) e^{pi i <x, C x>} on the grid of g.
SampledWindow apply_chirp(const SampledWindow& g, const Eigen::MatrixXd& c);

/// g^(w) = int g(t) e^{-2 pi i <w, t>} dt on the centred frequency grid of a zero-padded FFT.
/// Not compactly supported; for completeness only.
SampledWindow apply_fourier(const SampledWindow& g, int sign = 1);

struct BlockReduction {
  SeparableTFLattice separable;
  /// chirp(-D A^{-1}): maps {(A k, B m + D k)} onto A Z^d x B Z^d.
  MetaplecticOp op;
};

/// Reduces (A 0; D B) Z^{2d} to A Z^d x B Z^d. Throws NotReducible unless D A^{-1} is symmetric
/// within 1e-10.
BlockReduction block_triangular_reduce(const GeneratorMatrix& a, const Eigen::MatrixXd& d, const GeneratorMatrix& b);

}  // namespace tflat
