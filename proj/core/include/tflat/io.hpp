#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <string>

#include "tflat/frame.hpp"
#include "tflat/lattice.hpp"
#include "tflat/region.hpp"
#include "tflat/window.hpp"

namespace tflat {

using Json = nlohmann::ordered_json;

/// Row-major nested arrays of numbers.
Json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const Json& j);

/// Rational entries as "p/q" strings when the exact view exists, numbers otherwise.
Json generator_to_json(const GeneratorMatrix& m);
/// Accepts nested arrays of numbers or strings ("1/3", "0.25", "sqrt(2)") and matrix literals.
GeneratorMatrix generator_from_json(const Json& j);

Json lattice_to_json(const TFLattice& l);

/// {"dim": d, "pieces": [{"offset": [...], "matrix": [[...]]}, ...]}. Pieces may also be written
/// as {"box": {"lo": [...], "hi": [...]}}. Grid-only regions cannot be serialized.
Json region_to_json(const Region& r);
Region region_from_json(const Json& j);

/// Full sample dump: {"lo", "h", "count", "interpolation", "re", "im"?, "meta"}.
/// Files may instead hold a recipe {"recipe": "indicator" | "smooth" | "plateau" | "bump", ...}
/// that window_from_json rebuilds at step h (h <= 0: the recipe's "h", else 1/256).
Json window_to_json(const SampledWindow& g);
SampledWindow window_from_json(const Json& j, double h);

Json cover_to_json(const CoverReport& r);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

/// |g| on a 2-d window as an 8-bit greyscale PGM, scaled to the largest modulus.
void write_pgm(const std::string& path, const SampledWindow& g);
/// One row per sample: coordinates, then re and im.
void write_csv(const std::string& path, const SampledWindow& g);

std::string interpolation_name(Interpolation i);
Interpolation interpolation_from_name(const std::string& s);

}  // namespace tflat
