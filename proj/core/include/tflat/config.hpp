#pragma once

#include <cstddef>

namespace tflat {

/// Process-wide resource caps. Read once; `TFLAT_MAX_CELLS` overrides the grid cap.
struct Limits {
  std::size_t max_lattice_points = 10'000'000;
  std::size_t max_grid_cells = 50'000'000;
};

const Limits& limits();

/// Replaces the active limits (tests and the CLI use this; not thread-safe w.r.t. readers).
void set_limits(const Limits& l);

}  // namespace tflat
