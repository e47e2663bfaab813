#include "tflat/config.hpp"

#include <cstdlib>
#include <string>

namespace tflat {
namespace {

Limits from_environment() {
  Limits l;
  if (const char* env = std::getenv("TFLAT_MAX_CELLS")) {
    try {
      const auto v = std::stoull(env);
      if (v > 0) l.max_grid_cells = static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      // ignore malformed override, keep default
    }
  }
  return l;
}

Limits& storage() {
  static Limits l = from_environment();
  return l;
}

}  // namespace

const Limits& limits() { return storage(); }

void set_limits(const Limits& l) { storage() = l; }

}  // namespace tflat
