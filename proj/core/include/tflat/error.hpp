#pragma once

#include <stdexcept>
#include <string>

namespace tflat {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid construction input (singular generator, bad dimensions, ...).
class ConstructionError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Malformed textual input (matrix literals, JSON files, CLI values).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A configured cap (lattice points, grid cells) would be exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// The grid is too coarse for the requested mollification radius.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Requested combination is not supported (unbounded region, d >= 3 exact, ...).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// The thickening margin search collapsed below the grid step.
class DegenerateMargin : public Error {
 public:
  using Error::Error;
};

/// D A^{-1} is not symmetric, so the block-triangular lattice has no chirp reduction.
class NotReducible : public Error {
 public:
  using Error::Error;
};

/// None of the constructive lattice forms applies. Not a proof that no window exists.
class Unclassified : public Error {
 public:
  using Error::Error;
};

}  // namespace tflat
