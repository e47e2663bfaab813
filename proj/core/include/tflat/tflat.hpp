#pragma once

#include "tflat/box.hpp"
#include "tflat/config.hpp"
#include "tflat/error.hpp"
#include "tflat/frame.hpp"
#include "tflat/geometry.hpp"
#include "tflat/io.hpp"
#include "tflat/lattice.hpp"
#include "tflat/matrix.hpp"
#include "tflat/mollifier.hpp"
#include "tflat/pipeline.hpp"
#include "tflat/rational.hpp"
#include "tflat/region.hpp"
#include "tflat/symplectic.hpp"
#include "tflat/window.hpp"
