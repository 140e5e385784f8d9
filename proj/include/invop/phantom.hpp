#pragma once

#include "invop/tensor.hpp"

namespace invop {

/// Deterministic nonnegative test image: smooth blobs, curved filaments and
/// a gentle background ramp per channel, values in [0, 1]. Piecewise-smooth
/// by construction (no flat cartoons), which is the regime the regularizer
/// comparisons are about.
Tensor makePhantom(const Shape& shape);

} // namespace invop
