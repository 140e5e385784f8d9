#pragma once

#include "invop/tensor.hpp"

namespace invop {

enum class FftDirection { Forward, Inverse };

/// Discrete Fourier transform over the selected dimensions, implemented as
/// batched 1-D transforms (row-major, last dimension fastest). Forward is
/// unnormalized; inverse divides by the product of the transformed extents,
/// so idft(dft(x)) == x. Real input is promoted to complex128; the result is
/// always complex128.
Tensor dft(const Tensor& x, const DimSelection& dims, FftDirection dir);

inline Tensor dft(const Tensor& x, const DimSelection& dims) {
    return dft(x, dims, FftDirection::Forward);
}
inline Tensor idft(const Tensor& x, const DimSelection& dims) {
    return dft(x, dims, FftDirection::Inverse);
}

} // namespace invop
