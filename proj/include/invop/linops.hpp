#pragma once

#include "invop/op.hpp"

namespace invop {

OpPtr makeIdentity(Shape size);

/// Diagonal operator. Detects the all-entries-equal case at construction and
/// flags it as a scaled identity, which enables the Conv+scalar rewrite.
OpPtr makeDiag(Tensor d);
OpPtr makeScaledIdentity(Shape size, std::complex<double> c);

/// Circular convolution over the selected dimensions, kernel given in the
/// frequency domain over the full input shape (one kernel slice per
/// non-convolved index, e.g. one 2-D kernel per channel). isReal asserts a
/// real spatial kernel; the mtf must then be conjugate-symmetric per
/// convolved slice and the output imaginary part is discarded for real
/// inputs.
OpPtr makeConvFromMtf(Tensor mtf, DimSelection dims, bool isReal);

/// Same, from a spatial-domain kernel (transformed internally).
OpPtr makeConvFromSpatial(const Tensor& kernel, DimSelection dims);

/// Forward-difference gradient with circular boundary, one component per
/// selected dimension stacked along a new trailing axis:
/// [D_i f](n) = f(n + e_i) - f(n).
OpPtr makeGrad(Shape in, DimSelection dims);

/// Second-order finite differences with circular boundary over exactly two
/// selected dimensions; trailing axis of size 3 stores (D11, D12, D22).
OpPtr makeHess(Shape in, DimSelection dims);

/// Keeps every factor-th sample starting at index 0 (factors must divide the
/// extents; factor 1 leaves a dimension untouched).
OpPtr makeDownsample(Shape in, std::vector<std::size_t> factors);

/// Extracts the axis-aligned block [corner, corner+size) (corner 0-based).
OpPtr makeSelectorPatch(Shape in, std::vector<std::size_t> corner, std::vector<std::size_t> size);

/// Partitions the input into contiguous blocks of the patch shape and sums
/// them elementwise into a single block.
OpPtr makeSumPatches(Shape in, std::vector<std::size_t> patch);

/// Elementwise square root (nonlinear, differentiable on positive tensors).
OpPtr makeEWSqrt(Shape size);

namespace detail {

// Frequency symbols of the circular difference stencils on a grid, used by
// the normal-operator rewrites (Grad^T Grad and Hess^T Hess collapse to
// convolutions).
Tensor gradSymbolSumAbs2(const Shape& in, const DimSelection& dims);
Tensor hessSymbolSumAbs2(const Shape& in, const DimSelection& dims);

} // namespace detail

} // namespace invop
