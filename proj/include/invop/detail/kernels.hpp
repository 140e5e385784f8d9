#pragma once

// Core kernels of the concrete linear operators. Interface validation and
// dispatch live in the Op class; these functions assume checked inputs.

#include "invop/op.hpp"

namespace invop::detail {

Tensor convApply(const OpParams& p, const Tensor& x, bool conj, bool inverse);

Tensor gradApply(const Shape& in, const DimSelection& dims, const Tensor& f);
Tensor gradAdjoint(const Shape& in, const DimSelection& dims, const Tensor& v);

Tensor hessApply(const Shape& in, const DimSelection& dims, const Tensor& f);
Tensor hessAdjoint(const Shape& in, const DimSelection& dims, const Tensor& v);

Tensor downsampleApply(const Shape& in, const std::vector<std::size_t>& factors, const Tensor& f);
Tensor downsampleAdjoint(const Shape& in, const std::vector<std::size_t>& factors, const Tensor& v);

Tensor selectorApply(const Shape& in, const std::vector<std::size_t>& corner, const Shape& out,
                     const Tensor& f);
Tensor selectorAdjoint(const Shape& in, const std::vector<std::size_t>& corner, const Tensor& v);

Tensor sumPatchesApply(const Shape& in, const std::vector<std::size_t>& patch, const Tensor& f);
Tensor sumPatchesAdjoint(const Shape& in, const std::vector<std::size_t>& patch, const Tensor& v);

} // namespace invop::detail
