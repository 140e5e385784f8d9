#include "invop/linops.hpp"

#include <cmath>
#include <numbers>

#include "invop/detail/kernels.hpp"
#include "invop/fft.hpp"

namespace invop {

namespace {

// Flat-index coordinate along one dimension (row-major, precomputed strides).
inline std::size_t coordAt(std::size_t flat, std::size_t stride, std::size_t extent) {
    return (flat / stride) % extent;
}

} // namespace

// ---- constructors ----------------------------------------------------------

OpPtr makeIdentity(Shape size) {
    Shape s = size;
    return makeOpNode(OpKind::Identity, {}, {}, s, s);
}

OpPtr makeDiag(Tensor d) {
    OpParams p;
    const std::size_t n = d.size();
    if (n == 0) throw ShapeError("makeDiag: empty diagonal");
    p.isScaledIdentity = true;
    const std::complex<double> first = d.get(0);
    for (std::size_t i = 0; i < n; ++i) {
        if (d.get(i) != first) {
            p.isScaledIdentity = false;
            break;
        }
    }
    p.diagConst = p.isScaledIdentity ? first : std::complex<double>(0.0);
    p.diagMinAbs = minAbs(d);
    p.diagMaxAbs = maxAbs(d);
    Shape s = d.shape();
    p.diag = std::move(d);
    return makeOpNode(OpKind::Diag, std::move(p), {}, s, s);
}

OpPtr makeScaledIdentity(Shape size, std::complex<double> c) {
    if (c.imag() == 0.0) return makeDiag(Tensor::full(size, c.real()));
    return makeDiag(Tensor::full(size, c));
}

OpPtr makeConvFromMtf(Tensor mtf, DimSelection dims, bool isReal) {
    Tensor m = mtf.asComplex();
    dims.checkAgainstRank(m.shape().rank(), "makeConvFromMtf");

    OpParams p;
    p.mtfMinAbs = minAbs(m);
    p.mtfMaxAbs = maxAbs(m);
    p.isReal = isReal;
    p.dims = dims;

    if (isReal) {
        // A real spatial kernel requires a conjugate-symmetric mtf per
        // convolved slice.
        const auto& shape = m.shape();
        const auto strides = shape.strides();
        const double tol = 1e-10 * std::max(1.0, p.mtfMaxAbs);
        auto data = m.cplx();
        for (std::size_t i = 0; i < m.size(); ++i) {
            std::size_t mirror = i;
            for (std::size_t d : dims.indices()) {
                const std::size_t c = coordAt(i, strides[d], shape.extent(d));
                const std::size_t mc = c == 0 ? 0 : shape.extent(d) - c;
                mirror += (mc - c) * strides[d];
            }
            if (std::abs(data[i] - std::conj(data[mirror])) > tol)
                throw DomainError(
                    "makeConvFromMtf: isReal requested but mtf is not conjugate-symmetric");
        }
    }

    Shape s = m.shape();
    p.mtf = std::move(m);
    return makeOpNode(OpKind::Conv, std::move(p), {}, s, s);
}

OpPtr makeConvFromSpatial(const Tensor& kernel, DimSelection dims) {
    return makeConvFromMtf(dft(kernel, dims, FftDirection::Forward), dims, kernel.isReal());
}

OpPtr makeGrad(Shape in, DimSelection dims) {
    dims.checkAgainstRank(in.rank(), "makeGrad");
    std::vector<std::size_t> out = in.dims();
    out.push_back(dims.size());
    OpParams p;
    p.dims = dims;
    return makeOpNode(OpKind::Grad, std::move(p), {}, in, Shape(out));
}

OpPtr makeHess(Shape in, DimSelection dims) {
    dims.checkAgainstRank(in.rank(), "makeHess");
    if (dims.size() != 2) throw ShapeError("makeHess: exactly two dimensions required");
    std::vector<std::size_t> out = in.dims();
    out.push_back(3); // (D11, D12, D22), symmetric off-diagonal stored once
    OpParams p;
    p.dims = dims;
    return makeOpNode(OpKind::Hess, std::move(p), {}, in, Shape(out));
}

OpPtr makeDownsample(Shape in, std::vector<std::size_t> factors) {
    if (factors.size() != in.rank())
        throw ShapeError("makeDownsample: one factor per dimension required");
    std::vector<std::size_t> out(in.rank());
    for (std::size_t d = 0; d < in.rank(); ++d) {
        if (factors[d] == 0 || in.extent(d) % factors[d] != 0)
            throw ShapeError("makeDownsample: factor " + std::to_string(factors[d]) +
                             " does not divide extent " + std::to_string(in.extent(d)));
        out[d] = in.extent(d) / factors[d];
    }
    OpParams p;
    p.factors = std::move(factors);
    return makeOpNode(OpKind::Downsample, std::move(p), {}, in, Shape(out));
}

OpPtr makeSelectorPatch(Shape in, std::vector<std::size_t> corner,
                        std::vector<std::size_t> size) {
    if (corner.size() != in.rank() || size.size() != in.rank())
        throw ShapeError("makeSelectorPatch: corner and size must cover every dimension");
    for (std::size_t d = 0; d < in.rank(); ++d)
        if (size[d] == 0 || corner[d] + size[d] > in.extent(d))
            throw ShapeError("makeSelectorPatch: patch out of bounds along dimension " +
                             std::to_string(d + 1));
    OpParams p;
    p.corner = std::move(corner);
    return makeOpNode(OpKind::SelectorPatch, std::move(p), {}, in, Shape(size));
}

OpPtr makeSumPatches(Shape in, std::vector<std::size_t> patch) {
    if (patch.size() != in.rank())
        throw ShapeError("makeSumPatches: one patch extent per dimension required");
    for (std::size_t d = 0; d < in.rank(); ++d)
        if (patch[d] == 0 || in.extent(d) % patch[d] != 0)
            throw ShapeError("makeSumPatches: patch extent must divide the input extent");
    OpParams p;
    p.patch = patch;
    return makeOpNode(OpKind::SumPatches, std::move(p), {}, in, Shape(patch));
}

OpPtr makeEWSqrt(Shape size) {
    Shape s = size;
    return makeOpNode(OpKind::EWSqrt, {}, {}, s, s);
}

// ---- kernels ---------------------------------------------------------------

namespace detail {

Tensor convApply(const OpParams& p, const Tensor& x, bool conj, bool inverse) {
    const bool realOut = p.isReal && x.isReal();
    Tensor spectrum = dft(x, p.dims, FftDirection::Forward);
    Tensor filtered = inverse ? div(spectrum, p.mtf)
                              : (conj ? mul(spectrum, conjugate(p.mtf)) : mul(spectrum, p.mtf));
    Tensor out = idft(filtered, p.dims);
    return realOut ? out.realPart() : out;
}

namespace {

// Stencil kernels operate on the raw double lanes so real and complex
// tensors share one code path (width 1 or 2).
struct Lanes {
    std::span<const double> src;
    std::size_t width;
};

Lanes lanesOf(const Tensor& t) {
    return {t.raw(), t.isComplex() ? std::size_t(2) : std::size_t(1)};
}

} // namespace

Tensor gradApply(const Shape& in, const DimSelection& dims, const Tensor& f) {
    const auto strides = in.strides();
    const std::size_t n = in.count();
    const std::size_t k = dims.size();
    std::vector<std::size_t> outDims = in.dims();
    outDims.push_back(k);
    Tensor out = Tensor::zeros(Shape(outDims), f.kind());
    auto [src, w] = lanesOf(f);
    auto dst = out.raw();

    for (std::size_t j = 0; j < k; ++j) {
        const std::size_t d = dims.indices()[j];
        const std::size_t sd = strides[d], ed = in.extent(d);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t c = coordAt(i, sd, ed);
            const std::size_t fwd = (c + 1 < ed) ? i + sd : i + sd - sd * ed;
            for (std::size_t lane = 0; lane < w; ++lane)
                dst[(i * k + j) * w + lane] = src[fwd * w + lane] - src[i * w + lane];
        }
    }
    return out;
}

Tensor gradAdjoint(const Shape& in, const DimSelection& dims, const Tensor& v) {
    const auto strides = in.strides();
    const std::size_t n = in.count();
    const std::size_t k = dims.size();
    Tensor out = Tensor::zeros(in, v.kind());
    auto [src, w] = lanesOf(v);
    auto dst = out.raw();

    for (std::size_t j = 0; j < k; ++j) {
        const std::size_t d = dims.indices()[j];
        const std::size_t sd = strides[d], ed = in.extent(d);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t c = coordAt(i, sd, ed);
            const std::size_t back = (c > 0) ? i - sd : i - sd + sd * ed;
            for (std::size_t lane = 0; lane < w; ++lane)
                dst[i * w + lane] += src[(back * k + j) * w + lane] - src[(i * k + j) * w + lane];
        }
    }
    return out;
}

namespace {

// Circular neighbor of flat index i shifted by `steps` along dimension d.
inline std::size_t shiftIdx(std::size_t i, long steps, std::size_t stride, std::size_t extent,
                            std::size_t coord) {
    const long c = static_cast<long>(coord) + steps;
    const long wrapped = ((c % static_cast<long>(extent)) + static_cast<long>(extent)) %
                         static_cast<long>(extent);
    return i + (static_cast<std::size_t>(wrapped) - coord) * stride;
}

} // namespace

Tensor hessApply(const Shape& in, const DimSelection& dims, const Tensor& f) {
    const auto strides = in.strides();
    const std::size_t n = in.count();
    const std::size_t d1 = dims.indices()[0], d2 = dims.indices()[1];
    const std::size_t s1 = strides[d1], e1 = in.extent(d1);
    const std::size_t s2 = strides[d2], e2 = in.extent(d2);
    std::vector<std::size_t> outDims = in.dims();
    outDims.push_back(3);
    Tensor out = Tensor::zeros(Shape(outDims), f.kind());
    auto [src, w] = lanesOf(f);
    auto dst = out.raw();

    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c1 = coordAt(i, s1, e1), c2 = coordAt(i, s2, e2);
        const std::size_t p1 = shiftIdx(i, 1, s1, e1, c1), p11 = shiftIdx(i, 2, s1, e1, c1);
        const std::size_t p2 = shiftIdx(i, 1, s2, e2, c2), p22 = shiftIdx(i, 2, s2, e2, c2);
        const std::size_t p12 = shiftIdx(p1, 1, s2, e2, coordAt(p1, s2, e2));
        for (std::size_t lane = 0; lane < w; ++lane) {
            const double f0 = src[i * w + lane];
            dst[(i * 3 + 0) * w + lane] = src[p11 * w + lane] - 2.0 * src[p1 * w + lane] + f0;
            dst[(i * 3 + 1) * w + lane] =
                src[p12 * w + lane] - src[p1 * w + lane] - src[p2 * w + lane] + f0;
            dst[(i * 3 + 2) * w + lane] = src[p22 * w + lane] - 2.0 * src[p2 * w + lane] + f0;
        }
    }
    return out;
}

Tensor hessAdjoint(const Shape& in, const DimSelection& dims, const Tensor& v) {
    const auto strides = in.strides();
    const std::size_t n = in.count();
    const std::size_t d1 = dims.indices()[0], d2 = dims.indices()[1];
    const std::size_t s1 = strides[d1], e1 = in.extent(d1);
    const std::size_t s2 = strides[d2], e2 = in.extent(d2);
    Tensor out = Tensor::zeros(in, v.kind());
    auto [src, w] = lanesOf(v);
    auto dst = out.raw();

    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c1 = coordAt(i, s1, e1), c2 = coordAt(i, s2, e2);
        const std::size_t m1 = shiftIdx(i, -1, s1, e1, c1), m11 = shiftIdx(i, -2, s1, e1, c1);
        const std::size_t m2 = shiftIdx(i, -1, s2, e2, c2), m22 = shiftIdx(i, -2, s2, e2, c2);
        const std::size_t m12 = shiftIdx(m1, -1, s2, e2, coordAt(m1, s2, e2));
        for (std::size_t lane = 0; lane < w; ++lane) {
            double acc = 0.0;
            acc += src[(m11 * 3 + 0) * w + lane] - 2.0 * src[(m1 * 3 + 0) * w + lane] +
                   src[(i * 3 + 0) * w + lane];
            acc += src[(m12 * 3 + 1) * w + lane] - src[(m1 * 3 + 1) * w + lane] -
                   src[(m2 * 3 + 1) * w + lane] + src[(i * 3 + 1) * w + lane];
            acc += src[(m22 * 3 + 2) * w + lane] - 2.0 * src[(m2 * 3 + 2) * w + lane] +
                   src[(i * 3 + 2) * w + lane];
            dst[i * w + lane] = acc;
        }
    }
    return out;
}

Tensor downsampleApply(const Shape& in, const std::vector<std::size_t>& factors, const Tensor& f) {
    const auto inStrides = in.strides();
    std::vector<std::size_t> outDims(in.rank());
    for (std::size_t d = 0; d < in.rank(); ++d) outDims[d] = in.extent(d) / factors[d];
    Shape outShape(outDims);
    const auto outStrides = outShape.strides();
    Tensor out = Tensor::zeros(outShape, f.kind());
    auto [src, w] = lanesOf(f);
    auto dst = out.raw();

    const std::size_t m = outShape.count();
    for (std::size_t o = 0; o < m; ++o) {
        std::size_t iFlat = 0;
        for (std::size_t d = 0; d < in.rank(); ++d)
            iFlat += coordAt(o, outStrides[d], outDims[d]) * factors[d] * inStrides[d];
        for (std::size_t lane = 0; lane < w; ++lane) dst[o * w + lane] = src[iFlat * w + lane];
    }
    return out;
}

Tensor downsampleAdjoint(const Shape& in, const std::vector<std::size_t>& factors,
                         const Tensor& v) {
    const auto inStrides = in.strides();
    const auto& outShape = v.shape();
    const auto outStrides = outShape.strides();
    Tensor out = Tensor::zeros(in, v.kind());
    auto [src, w] = lanesOf(v);
    auto dst = out.raw();

    const std::size_t m = outShape.count();
    for (std::size_t o = 0; o < m; ++o) {
        std::size_t iFlat = 0;
        for (std::size_t d = 0; d < in.rank(); ++d)
            iFlat += coordAt(o, outStrides[d], outShape.extent(d)) * factors[d] * inStrides[d];
        for (std::size_t lane = 0; lane < w; ++lane) dst[iFlat * w + lane] = src[o * w + lane];
    }
    return out;
}

Tensor selectorApply(const Shape& in, const std::vector<std::size_t>& corner, const Shape& out,
                     const Tensor& f) {
    const auto inStrides = in.strides();
    const auto outStrides = out.strides();
    Tensor res = Tensor::zeros(out, f.kind());
    auto [src, w] = lanesOf(f);
    auto dst = res.raw();

    const std::size_t m = out.count();
    for (std::size_t o = 0; o < m; ++o) {
        std::size_t iFlat = 0;
        for (std::size_t d = 0; d < in.rank(); ++d)
            iFlat += (corner[d] + coordAt(o, outStrides[d], out.extent(d))) * inStrides[d];
        for (std::size_t lane = 0; lane < w; ++lane) dst[o * w + lane] = src[iFlat * w + lane];
    }
    return res;
}

Tensor selectorAdjoint(const Shape& in, const std::vector<std::size_t>& corner, const Tensor& v) {
    const auto inStrides = in.strides();
    const auto& outShape = v.shape();
    const auto outStrides = outShape.strides();
    Tensor res = Tensor::zeros(in, v.kind());
    auto [src, w] = lanesOf(v);
    auto dst = res.raw();

    const std::size_t m = outShape.count();
    for (std::size_t o = 0; o < m; ++o) {
        std::size_t iFlat = 0;
        for (std::size_t d = 0; d < in.rank(); ++d)
            iFlat += (corner[d] + coordAt(o, outStrides[d], outShape.extent(d))) * inStrides[d];
        for (std::size_t lane = 0; lane < w; ++lane) dst[iFlat * w + lane] = src[o * w + lane];
    }
    return res;
}

Tensor sumPatchesApply(const Shape& in, const std::vector<std::size_t>& patch, const Tensor& f) {
    const auto inStrides = in.strides();
    Shape outShape(patch);
    const auto outStrides = outShape.strides();
    Tensor out = Tensor::zeros(outShape, f.kind());
    auto [src, w] = lanesOf(f);
    auto dst = out.raw();

    const std::size_t n = in.count();
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t oFlat = 0;
        for (std::size_t d = 0; d < in.rank(); ++d)
            oFlat += (coordAt(i, inStrides[d], in.extent(d)) % patch[d]) * outStrides[d];
        for (std::size_t lane = 0; lane < w; ++lane) dst[oFlat * w + lane] += src[i * w + lane];
    }
    return out;
}

Tensor sumPatchesAdjoint(const Shape& in, const std::vector<std::size_t>& patch, const Tensor& v) {
    const auto inStrides = in.strides();
    const auto& outShape = v.shape();
    const auto outStrides = outShape.strides();
    Tensor out = Tensor::zeros(in, v.kind());
    auto [src, w] = lanesOf(v);
    auto dst = out.raw();

    const std::size_t n = in.count();
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t oFlat = 0;
        for (std::size_t d = 0; d < in.rank(); ++d)
            oFlat += (coordAt(i, inStrides[d], in.extent(d)) % patch[d]) * outStrides[d];
        for (std::size_t lane = 0; lane < w; ++lane) dst[i * w + lane] = src[oFlat * w + lane];
    }
    return out;
}

// ---- stencil frequency symbols ----------------------------------------------

Tensor gradSymbolSumAbs2(const Shape& in, const DimSelection& dims) {
    const auto strides = in.strides();
    Tensor out = Tensor::zeros(in, ElementKind::Complex128);
    auto dst = out.cplx();
    for (std::size_t i = 0; i < in.count(); ++i) {
        double acc = 0.0;
        for (std::size_t d : dims.indices()) {
            const double theta = 2.0 * std::numbers::pi *
                                 static_cast<double>(coordAt(i, strides[d], in.extent(d))) /
                                 static_cast<double>(in.extent(d));
            acc += 2.0 - 2.0 * std::cos(theta); // |e^{i theta} - 1|^2
        }
        dst[i] = acc;
    }
    return out;
}

Tensor hessSymbolSumAbs2(const Shape& in, const DimSelection& dims) {
    const auto strides = in.strides();
    const std::size_t d1 = dims.indices()[0], d2 = dims.indices()[1];
    Tensor out = Tensor::zeros(in, ElementKind::Complex128);
    auto dst = out.cplx();
    for (std::size_t i = 0; i < in.count(); ++i) {
        const double t1 = 2.0 * std::numbers::pi *
                          static_cast<double>(coordAt(i, strides[d1], in.extent(d1))) /
                          static_cast<double>(in.extent(d1));
        const double t2 = 2.0 * std::numbers::pi *
                          static_cast<double>(coordAt(i, strides[d2], in.extent(d2))) /
                          static_cast<double>(in.extent(d2));
        const double a1 = 2.0 - 2.0 * std::cos(t1); // |m1|^2
        const double a2 = 2.0 - 2.0 * std::cos(t2); // |m2|^2
        dst[i] = a1 * a1 + a1 * a2 + a2 * a2;       // |m11|^2 + |m12|^2 + |m22|^2
    }
    return out;
}

} // namespace detail

} // namespace invop
