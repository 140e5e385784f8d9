#include "invop/simulate.hpp"

#include <cmath>

#include "invop/linops.hpp"
#include "invop/rng.hpp"

namespace invop {

std::vector<std::size_t> centeredCorner(const Shape& outer, const Shape& inner) {
    if (outer.rank() != inner.rank())
        throw ShapeError("centeredCorner: rank mismatch " + outer.str() + " vs " + inner.str());
    std::vector<std::size_t> corner(outer.rank());
    for (std::size_t d = 0; d < outer.rank(); ++d) {
        if (inner.extent(d) > outer.extent(d))
            throw ShapeError("centeredCorner: inner shape exceeds outer shape");
        corner[d] = (outer.extent(d) - inner.extent(d)) / 2;
    }
    return corner;
}

SimulationResult simulate(const SimulationSpec& spec, const Tensor& groundTruth,
                          const Tensor& otfStack) {
    const Shape& pad = spec.padTo;
    if (otfStack.shape() != pad)
        throw ShapeError("simulate: OTF stack must live on the padded grid " + pad.str());
    for (std::size_t d = 0; d < pad.rank(); ++d)
        if (groundTruth.shape().extent(d) > pad.extent(d) ||
            spec.fovSize.extent(d) > groundTruth.shape().extent(d))
            throw ShapeError("simulate: need padTo >= ground truth >= fov per dimension");

    SimulationResult out;
    out.gtCorner = centeredCorner(pad, groundTruth.shape());
    out.fovCorner = spec.fovCorner ? *spec.fovCorner : centeredCorner(pad, spec.fovSize);

    // Embed, convolve per channel, extract the field of view.
    OpPtr embed = makeSelectorPatch(pad, out.gtCorner, groundTruth.shape().dims());
    Tensor padded = embed->applyAdjoint(groundTruth);
    OpPtr conv = makeConvFromMtf(otfStack, DimSelection{0, 1}, true);
    Tensor blurred = conv->apply(padded);
    OpPtr fov = makeSelectorPatch(pad, out.fovCorner, spec.fovSize.dims());
    out.clean = fov->apply(blurred);

    if (!spec.targetSnrDb) {
        out.data = out.clean;
        out.achievedSnrDb = std::numeric_limits<double>::infinity();
        return out;
    }

    Rng rng(spec.noiseSeed);
    Tensor noise = rng.gaussianTensor(out.clean.shape());
    const double cleanNorm = norm(out.clean);
    const double noiseNorm = norm(noise);
    if (noiseNorm == 0.0) throw NumericalError("simulate: degenerate noise draw");
    // Scale so 10 log10(||clean||^2 / ||s w||^2) equals the target exactly;
    // a zero ground truth keeps the unit-variance draw.
    const double s =
        cleanNorm > 0.0 ? cleanNorm / (noiseNorm * std::pow(10.0, *spec.targetSnrDb / 20.0)) : 1.0;
    noise.scaleInPlace(s);
    out.data = add(out.clean, noise);
    const double errSq = normSq(noise);
    out.achievedSnrDb = cleanNorm > 0.0
                            ? 10.0 * std::log10(normSq(out.clean) / errSq)
                            : -std::numeric_limits<double>::infinity();
    return out;
}

} // namespace invop
