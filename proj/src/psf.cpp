#include "invop/psf.hpp"

#include <cmath>
#include <numbers>

#include "invop/fft.hpp"

namespace invop {

double PsfSpec::cutoff(std::size_t channel) const {
    if (channel >= wavelengthsNm.size())
        throw ConfigError("PsfSpec: channel index out of range");
    if (na <= 0.0 || pixelNm <= 0.0 || wavelengthsNm[channel] <= 0.0)
        throw ConfigError("PsfSpec: NA, pixel size and wavelengths must be positive");
    return 2.0 * na / wavelengthsNm[channel];
}

double airyProfile(double rho, double cutoff) {
    if (rho >= cutoff) return 0.0;
    const double t = std::acos(rho / cutoff);
    return (2.0 * t - std::sin(2.0 * t)) / std::numbers::pi;
}

namespace {

// Signed DFT frequency in cycles/nm for bin k of n samples at `pixel` nm.
double binFrequency(std::size_t k, std::size_t n, double pixel) {
    const auto half = static_cast<long long>(n / 2);
    long long s = static_cast<long long>(k);
    if (s > half) s -= static_cast<long long>(n);
    return static_cast<double>(s) / (static_cast<double>(n) * pixel);
}

} // namespace

PsfPair makePsf(const PsfSpec& spec, std::size_t channel) {
    if (spec.gridShape.rank() < 2)
        throw ConfigError("makePsf: grid must have at least two dimensions");
    const std::size_t rows = spec.gridShape.extent(0);
    const std::size_t cols = spec.gridShape.extent(1);
    if (rows % 2 != 0 || cols % 2 != 0)
        throw ConfigError("makePsf: grid extents must be even along the convolved dimensions");

    const double rhoC = spec.cutoff(channel);
    Tensor otf = Tensor::zeros(Shape{rows, cols}, ElementKind::Real64);
    auto o = otf.real();
    for (std::size_t i = 0; i < rows; ++i) {
        const double fy = binFrequency(i, rows, spec.pixelNm);
        for (std::size_t j = 0; j < cols; ++j) {
            const double fx = binFrequency(j, cols, spec.pixelNm);
            o[i * cols + j] = airyProfile(std::hypot(fy, fx), rhoC);
        }
    }
    // h(0) = 1 exactly after normalization (the analytic value is already 1).
    const double dc = o[0];
    if (dc <= 0.0) throw NumericalError("makePsf: degenerate transfer function at DC");
    for (double& v : o) v /= dc;

    Tensor psf = idft(otf, DimSelection{0, 1}).realPart();
    return {std::move(otf), std::move(psf)};
}

Tensor stackOtfs(const PsfSpec& spec) {
    const std::size_t channels =
        spec.gridShape.rank() >= 3 ? spec.gridShape.extent(2) : std::size_t(1);
    if (spec.gridShape.rank() > 3)
        throw ConfigError("stackOtfs: grids beyond (rows, cols, channels) are not supported");
    if (channels != spec.wavelengthsNm.size())
        throw ConfigError("stackOtfs: one wavelength per channel required (" +
                          std::to_string(channels) + " channels, " +
                          std::to_string(spec.wavelengthsNm.size()) + " wavelengths)");

    Tensor stack = Tensor::zeros(spec.gridShape, ElementKind::Complex128);
    auto dst = stack.cplx();
    const std::size_t rows = spec.gridShape.extent(0);
    const std::size_t cols = spec.gridShape.extent(1);
    for (std::size_t c = 0; c < channels; ++c) {
        PsfPair pair = makePsf(spec, c);
        auto src = pair.otf.real();
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j)
                dst[(i * cols + j) * channels + c] = src[i * cols + j];
    }
    return stack;
}

} // namespace invop
