#pragma once

#include "invop/tensor.hpp"

namespace invop {

/// Diffraction-limited OTF parameters: numerical aperture, per-channel
/// excitation wavelength (nm), camera pixel size (nm), and the grid the
/// kernels live on (first two dimensions are the convolved ones; an optional
/// third dimension carries the channels).
struct PsfSpec {
    double na = 1.4;
    std::vector<double> wavelengthsNm{654.0, 542.0, 477.0};
    double pixelNm = 64.5;
    Shape gridShape;

    double cutoff(std::size_t channel) const; // rho_c = 2 NA / lambda, cycles/nm
};

struct PsfPair {
    Tensor otf; // real-valued transfer function stored over the 2-D grid
    Tensor psf; // spatial kernel (inverse DFT, real part)
};

/// Airy-disk transfer profile on the rows x cols grid of the spec:
/// h(rho) = (2 acos(rho/rho_c) - sin(2 acos(rho/rho_c))) / pi below cutoff,
/// 0 above; normalized so h(0) = 1. Grid extents must be even along the
/// convolved dimensions.
PsfPair makePsf(const PsfSpec& spec, std::size_t channel);

/// Full-grid frequency kernel with one 2-D OTF per channel, ready for the
/// multichannel convolution operator (complex128, conjugate-symmetric).
Tensor stackOtfs(const PsfSpec& spec);

/// Scalar transfer profile (exposed for direct checks).
double airyProfile(double rho, double cutoff);

} // namespace invop
