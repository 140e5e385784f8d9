#pragma once

#include <cstdint>
#include <optional>

#include "invop/tensor.hpp"

namespace invop {

/// Data-generation pipeline: zero-pad the ground truth (centered), convolve
/// each channel with its PSF, extract the centered field-of-view, and add
/// white Gaussian noise scaled so the measured SNR equals the target
/// exactly. targetSnrDb empty means noiseless.
struct SimulationSpec {
    Shape padTo;
    Shape fovSize;
    std::optional<double> targetSnrDb = 10.0;
    std::uint64_t noiseSeed = 0;
    std::optional<std::vector<std::size_t>> fovCorner; // 0-based; default centered
};

struct SimulationResult {
    Tensor data;            // fov-sized, noisy
    Tensor clean;           // fov-sized, noiseless
    double achievedSnrDb;   // 10 log10(||clean||^2 / ||noise||^2)
    std::vector<std::size_t> gtCorner;  // where the ground truth sits in the pad grid
    std::vector<std::size_t> fovCorner; // where the fov sits in the pad grid
};

SimulationResult simulate(const SimulationSpec& spec, const Tensor& groundTruth,
                          const Tensor& otfStack);

/// Centered corner of an inner shape within an outer shape.
std::vector<std::size_t> centeredCorner(const Shape& outer, const Shape& inner);

} // namespace invop
