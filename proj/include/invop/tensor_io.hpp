#pragma once

#include <filesystem>

#include "invop/tensor.hpp"

namespace invop {

/// Tensor file format: one JSON header line
///   {"shape":[...],"kind":"real64"|"complex128","order":"row-major"}\n
/// followed by the raw little-endian element bytes (complex interleaved
/// re,im). All CLI I/O uses this format.
void writeTensor(const std::filesystem::path& path, const Tensor& t);
Tensor readTensor(const std::filesystem::path& path);

/// Per-channel 8-bit PGM export with min-max normalization. The channel axis
/// is the last dimension; a rank-2 tensor is a single channel. Writes
/// <prefix>_ch<k>.pgm. Cosmetic output only.
void writePgmChannels(const std::filesystem::path& prefix, const Tensor& image);

} // namespace invop
