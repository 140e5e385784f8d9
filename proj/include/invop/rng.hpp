#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "invop/tensor.hpp"

namespace invop {

/// Deterministic generator (splitmix64 stream) with hand-rolled normal
/// sampling, so sequences are identical across standard libraries and
/// platforms. std::normal_distribution is implementation-defined and would
/// break byte-identical simulation outputs.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in [-1, 1).
    double uniformSym() { return 2.0 * uniform() - 1.0; }

    /// Standard normal via Box-Muller (one value per call; pairs cached).
    double gaussian() {
        if (haveSpare_) {
            haveSpare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(t);
        haveSpare_ = true;
        return r * std::cos(t);
    }

    Tensor uniformTensor(const Shape& s, ElementKind k = ElementKind::Real64) {
        Tensor t = Tensor::zeros(s, k);
        for (double& v : t.raw()) v = uniformSym();
        return t;
    }

    Tensor gaussianTensor(const Shape& s, ElementKind k = ElementKind::Real64) {
        Tensor t = Tensor::zeros(s, k);
        for (double& v : t.raw()) v = gaussian();
        return t;
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool haveSpare_ = false;
};

} // namespace invop
