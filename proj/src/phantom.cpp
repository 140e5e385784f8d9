#include "invop/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace invop {

namespace {

struct Blob {
    double r, c;   // center, relative coordinates in [0,1]
    double sr, sc; // widths, relative
    double angle;
    double amp;
};

void addBlob(std::span<double> img, std::size_t rows, std::size_t cols, std::size_t stride,
             const Blob& b) {
    const double cr = b.r * static_cast<double>(rows);
    const double cc = b.c * static_cast<double>(cols);
    const double sr = b.sr * static_cast<double>(rows);
    const double sc = b.sc * static_cast<double>(cols);
    const double ca = std::cos(b.angle), sa = std::sin(b.angle);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            const double dr = static_cast<double>(i) - cr;
            const double dc = static_cast<double>(j) - cc;
            const double u = (ca * dr + sa * dc) / sr;
            const double v = (-sa * dr + ca * dc) / sc;
            img[(i * cols + j) * stride] += b.amp * std::exp(-0.5 * (u * u + v * v));
        }
}

void addFilament(std::span<double> img, std::size_t rows, std::size_t cols, std::size_t stride,
                 double phase, double amp, double width) {
    // Sinusoidal curve splatted with a Gaussian cross-section.
    const double R = static_cast<double>(rows), C = static_cast<double>(cols);
    const int steps = 6 * static_cast<int>(std::max(rows, cols));
    for (int s = 0; s <= steps; ++s) {
        const double t = static_cast<double>(s) / steps;
        const double cr = R * (0.15 + 0.7 * t);
        const double cc = C * (0.5 + 0.32 * std::sin(2.0 * std::numbers::pi * (t + phase)));
        const int lo = static_cast<int>(std::floor(-3.0 * width));
        const int hi = static_cast<int>(std::ceil(3.0 * width));
        for (int di = lo; di <= hi; ++di)
            for (int dj = lo; dj <= hi; ++dj) {
                const long i = std::lround(cr) + di;
                const long j = std::lround(cc) + dj;
                if (i < 0 || j < 0 || i >= static_cast<long>(rows) || j >= static_cast<long>(cols))
                    continue;
                const double dr = static_cast<double>(i) - cr;
                const double dc = static_cast<double>(j) - cc;
                const double w = std::exp(-0.5 * (dr * dr + dc * dc) / (width * width));
                auto& px = img[(static_cast<std::size_t>(i) * cols + static_cast<std::size_t>(j)) *
                               stride];
                px = std::max(px, amp * w); // max-blend keeps the ridge profile
            }
    }
}

} // namespace

Tensor makePhantom(const Shape& shape) {
    if (shape.rank() != 2 && shape.rank() != 3)
        throw ShapeError("makePhantom: expected (rows, cols) or (rows, cols, channels)");
    const std::size_t rows = shape.extent(0);
    const std::size_t cols = shape.extent(1);
    const std::size_t channels = shape.rank() == 3 ? shape.extent(2) : 1;

    Tensor out = Tensor::zeros(shape, ElementKind::Real64);
    auto data = out.real();

    for (std::size_t ch = 0; ch < channels; ++ch) {
        std::span<double> img = data.subspan(ch);
        const std::size_t stride = channels;
        const double p = static_cast<double>(ch);

        // smooth background ramp
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) {
                const double u = static_cast<double>(i) / rows;
                const double v = static_cast<double>(j) / cols;
                img[(i * cols + j) * stride] =
                    0.06 + 0.10 * u * (1.0 - v) + 0.04 * std::sin(2.1 * u + 1.3 * v + p);
            }

        addBlob(img, rows, cols, stride, {0.30, 0.28 + 0.06 * p, 0.10, 0.16, 0.5 + 0.4 * p, 0.55});
        addBlob(img, rows, cols, stride, {0.68, 0.70 - 0.05 * p, 0.14, 0.08, -0.7 + 0.3 * p, 0.45});
        addBlob(img, rows, cols, stride, {0.22, 0.75, 0.06, 0.06, 0.0, 0.35});
        addFilament(img, rows, cols, stride, 0.07 * p, 0.65, 1.3);
        addFilament(img, rows, cols, stride, 0.45 + 0.05 * p, 0.50, 0.9);

        // clamp into [0, 1]
        for (std::size_t i = 0; i < rows * cols; ++i) {
            double& v = img[i * stride];
            v = std::min(std::max(v, 0.0), 1.0);
        }
    }
    return out;
}

} // namespace invop
