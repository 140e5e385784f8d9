#include "invop/tensor_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

namespace invop {

void writeTensor(const std::filesystem::path& path, const Tensor& t) {
    nlohmann::json header;
    header["shape"] = t.shape().dims();
    header["kind"] = kindName(t.kind());
    header["order"] = "row-major";

    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("writeTensor: cannot open " + path.string());
    f << header.dump() << "\n";
    auto bytes = t.raw();
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size() * sizeof(double)));
    if (!f) throw ConfigError("writeTensor: write failed for " + path.string());
}

Tensor readTensor(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("readTensor: cannot open " + path.string());
    std::string line;
    if (!std::getline(f, line)) throw ConfigError("readTensor: missing header in " + path.string());

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("readTensor: bad header in " + path.string() + ": " + e.what());
    }
    if (!header.contains("shape") || !header.contains("kind"))
        throw ConfigError("readTensor: header must carry shape and kind: " + path.string());
    if (header.value("order", "row-major") != "row-major")
        throw ConfigError("readTensor: only row-major files are supported");

    Shape shape(header["shape"].get<std::vector<std::size_t>>());
    const std::string kindStr = header["kind"].get<std::string>();
    ElementKind kind;
    if (kindStr == "real64")
        kind = ElementKind::Real64;
    else if (kindStr == "complex128")
        kind = ElementKind::Complex128;
    else
        throw ConfigError("readTensor: unknown element kind '" + kindStr + "'");

    Tensor t = Tensor::zeros(shape, kind);
    auto bytes = t.raw();
    f.read(reinterpret_cast<char*>(bytes.data()),
           static_cast<std::streamsize>(bytes.size() * sizeof(double)));
    if (f.gcount() != static_cast<std::streamsize>(bytes.size() * sizeof(double)))
        throw ConfigError("readTensor: truncated payload in " + path.string());
    return t;
}

void writePgmChannels(const std::filesystem::path& prefix, const Tensor& image) {
    const Tensor img = image.realPart();
    const auto& dims = img.shape().dims();
    if (dims.size() < 2) throw ShapeError("writePgmChannels: need at least rank 2");

    const std::size_t channels = dims.size() == 2 ? 1 : dims.back();
    std::size_t rows = dims[0], cols = dims[1];
    std::size_t planeStride = 1;
    // channel-last layout: per-channel stride across the trailing axis
    const std::size_t chStride = dims.size() == 2 ? 0 : 1;
    for (std::size_t d = 2; d < dims.size(); ++d) planeStride *= dims[d];

    auto data = img.real();
    for (std::size_t c = 0; c < channels; ++c) {
        double lo = data[c * chStride], hi = lo;
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t k = 0; k < cols; ++k) {
                double v = data[(r * cols + k) * planeStride + c * chStride];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;

        std::filesystem::path p = prefix;
        p += "_ch" + std::to_string(c + 1) + ".pgm";
        std::ofstream f(p, std::ios::binary);
        if (!f) throw ConfigError("writePgmChannels: cannot open " + p.string());
        f << "P5\n" << cols << " " << rows << "\n255\n";
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t k = 0; k < cols; ++k) {
                double v = data[(r * cols + k) * planeStride + c * chStride];
                unsigned char byte = static_cast<unsigned char>(std::lround((v - lo) * scale));
                f.write(reinterpret_cast<const char*>(&byte), 1);
            }
    }
}

} // namespace invop
