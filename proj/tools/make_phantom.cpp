// Writes the built-in test image to a tensor file (ground truth for the
// simulation pipeline).

#include <iostream>
#include <string>

#include "invop/phantom.hpp"
#include "invop/tensor_io.hpp"

int main(int argc, char** argv) {
    if (argc < 2 || argc > 5) {
        std::cerr << "usage: make_phantom <out.invt> [rows=64] [cols=64] [channels=3]\n";
        return 1;
    }
    try {
        const std::size_t rows = argc > 2 ? std::stoul(argv[2]) : 64;
        const std::size_t cols = argc > 3 ? std::stoul(argv[3]) : 64;
        const std::size_t channels = argc > 4 ? std::stoul(argv[4]) : 3;
        invop::Shape shape = channels > 1 ? invop::Shape{rows, cols, channels}
                                          : invop::Shape{rows, cols};
        invop::writeTensor(argv[1], invop::makePhantom(shape));
        std::cout << "wrote phantom " << shape.str() << " to " << argv[1] << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
