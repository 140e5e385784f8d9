#include <doctest.h>

#include "invop/fft.hpp"
#include "invop/rng.hpp"
#include "oracles.hpp"

using namespace invop;

TEST_CASE("dft of constant ones is DC-only") {
    Tensor ones = Tensor::full(Shape{4}, 1.0);
    Tensor spec = dft(ones, DimSelection{0});
    CHECK(std::abs(spec.cplx()[0] - std::complex<double>(4.0, 0.0)) < 1e-14);
    for (std::size_t i = 1; i < 4; ++i) CHECK(std::abs(spec.cplx()[i]) < 1e-14);
}

TEST_CASE("dft round trip and linearity") {
    Rng rng(101);
    for (const Shape& s : {Shape{16}, Shape{6, 9}, Shape{5, 8, 3}}) {
        DimSelection dims = DimSelection::all(s.rank());
        Tensor x = rng.uniformTensor(s, ElementKind::Complex128);
        CHECK(oracles::relErr(idft(dft(x, dims), dims), x) < 1e-12);

        Tensor y = rng.uniformTensor(s, ElementKind::Complex128);
        Tensor lhs = dft(add(mul(x, 2.5), mul(y, -1.25)), dims);
        Tensor rhs = add(mul(dft(x, dims), 2.5), mul(dft(y, dims), -1.25));
        CHECK(oracles::relErr(lhs, rhs) < 1e-12);
    }
    // large mixed-radix case (prime factors 2, 3, 7, 17)
    Tensor big = rng.uniformTensor(Shape{48, 34, 21}, ElementKind::Complex128);
    DimSelection dims = DimSelection::all(3);
    CHECK(oracles::relErr(idft(dft(big, dims), dims), big) < 1e-12);

    // million-element rank-4 case
    Tensor huge = rng.uniformTensor(Shape{64, 64, 64, 4}, ElementKind::Complex128);
    DimSelection all4 = DimSelection::all(4);
    CHECK(oracles::relErr(idft(dft(huge, all4), all4), huge) < 1e-12);
}

TEST_CASE("selected-dimension dft matches per-slice naive DFT") {
    Rng rng(55);
    Tensor x = rng.uniformTensor(Shape{3, 4, 2}, ElementKind::Complex128);
    DimSelection dims{0, 1}; // user-facing {1,2}
    Tensor got = dft(x, dims);
    Tensor want = oracles::naiveDft(x, dims);
    CHECK(oracles::relErr(got, want) < 1e-12);

    // inverse direction as well
    Tensor gotInv = idft(x, dims);
    Tensor wantInv = oracles::naiveDft(x, dims, true);
    CHECK(oracles::relErr(gotInv, wantInv) < 1e-12);
}

TEST_CASE("parseval over selected dims") {
    Rng rng(77);
    Tensor x = rng.uniformTensor(Shape{6, 5, 4}, ElementKind::Complex128);
    DimSelection dims{0, 2};
    const double lhs = normSq(dft(x, dims));
    const double rhs = 6.0 * 4.0 * normSq(x);
    CHECK(oracles::relErr(lhs, rhs) < 1e-10);
}

TEST_CASE("dft dimension validation") {
    Tensor x = Tensor::zeros(Shape{4, 4});
    CHECK_THROWS_AS(dft(x, DimSelection{2}), ShapeError);
    CHECK_THROWS_AS(dft(x, DimSelection{}), ShapeError);
}

TEST_CASE("real input is promoted and reproducible") {
    Rng rng(9);
    Tensor x = rng.uniformTensor(Shape{12, 7});
    Tensor a = dft(x, DimSelection{0, 1});
    Tensor b = dft(x, DimSelection{0, 1});
    CHECK(a.isComplex());
    CHECK(norm(sub(a, b)) == 0.0); // bit-identical across runs
}
