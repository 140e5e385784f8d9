#include <doctest.h>

#include "invop/rng.hpp"
#include "invop/tensor.hpp"
#include "invop/tensor_io.hpp"

#include <filesystem>

using namespace invop;

TEST_CASE("shape invariants") {
    CHECK(Shape({3, 4, 2}).count() == 24);
    CHECK(Shape({3, 4, 2}).strides() == std::vector<std::size_t>{8, 2, 1});
    CHECK_THROWS_AS(Shape({3, 0, 2}), ShapeError);
    CHECK_THROWS_AS(DimSelection({1, 1}), ShapeError);
    CHECK_THROWS_AS(DimSelection::fromOneBased({0}), ShapeError);
    CHECK(DimSelection::fromOneBased({1, 2}) == DimSelection({0, 1}));
}

TEST_CASE("inner product") {
    Tensor x = Tensor::fromReal(Shape{2}, {1, 2});
    Tensor y = Tensor::fromReal(Shape{2}, {3, 4});
    CHECK(inner(x, y).real() == doctest::Approx(11.0)); // <(1,2),(3,4)> = 11

    Rng rng(42);
    Tensor r = rng.uniformTensor(Shape{5, 3});
    CHECK(inner(r, r).real() == doctest::Approx(normSq(r)));
    CHECK(inner(r, r).real() >= 0.0);

    Tensor e1 = Tensor::zeros(Shape{4});
    Tensor e2 = Tensor::zeros(Shape{4});
    e1.real()[0] = 1.0;
    e2.real()[2] = 1.0;
    CHECK(inner(e1, e2).real() == 0.0);

    // conjugate-linear in the second argument
    Tensor a = Tensor::fromComplex(Shape{1}, {{1.0, 2.0}});
    Tensor b = Tensor::fromComplex(Shape{1}, {{3.0, -1.0}});
    auto ip = inner(a, b);
    CHECK(ip.real() == doctest::Approx(1.0 * 3.0 + 2.0 * -1.0));
    CHECK(ip.imag() == doctest::Approx(2.0 * 3.0 - 1.0 * -1.0));

    CHECK_THROWS_AS(inner(x, Tensor::zeros(Shape{3})), ShapeError);
}

TEST_CASE("elementwise maps") {
    Tensor t = Tensor::fromReal(Shape{3}, {-1, 0, 2});
    Tensor m = max0(t);
    CHECK(m.real()[0] == 0.0);
    CHECK(m.real()[1] == 0.0);
    CHECK(m.real()[2] == 2.0);

    Tensor c = Tensor::fromComplex(Shape{1}, {{3.0, 4.0}});
    CHECK(abs2(c).real()[0] == doctest::Approx(25.0));

    Tensor r = Tensor::fromReal(Shape{2}, {1.5, -2.0});
    CHECK(norm(sub(conjugate(r), r)) == 0.0); // conj of real is identity

    CHECK_THROWS_AS(div(t, Tensor::fromReal(Shape{3}, {1, 0, 1})), DomainError);
    CHECK_THROWS_AS(sqrtElem(t), DomainError);
    CHECK_THROWS_AS(add(t, Tensor::zeros(Shape{4})), ShapeError);
}

TEST_CASE("tensor file round trip") {
    Rng rng(7);
    const auto dir = std::filesystem::temp_directory_path() / "invop_tensor_io";
    std::filesystem::create_directories(dir);

    Tensor real = rng.uniformTensor(Shape{3, 5});
    writeTensor(dir / "r.invt", real);
    Tensor realBack = readTensor(dir / "r.invt");
    CHECK(realBack.sameShapeKind(real));
    CHECK(norm(sub(realBack, real)) == 0.0);

    Tensor cplx = rng.uniformTensor(Shape{4, 2}, ElementKind::Complex128);
    writeTensor(dir / "c.invt", cplx);
    Tensor cplxBack = readTensor(dir / "c.invt");
    CHECK(cplxBack.sameShapeKind(cplx));
    CHECK(norm(sub(cplxBack, cplx)) == 0.0);

    CHECK_THROWS_AS(readTensor(dir / "missing.invt"), ConfigError);
}

TEST_CASE("content digest is byte-sensitive") {
    Tensor a = Tensor::fromReal(Shape{4}, {1, 2, 3, 4});
    Tensor b = Tensor::fromReal(Shape{4}, {1, 2, 3, 4});
    Tensor c = Tensor::fromReal(Shape{4}, {1, 2, 3, 5});
    CHECK(contentDigest(a) == contentDigest(b));
    CHECK(contentDigest(a) != contentDigest(c));
    CHECK(contentDigest(a) != contentDigest(Tensor::fromReal(Shape{2, 2}, {1, 2, 3, 4})));
}
