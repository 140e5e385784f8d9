#include <doctest.h>

#include "invop/fft.hpp"
#include "invop/linops.hpp"
#include "invop/rng.hpp"
#include "oracles.hpp"

using namespace invop;

TEST_CASE("conv with unit mtf is the identity") {
    Rng rng(21);
    Shape s{4, 6};
    OpPtr conv = makeConvFromMtf(Tensor::full(s, std::complex<double>(1.0, 0.0)),
                                 DimSelection{0, 1}, true);
    Tensor f = rng.uniformTensor(s);
    CHECK(oracles::relErr(conv->apply(f), f) < 1e-13);
}

TEST_CASE("delta kernel shifted by s produces a circular shift") {
    Rng rng(22);
    Shape s{6, 6};
    Tensor kernel = Tensor::zeros(s, ElementKind::Real64);
    const long shiftR = 2, shiftC = 5;
    kernel.real()[static_cast<std::size_t>(shiftR) * 6 + static_cast<std::size_t>(shiftC)] = 1.0;
    OpPtr conv = makeConvFromSpatial(kernel, DimSelection{0, 1});
    Tensor f = rng.uniformTensor(s);
    Tensor want = oracles::circularShift(f, {shiftR, shiftC});
    CHECK(oracles::relErr(conv->apply(f), want) < 1e-12);
}

TEST_CASE("multichannel conv applies per-channel kernels independently") {
    Rng rng(23);
    Shape s{8, 8, 3};
    Tensor kernels = rng.uniformTensor(s);
    OpPtr conv = makeConvFromSpatial(kernels, DimSelection{0, 1});
    Tensor f = rng.uniformTensor(s);
    Tensor got = conv->apply(f);

    // each channel equals its own 2-D convolution
    for (std::size_t c = 0; c < 3; ++c) {
        Shape sc{8, 8};
        Tensor kc = Tensor::zeros(sc, ElementKind::Real64);
        Tensor fc = Tensor::zeros(sc, ElementKind::Real64);
        for (std::size_t i = 0; i < 64; ++i) {
            kc.real()[i] = kernels.real()[i * 3 + c];
            fc.real()[i] = f.real()[i * 3 + c];
        }
        Tensor want = oracles::naiveCircularConv(fc, kc, DimSelection{0, 1});
        for (std::size_t i = 0; i < 64; ++i)
            CHECK(std::abs(got.real()[i * 3 + c] - want.real()[i]) < 1e-11);
    }
}

TEST_CASE("isReal validation rejects asymmetric kernels") {
    Shape s{4};
    Tensor mtf = Tensor::zeros(s, ElementKind::Complex128);
    mtf.cplx()[0] = 1.0;
    mtf.cplx()[1] = {0.0, 1.0}; // conj symmetry would need mtf[3] = -i
    mtf.cplx()[2] = 1.0;
    mtf.cplx()[3] = {0.0, 1.0};
    CHECK_THROWS_AS(makeConvFromMtf(mtf, DimSelection{0}, true), DomainError);
    CHECK_NOTHROW(makeConvFromMtf(mtf, DimSelection{0}, false));
}

TEST_CASE("gradient stencil") {
    SUBCASE("constant image maps to zero") {
        OpPtr grad = makeGrad(Shape{5, 4}, DimSelection{0, 1});
        Tensor z = grad->apply(Tensor::full(Shape{5, 4}, 3.7));
        CHECK(norm(z) == 0.0);
    }

    SUBCASE("1-D circular forward difference") {
        OpPtr grad = makeGrad(Shape{3}, DimSelection{0});
        Tensor f = Tensor::fromReal(Shape{3}, {0, 1, 3});
        Tensor g = grad->apply(f);
        CHECK(g.shape() == Shape{3, 1});
        CHECK(g.real()[0] == 1.0);
        CHECK(g.real()[1] == 2.0);
        CHECK(g.real()[2] == -3.0);
    }

    SUBCASE("adjoint is the negative circular divergence") {
        Rng rng(24);
        OpPtr grad = makeGrad(Shape{6, 6}, DimSelection{0, 1});
        for (int r = 0; r < 5; ++r) {
            Tensor f = rng.uniformTensor(grad->sizein());
            Tensor v = rng.uniformTensor(grad->sizeout());
            const double lhs = inner(grad->apply(f), v).real();
            const double rhs = inner(f, grad->applyAdjoint(v)).real();
            CHECK(std::abs(lhs - rhs) <= 1e-10 * (std::abs(lhs) + std::abs(rhs) + 1.0));
        }
    }

    SUBCASE("grad^T grad equals the dense circular Laplacian") {
        OpPtr grad = makeGrad(Shape{6, 6}, DimSelection{0, 1});
        OpPtr gtg = compose(adjointOf(grad), grad);
        Eigen::MatrixXd direct =
            oracles::denseMatrix(genericComposition({genericAdjoint(grad), grad}));
        Eigen::MatrixXd simplified = oracles::denseMatrix(gtg);
        CHECK((direct - simplified).cwiseAbs().maxCoeff() < 1e-11);
        // stencil rows: 4 on the diagonal, -1 at circular neighbors
        CHECK(direct(0, 0) == doctest::Approx(4.0));
        CHECK(direct(0, 1) == doctest::Approx(-1.0));
        CHECK(direct(0, 5) == doctest::Approx(-1.0)); // wrap in the second dim
        CHECK(direct(0, 6) == doctest::Approx(-1.0));
        CHECK(direct(0, 30) == doctest::Approx(-1.0)); // wrap in the first dim
    }
}

TEST_CASE("hessian stencil") {
    SUBCASE("constant maps to zero") {
        OpPtr hess = makeHess(Shape{5, 5}, DimSelection{0, 1});
        CHECK(norm(hess->apply(Tensor::full(Shape{5, 5}, 2.0))) == 0.0);
    }

    SUBCASE("components match the dense second-difference matrices on 5x5") {
        Shape s{5, 5};
        OpPtr hess = makeHess(s, DimSelection{0, 1});
        OpPtr d1 = makeGrad(s, DimSelection{0});
        OpPtr d2 = makeGrad(s, DimSelection{1});

        Rng rng(25);
        Tensor f = rng.uniformTensor(s);
        Tensor hf = hess->apply(f);

        // D11 f via applying the first-difference twice (drop the unit axes)
        auto firstDiffTwice = [&](const OpPtr& da, const OpPtr& db) {
            Tensor t = da->apply(f);
            Tensor flat = Tensor::fromReal(s, std::vector<double>(t.real().begin(),
                                                                  t.real().end()));
            Tensor t2 = db->apply(flat);
            return Tensor::fromReal(s, std::vector<double>(t2.real().begin(), t2.real().end()));
        };
        Tensor d11 = firstDiffTwice(d1, d1);
        Tensor d12 = firstDiffTwice(d1, d2);
        Tensor d22 = firstDiffTwice(d2, d2);
        for (std::size_t i = 0; i < 25; ++i) {
            CHECK(std::abs(hf.real()[i * 3 + 0] - d11.real()[i]) < 1e-12);
            CHECK(std::abs(hf.real()[i * 3 + 1] - d12.real()[i]) < 1e-12);
            CHECK(std::abs(hf.real()[i * 3 + 2] - d22.real()[i]) < 1e-12);
        }
    }

    SUBCASE("requires exactly two dimensions") {
        CHECK_THROWS_AS(makeHess(Shape{4, 4, 2}, DimSelection{0, 1, 2}), ShapeError);
    }
}

TEST_CASE("samplers") {
    SUBCASE("downsample keeps every factor-th sample") {
        OpPtr down = makeDownsample(Shape{4}, {2});
        Tensor f = Tensor::fromReal(Shape{4}, {1, 2, 3, 4});
        Tensor g = down->apply(f);
        CHECK(g.shape() == Shape{2});
        CHECK(g.real()[0] == 1.0);
        CHECK(g.real()[1] == 3.0);
    }

    SUBCASE("S S^T = identity on the small space (nu = 1)") {
        Rng rng(26);
        Shape s{6, 4};
        for (const OpPtr& S :
             {makeDownsample(s, {3, 2}), makeSelectorPatch(s, {2, 1}, {3, 2})}) {
            OpPtr ssT = compose(S, adjointOf(S));
            for (int r = 0; r < 5; ++r) {
                Tensor v = rng.uniformTensor(S->sizeout());
                CHECK(oracles::relErr(ssT->apply(v), v) < 1e-15);
                // and through the unsimplified chain as well
                CHECK(oracles::relErr(S->apply(S->applyAdjoint(v)), v) < 1e-15);
            }
        }
    }

    SUBCASE("sumPatches adds the blocks elementwise") {
        OpPtr sp = makeSumPatches(Shape{4, 4}, {2, 2});
        Rng rng(27);
        Tensor f = rng.uniformTensor(Shape{4, 4});
        Tensor g = sp->apply(f);
        auto fd = f.real();
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) {
                const double want = fd[i * 4 + j] + fd[i * 4 + (j + 2)] +
                                    fd[(i + 2) * 4 + j] + fd[(i + 2) * 4 + (j + 2)];
                CHECK(g.real()[i * 2 + j] == doctest::Approx(want).epsilon(1e-14));
            }
    }

    SUBCASE("geometry validation") {
        CHECK_THROWS_AS(makeDownsample(Shape{5}, {2}), ShapeError);
        CHECK_THROWS_AS(makeSelectorPatch(Shape{4, 4}, {3, 0}, {2, 2}), ShapeError);
        CHECK_THROWS_AS(makeSumPatches(Shape{4, 4}, {3, 2}), ShapeError);
    }
}

TEST_CASE("conv composition has the product kernel") {
    Rng rng(28);
    Shape s{6, 6};
    OpPtr A = makeConvFromSpatial(rng.uniformTensor(s), DimSelection{0, 1});
    OpPtr B = makeConvFromSpatial(rng.uniformTensor(s), DimSelection{0, 1});
    OpPtr AB = compose(A, B);
    REQUIRE(AB->kind() == OpKind::Conv);
    for (int r = 0; r < 5; ++r) {
        Tensor f = rng.uniformTensor(s);
        CHECK(oracles::relErr(AB->apply(f), A->apply(B->apply(f))) < 1e-11);
    }
}
