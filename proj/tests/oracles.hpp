#pragma once

// Independent oracles for the test suites: naive transforms, dense-matrix
// reductions, finite differences and brute-force prox solvers. These stay
// deliberately simple (O(n^2) is fine) and never call the code paths they
// are used to check.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include "invop/cost.hpp"
#include "invop/op.hpp"

namespace oracles {

using invop::DimSelection;
using invop::Shape;
using invop::Tensor;

// Direct O(n^2) DFT along one dimension (unnormalized forward, 1/n inverse).
inline Tensor naiveDft1d(const Tensor& x, std::size_t dim, bool inverse) {
    Tensor in = x.asComplex();
    Tensor out = Tensor::zeros(in.shape(), invop::ElementKind::Complex128);
    const auto strides = in.shape().strides();
    const std::size_t n = in.shape().extent(dim);
    const std::size_t stride = strides[dim];
    const std::size_t total = in.size();
    auto src = in.cplx();
    auto dst = out.cplx();
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t i = 0; i < total; ++i) {
        const std::size_t c = (i / stride) % n;
        const std::size_t base = i - c * stride;
        std::complex<double> acc = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
            const double ang = sign * 2.0 * std::numbers::pi * static_cast<double>(c) *
                               static_cast<double>(m) / static_cast<double>(n);
            acc += src[base + m * stride] * std::polar(1.0, ang);
        }
        dst[i] = inverse ? acc / static_cast<double>(n) : acc;
    }
    return out;
}

inline Tensor naiveDft(const Tensor& x, const DimSelection& dims, bool inverse = false) {
    Tensor out = x.asComplex();
    for (std::size_t d : dims.indices()) out = naiveDft1d(out, d, inverse);
    return out;
}

// Circular shift by `shift` (per dimension, can exceed extents).
inline Tensor circularShift(const Tensor& x, const std::vector<long>& shift) {
    const auto& shape = x.shape();
    const auto strides = shape.strides();
    Tensor out = Tensor::zeros(shape, x.kind());
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::size_t j = 0;
        for (std::size_t d = 0; d < shape.rank(); ++d) {
            const long n = static_cast<long>(shape.extent(d));
            const long c = static_cast<long>((i / strides[d]) % shape.extent(d));
            const long moved = ((c + shift[d]) % n + n) % n;
            j += static_cast<std::size_t>(moved) * strides[d];
        }
        out.set(j, x.get(i));
    }
    return out;
}

// Direct spatial circular convolution over the selected dims (real tensors).
// The kernel lives on the full shape: its slice along the non-selected dims
// is the kernel for that slice (one kernel per channel).
inline Tensor naiveCircularConv(const Tensor& f, const Tensor& kernel, const DimSelection& dims) {
    const auto& shape = f.shape();
    const auto strides = shape.strides();
    Tensor out = Tensor::zeros(shape, invop::ElementKind::Real64);
    auto src = f.real();
    auto ker = kernel.real();
    auto dst = out.real();

    // enumerate offsets over the selected dims only
    std::vector<std::size_t> sel = dims.indices();
    std::vector<std::size_t> offsets(sel.size(), 0);
    for (;;) {
        std::size_t kOffset = 0;
        for (std::size_t s = 0; s < sel.size(); ++s) kOffset += offsets[s] * strides[sel[s]];
        for (std::size_t i = 0; i < f.size(); ++i) {
            std::size_t j = i;      // shifted source index
            std::size_t kIdx = i;   // kernel index: offsets on selected dims,
                                    // the point's own coords elsewhere
            for (std::size_t s = 0; s < sel.size(); ++s) {
                const std::size_t d = sel[s];
                const std::size_t n = shape.extent(d);
                const std::size_t c = (i / strides[d]) % n;
                const std::size_t moved = (c + n - offsets[s] % n) % n;
                j += (moved - c) * strides[d];
                kIdx -= c * strides[d];
            }
            dst[i] += ker[kIdx + kOffset] * src[j];
        }
        std::size_t s = 0;
        for (; s < sel.size(); ++s) {
            if (++offsets[s] < shape.extent(sel[s])) break;
            offsets[s] = 0;
        }
        if (s == sel.size()) break;
    }
    return out;
}

// Dense matrix of a real linear operator via basis vectors.
inline Eigen::MatrixXd denseMatrix(const invop::OpPtr& op) {
    const std::size_t n = op->sizein().count();
    const std::size_t m = op->sizeout().count();
    Eigen::MatrixXd M(m, n);
    for (std::size_t j = 0; j < n; ++j) {
        Tensor e = Tensor::zeros(op->sizein(), invop::ElementKind::Real64);
        e.real()[j] = 1.0;
        Tensor col = op->apply(e);
        auto c = col.real();
        for (std::size_t i = 0; i < m; ++i) M(static_cast<long>(i), static_cast<long>(j)) = c[i];
    }
    return M;
}

inline Eigen::VectorXd toEigen(const Tensor& t) {
    auto r = t.real();
    return Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<long>(r.size()));
}

inline Tensor fromEigen(const Shape& shape, const Eigen::VectorXd& v) {
    std::vector<double> data(v.data(), v.data() + v.size());
    return Tensor::fromReal(shape, std::move(data));
}

// Central finite difference of t -> <H(f + t u), v> at t = 0.
inline double fdDirectional(const invop::OpPtr& op, const Tensor& f, const Tensor& u,
                            const Tensor& v, double h) {
    Tensor fp = f, fm = f;
    fp.axpyInPlace(h, u);
    fm.axpyInPlace(-h, u);
    const double a = invop::inner(op->apply(fp), v).real();
    const double b = invop::inner(op->apply(fm), v).real();
    return (a - b) / (2.0 * h);
}

// Central finite-difference gradient of a cost (small problems only).
inline Tensor fdGradient(const invop::CostPtr& c, const Tensor& f, double h) {
    Tensor g = Tensor::zeros(f.shape(), invop::ElementKind::Real64);
    auto gs = g.real();
    for (std::size_t i = 0; i < f.size(); ++i) {
        Tensor fp = f, fm = f;
        fp.real()[i] += h;
        fm.real()[i] -= h;
        gs[i] = (c->evaluate(fp) - c->evaluate(fm)) / (2.0 * h);
    }
    return g;
}

// Plain gradient descent for min_f 1/2||f-z||^2 + alpha * smooth(f).
inline Tensor gradDescentProx(const Tensor& z, double alpha,
                              const std::function<double(const Tensor&)>& value,
                              const std::function<Tensor(const Tensor&)>& grad, double step,
                              std::size_t iters) {
    (void)value;
    Tensor f = z;
    for (std::size_t k = 0; k < iters; ++k) {
        Tensor g = sub(f, z);
        g.axpyInPlace(alpha, grad(f));
        f.axpyInPlace(-step, g);
    }
    return f;
}

// Chambolle-Pock on min_f 1/2||f-z||^2 + alpha J(L f), using only the plain
// prox of J and L's apply/adjoint. Independent of the composed-prox path.
inline Tensor pdhgProx(const invop::CostPtr& outer, const invop::OpPtr& L, const Tensor& z,
                       double alpha, double opNorm, std::size_t iters) {
    const double tau = 0.9 / opNorm;
    const double sigma = 0.9 / opNorm;
    Tensor f = z;
    Tensor fbar = f;
    Tensor y = Tensor::zeros(L->sizeout(), invop::ElementKind::Real64);
    for (std::size_t k = 0; k < iters; ++k) {
        // dual ascent with Moreau
        Tensor v = y;
        v.axpyInPlace(sigma, L->apply(fbar));
        Tensor pr = outer->prox(invop::mul(v, 1.0 / sigma), alpha / sigma);
        y = v;
        y.axpyInPlace(-sigma, pr);
        // primal: prox of tau/2 ||f - z||^2
        Tensor fNew = f;
        fNew.axpyInPlace(-tau, L->applyAdjoint(y));
        fNew.axpyInPlace(tau, z);
        fNew.scaleInPlace(1.0 / (1.0 + tau));
        // extrapolate
        fbar = fNew;
        fbar.scaleInPlace(2.0);
        fbar.subInPlace(f);
        f = std::move(fNew);
    }
    return f;
}

// Test-local conjugate gradient on a functional operator.
inline Tensor cgSolve(const std::function<Tensor(const Tensor&)>& A, const Tensor& b,
                      double tol, std::size_t maxit) {
    Tensor x = Tensor::zeros(b.shape(), b.kind());
    Tensor r = b;
    Tensor p = r;
    double rs = invop::normSq(r);
    const double nb = invop::norm(b);
    for (std::size_t it = 0; it < maxit && std::sqrt(rs) > tol * nb; ++it) {
        Tensor ap = A(p);
        const double alpha = rs / invop::inner(p, ap).real();
        x.axpyInPlace(alpha, p);
        r.axpyInPlace(-alpha, ap);
        const double rsNew = invop::normSq(r);
        const double beta = rsNew / rs;
        rs = rsNew;
        Tensor pn = r;
        pn.axpyInPlace(beta, p);
        p = std::move(pn);
    }
    return x;
}

// Golden-section minimizer on [lo, hi].
inline double goldenSection(const std::function<double(double)>& phi, double lo, double hi,
                            std::size_t iters = 200) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    for (std::size_t k = 0; k < iters; ++k) {
        if (phi(c) < phi(d))
            b = d;
        else
            a = c;
        c = b - gr * (b - a);
        d = a + gr * (b - a);
    }
    return 0.5 * (a + b);
}

inline double relErr(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

inline double relErr(const Tensor& got, const Tensor& want) {
    return invop::norm(invop::sub(got.asComplex(), want.asComplex())) /
           std::max(invop::norm(want), 1e-300);
}

} // namespace oracles
