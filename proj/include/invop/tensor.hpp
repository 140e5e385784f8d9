#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "invop/shape.hpp"

namespace invop {

enum class ElementKind { Real64, Complex128 };

const char* kindName(ElementKind k);

/// Dense N-dimensional array of real64 or complex128 elements, contiguous
/// row-major (last dimension fastest). Complex data is stored interleaved
/// (re, im) so the raw buffer is directly usable for file I/O, hashing and
/// FFTW. Tensors are treated as immutable once handed to another component;
/// in-place mutation is reserved for buffers not yet shared.
class Tensor {
public:
    Tensor() : kind_(ElementKind::Real64) {}

    static Tensor zeros(const Shape& s, ElementKind k = ElementKind::Real64);
    static Tensor full(const Shape& s, double value);
    static Tensor full(const Shape& s, std::complex<double> value);
    static Tensor fromReal(const Shape& s, std::vector<double> values);
    static Tensor fromComplex(const Shape& s, const std::vector<std::complex<double>>& values);

    const Shape& shape() const { return shape_; }
    ElementKind kind() const { return kind_; }
    bool isReal() const { return kind_ == ElementKind::Real64; }
    bool isComplex() const { return kind_ == ElementKind::Complex128; }
    std::size_t size() const { return shape_.count(); }

    std::span<double> real();
    std::span<const double> real() const;
    std::span<std::complex<double>> cplx();
    std::span<const std::complex<double>> cplx() const;

    /// Raw storage (n doubles for real, 2n for complex) — file I/O and hashing.
    std::span<const double> raw() const { return {data_.data(), data_.size()}; }
    std::span<double> raw() { return {data_.data(), data_.size()}; }

    /// Element access by flat index, kind-agnostic.
    std::complex<double> get(std::size_t i) const;
    void set(std::size_t i, std::complex<double> v);

    /// Promote to complex128 (copy; identity copy if already complex).
    Tensor asComplex() const;
    /// Real part as a real64 tensor (identity copy if already real).
    Tensor realPart() const;

    bool sameShapeKind(const Tensor& o) const { return shape_ == o.shape_ && kind_ == o.kind_; }
    bool hasNaN() const;

    // In-place arithmetic on unshared buffers (solver inner loops).
    Tensor& scaleInPlace(double a);
    Tensor& addInPlace(const Tensor& x);     // this += x
    Tensor& subInPlace(const Tensor& x);     // this -= x
    Tensor& axpyInPlace(double a, const Tensor& x); // this += a*x

private:
    Tensor(Shape s, ElementKind k, std::vector<double> data)
        : shape_(std::move(s)), kind_(k), data_(std::move(data)) {}

    Shape shape_;
    ElementKind kind_;
    std::vector<double> data_;
};

// Pointwise maps. Operands must share shape and kind except for the scalar
// overloads (scalar-with-tensor broadcasting only; no general broadcasting).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b); // zero divisor -> DomainError
Tensor add(const Tensor& a, std::complex<double> s);
Tensor mul(const Tensor& a, std::complex<double> s);
Tensor mul(const Tensor& a, double s);
Tensor abs2(const Tensor& a);       // |x|^2, always real64
Tensor conjugate(const Tensor& a);  // identity on real tensors
Tensor sqrtElem(const Tensor& a);   // real: negative entry -> DomainError
Tensor max0(const Tensor& a);       // real only: max(x, 0)

/// sum_i x_i * conj(y_i); conjugate-linear in the second argument.
std::complex<double> inner(const Tensor& x, const Tensor& y);

double normSq(const Tensor& x);
double norm(const Tensor& x);

/// Largest |x_i| over all elements.
double maxAbs(const Tensor& x);
/// Smallest |x_i| over all elements.
double minAbs(const Tensor& x);

/// 64-bit FNV-1a digest of the raw bytes plus shape/kind tag. Used by the
/// memoization slot; collisions are accepted (no full comparison stored).
std::uint64_t contentDigest(const Tensor& x);

} // namespace invop
