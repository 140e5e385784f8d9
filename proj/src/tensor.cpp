#include "invop/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace invop {

const char* kindName(ElementKind k) {
    return k == ElementKind::Real64 ? "real64" : "complex128";
}

namespace {

std::size_t storageLen(const Shape& s, ElementKind k) {
    return s.count() * (k == ElementKind::Complex128 ? 2 : 1);
}

void checkSameShapeKind(const Tensor& a, const Tensor& b, const char* what) {
    if (a.shape() != b.shape())
        throw ShapeError(std::string(what) + ": shape mismatch " + a.shape().str() + " vs " + b.shape().str());
    if (a.kind() != b.kind())
        throw ShapeError(std::string(what) + ": element kind mismatch");
}

} // namespace

Tensor Tensor::zeros(const Shape& s, ElementKind k) {
    return Tensor(s, k, std::vector<double>(storageLen(s, k), 0.0));
}

Tensor Tensor::full(const Shape& s, double value) {
    return Tensor(s, ElementKind::Real64, std::vector<double>(s.count(), value));
}

Tensor Tensor::full(const Shape& s, std::complex<double> value) {
    std::vector<double> d(2 * s.count());
    for (std::size_t i = 0; i < s.count(); ++i) {
        d[2 * i] = value.real();
        d[2 * i + 1] = value.imag();
    }
    return Tensor(s, ElementKind::Complex128, std::move(d));
}

Tensor Tensor::fromReal(const Shape& s, std::vector<double> values) {
    if (values.size() != s.count())
        throw ShapeError("Tensor::fromReal: data length " + std::to_string(values.size()) +
                         " does not match shape " + s.str());
    return Tensor(s, ElementKind::Real64, std::move(values));
}

Tensor Tensor::fromComplex(const Shape& s, const std::vector<std::complex<double>>& values) {
    if (values.size() != s.count())
        throw ShapeError("Tensor::fromComplex: data length mismatch for shape " + s.str());
    std::vector<double> d(2 * values.size());
    std::memcpy(d.data(), values.data(), d.size() * sizeof(double));
    return Tensor(s, ElementKind::Complex128, std::move(d));
}

std::span<double> Tensor::real() {
    if (!isReal()) throw DomainError("Tensor::real: tensor is complex128");
    return {data_.data(), data_.size()};
}

std::span<const double> Tensor::real() const {
    if (!isReal()) throw DomainError("Tensor::real: tensor is complex128");
    return {data_.data(), data_.size()};
}

std::span<std::complex<double>> Tensor::cplx() {
    if (!isComplex()) throw DomainError("Tensor::cplx: tensor is real64");
    return {reinterpret_cast<std::complex<double>*>(data_.data()), size()};
}

std::span<const std::complex<double>> Tensor::cplx() const {
    if (!isComplex()) throw DomainError("Tensor::cplx: tensor is real64");
    return {reinterpret_cast<const std::complex<double>*>(data_.data()), size()};
}

std::complex<double> Tensor::get(std::size_t i) const {
    return isReal() ? std::complex<double>(data_[i], 0.0)
                    : std::complex<double>(data_[2 * i], data_[2 * i + 1]);
}

void Tensor::set(std::size_t i, std::complex<double> v) {
    if (isReal()) {
        data_[i] = v.real();
    } else {
        data_[2 * i] = v.real();
        data_[2 * i + 1] = v.imag();
    }
}

Tensor Tensor::asComplex() const {
    if (isComplex()) return *this;
    Tensor out = zeros(shape_, ElementKind::Complex128);
    auto dst = out.cplx();
    for (std::size_t i = 0; i < size(); ++i) dst[i] = data_[i];
    return out;
}

Tensor Tensor::realPart() const {
    if (isReal()) return *this;
    Tensor out = zeros(shape_, ElementKind::Real64);
    auto dst = out.real();
    auto src = cplx();
    for (std::size_t i = 0; i < size(); ++i) dst[i] = src[i].real();
    return out;
}

bool Tensor::hasNaN() const {
    for (double v : data_)
        if (std::isnan(v)) return true;
    return false;
}

Tensor& Tensor::scaleInPlace(double a) {
    for (double& v : data_) v *= a;
    return *this;
}

Tensor& Tensor::addInPlace(const Tensor& x) {
    checkSameShapeKind(*this, x, "addInPlace");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += x.data_[i];
    return *this;
}

Tensor& Tensor::subInPlace(const Tensor& x) {
    checkSameShapeKind(*this, x, "subInPlace");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= x.data_[i];
    return *this;
}

Tensor& Tensor::axpyInPlace(double a, const Tensor& x) {
    checkSameShapeKind(*this, x, "axpyInPlace");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += a * x.data_[i];
    return *this;
}

namespace {

template <typename F>
Tensor zipSameKind(const Tensor& a, const Tensor& b, const char* what, F&& f) {
    checkSameShapeKind(a, b, what);
    Tensor out = Tensor::zeros(a.shape(), a.kind());
    for (std::size_t i = 0; i < a.size(); ++i) out.set(i, f(a.get(i), b.get(i)));
    return out;
}

} // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    checkSameShapeKind(a, b, "add");
    Tensor out = a;
    out.addInPlace(b);
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    checkSameShapeKind(a, b, "sub");
    Tensor out = a;
    out.subInPlace(b);
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    if (a.isReal() && b.isReal()) {
        checkSameShapeKind(a, b, "mul");
        Tensor out = a;
        auto o = out.real();
        auto bb = b.real();
        for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bb[i];
        return out;
    }
    return zipSameKind(a, b, "mul", [](auto x, auto y) { return x * y; });
}

Tensor div(const Tensor& a, const Tensor& b) {
    checkSameShapeKind(a, b, "div");
    for (std::size_t i = 0; i < b.size(); ++i)
        if (b.get(i) == std::complex<double>(0.0, 0.0))
            throw DomainError("div: division by zero at element " + std::to_string(i));
    return zipSameKind(a, b, "div", [](auto x, auto y) { return x / y; });
}

Tensor add(const Tensor& a, std::complex<double> s) {
    if (a.isReal() && s.imag() == 0.0) {
        Tensor out = a;
        for (double& v : out.real()) v += s.real();
        return out;
    }
    Tensor out = a.asComplex();
    for (auto& v : out.cplx()) v += s;
    return out;
}

Tensor mul(const Tensor& a, std::complex<double> s) {
    if (s.imag() == 0.0) return mul(a, s.real());
    Tensor out = a.asComplex();
    for (auto& v : out.cplx()) v *= s;
    return out;
}

Tensor mul(const Tensor& a, double s) {
    Tensor out = a;
    out.scaleInPlace(s);
    return out;
}

Tensor abs2(const Tensor& a) {
    Tensor out = Tensor::zeros(a.shape(), ElementKind::Real64);
    auto o = out.real();
    for (std::size_t i = 0; i < a.size(); ++i) o[i] = std::norm(a.get(i));
    return out;
}

Tensor conjugate(const Tensor& a) {
    if (a.isReal()) return a;
    Tensor out = a;
    for (auto& v : out.cplx()) v = std::conj(v);
    return out;
}

Tensor sqrtElem(const Tensor& a) {
    if (a.isReal()) {
        Tensor out = a;
        auto o = out.real();
        for (std::size_t i = 0; i < o.size(); ++i) {
            if (o[i] < 0.0) throw DomainError("sqrt: negative entry in real tensor");
            o[i] = std::sqrt(o[i]);
        }
        return out;
    }
    Tensor out = a;
    for (auto& v : out.cplx()) v = std::sqrt(v);
    return out;
}

Tensor max0(const Tensor& a) {
    if (!a.isReal()) throw DomainError("max0: complex tensors are not ordered");
    Tensor out = a;
    for (double& v : out.real()) v = v > 0.0 ? v : 0.0;
    return out;
}

std::complex<double> inner(const Tensor& x, const Tensor& y) {
    if (x.shape() != y.shape())
        throw ShapeError("inner: shape mismatch " + x.shape().str() + " vs " + y.shape().str());
    if (x.kind() != y.kind()) throw ShapeError("inner: element kind mismatch");
    if (x.isReal()) {
        auto a = x.real(), b = y.real();
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    }
    auto a = x.cplx(), b = y.cplx();
    std::complex<double> s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * std::conj(b[i]);
    return s;
}

double normSq(const Tensor& x) {
    double s = 0.0;
    for (double v : x.raw()) s += v * v;
    return s;
}

double norm(const Tensor& x) { return std::sqrt(normSq(x)); }

double maxAbs(const Tensor& x) {
    double m = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x.get(i)));
    return m;
}

double minAbs(const Tensor& x) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x.size(); ++i) m = std::min(m, std::abs(x.get(i)));
    return m;
}

std::uint64_t contentDigest(const Tensor& x) {
    std::uint64_t h = 1469598103934665603ull; // FNV offset basis
    auto mix = [&h](const unsigned char* p, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 1099511628211ull;
        }
    };
    std::uint64_t tag = (x.kind() == ElementKind::Complex128) ? 2 : 1;
    mix(reinterpret_cast<const unsigned char*>(&tag), sizeof(tag));
    for (std::size_t d : x.shape().dims()) mix(reinterpret_cast<const unsigned char*>(&d), sizeof(d));
    auto bytes = x.raw();
    std::uint64_t len = bytes.size();
    mix(reinterpret_cast<const unsigned char*>(&len), sizeof(len));
    mix(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size() * sizeof(double));
    return h;
}

} // namespace invop
