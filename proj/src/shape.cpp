#include "invop/shape.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace invop {

void Shape::validate() const {
    // Guard the element count so byte sizes (16 bytes/complex element)
    // cannot overflow size_t.
    const std::size_t cap = std::numeric_limits<std::size_t>::max() / 32;
    std::size_t n = 1;
    for (std::size_t d : dims_) {
        if (d == 0) throw ShapeError("Shape: extents must be >= 1, got 0 in " + str());
        if (d > cap / std::max<std::size_t>(n, 1))
            throw ShapeError("Shape: element count overflows index range: " + str());
        n *= d;
    }
}

std::size_t Shape::count() const {
    std::size_t n = 1;
    for (std::size_t d : dims_) n *= d;
    return n;
}

std::vector<std::size_t> Shape::strides() const {
    std::vector<std::size_t> s(dims_.size(), 1);
    for (std::size_t i = dims_.size(); i-- > 1;) s[i - 1] = s[i] * dims_[i];
    return s;
}

std::string Shape::str() const {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < dims_.size(); ++i) os << (i ? "," : "") << dims_[i];
    os << ")";
    return os.str();
}

DimSelection::DimSelection(std::vector<std::size_t> zeroBased) : indices_(std::move(zeroBased)) {
    std::sort(indices_.begin(), indices_.end());
    if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end())
        throw ShapeError("DimSelection: indices must be unique: " + str());
}

DimSelection DimSelection::fromOneBased(const std::vector<long long>& oneBased) {
    std::vector<std::size_t> z;
    z.reserve(oneBased.size());
    for (long long d : oneBased) {
        if (d < 1) throw ShapeError("DimSelection: user-facing dimensions are 1-based, got " + std::to_string(d));
        z.push_back(static_cast<std::size_t>(d - 1));
    }
    return DimSelection(std::move(z));
}

DimSelection DimSelection::all(std::size_t rank) {
    std::vector<std::size_t> z(rank);
    for (std::size_t i = 0; i < rank; ++i) z[i] = i;
    return DimSelection(std::move(z));
}

bool DimSelection::contains(std::size_t d) const {
    return std::binary_search(indices_.begin(), indices_.end(), d);
}

void DimSelection::checkAgainstRank(std::size_t rank, const char* what) const {
    if (indices_.empty()) throw ShapeError(std::string(what) + ": empty dimension selection");
    if (indices_.back() >= rank)
        throw ShapeError(std::string(what) + ": dimension index " + std::to_string(indices_.back() + 1) +
                         " out of range for rank " + std::to_string(rank));
}

std::string DimSelection::str() const {
    std::ostringstream os;
    os << "{";
    for (std::size_t i = 0; i < indices_.size(); ++i) os << (i ? "," : "") << (indices_[i] + 1);
    os << "}";
    return os.str();
}

} // namespace invop
