#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "invop/errors.hpp"

namespace invop {

/// Extents of an N-dimensional array, row-major with the last dimension
/// fastest. Every extent must be >= 1 and the total element count must fit
/// in std::size_t with headroom for byte counts.
class Shape {
public:
    Shape() = default;
    Shape(std::initializer_list<std::size_t> dims) : dims_(dims) { validate(); }
    explicit Shape(std::vector<std::size_t> dims) : dims_(std::move(dims)) { validate(); }

    std::size_t rank() const { return dims_.size(); }
    std::size_t extent(std::size_t d) const { return dims_.at(d); }
    const std::vector<std::size_t>& dims() const { return dims_; }

    /// Total number of elements (1 for a rank-0 shape).
    std::size_t count() const;

    /// Row-major strides in elements (last dimension has stride 1).
    std::vector<std::size_t> strides() const;

    bool operator==(const Shape& o) const { return dims_ == o.dims_; }
    bool operator!=(const Shape& o) const { return !(*this == o); }

    std::string str() const;

private:
    void validate() const;
    std::vector<std::size_t> dims_;
};

/// Sorted set of dimension positions, 0-based internally. All user-facing
/// interfaces (JSON configs, CLI arguments, file headers) are 1-based and
/// go through fromOneBased.
class DimSelection {
public:
    DimSelection() = default;
    explicit DimSelection(std::vector<std::size_t> zeroBased);
    DimSelection(std::initializer_list<std::size_t> zeroBased)
        : DimSelection(std::vector<std::size_t>(zeroBased)) {}

    static DimSelection fromOneBased(const std::vector<long long>& oneBased);
    static DimSelection all(std::size_t rank);

    const std::vector<std::size_t>& indices() const { return indices_; }
    std::size_t size() const { return indices_.size(); }
    bool contains(std::size_t d) const;

    /// Throws ShapeError if any index is >= rank.
    void checkAgainstRank(std::size_t rank, const char* what) const;

    bool operator==(const DimSelection& o) const { return indices_ == o.indices_; }

    std::string str() const;

private:
    std::vector<std::size_t> indices_;
};

} // namespace invop
