#include "invop/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

namespace invop {

namespace {

// One in-place plan per (shape, transform dim, sign), created with
// FFTW_ESTIMATE | FFTW_UNALIGNED so it can be re-executed on any buffer with
// the same layout via the new-array interface. The FFTW planner is not
// thread-safe; plan creation and cache access are serialized. Execution runs
// outside the lock.
class PlanCache {
public:
    fftw_plan get(const Shape& shape, std::size_t dim, int sign, fftw_complex* buf) {
        std::vector<long> key;
        key.reserve(shape.rank() + 2);
        for (std::size_t e : shape.dims()) key.push_back(static_cast<long>(e));
        key.push_back(static_cast<long>(dim));
        key.push_back(sign);

        std::lock_guard<std::mutex> lock(mu_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;

        const auto strides = shape.strides();
        fftw_iodim64 tdim{static_cast<ptrdiff_t>(shape.extent(dim)),
                          static_cast<ptrdiff_t>(strides[dim]),
                          static_cast<ptrdiff_t>(strides[dim])};
        std::vector<fftw_iodim64> howmany;
        for (std::size_t d = 0; d < shape.rank(); ++d) {
            if (d == dim) continue;
            howmany.push_back({static_cast<ptrdiff_t>(shape.extent(d)),
                               static_cast<ptrdiff_t>(strides[d]),
                               static_cast<ptrdiff_t>(strides[d])});
        }
        fftw_plan p = fftw_plan_guru64_dft(1, &tdim, static_cast<int>(howmany.size()),
                                           howmany.data(), buf, buf, sign,
                                           FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!p) throw NumericalError("fft: FFTW failed to create a plan for shape " + shape.str());
        cache_.emplace(std::move(key), p);
        return p;
    }

    ~PlanCache() {
        for (auto& [k, p] : cache_) fftw_destroy_plan(p);
    }

private:
    std::mutex mu_;
    std::map<std::vector<long>, fftw_plan> cache_;
};

PlanCache& planCache() {
    static PlanCache cache;
    return cache;
}

} // namespace

Tensor dft(const Tensor& x, const DimSelection& dims, FftDirection dir) {
    dims.checkAgainstRank(x.shape().rank(), "dft");
    Tensor out = x.asComplex();
    auto* buf = reinterpret_cast<fftw_complex*>(out.raw().data());
    const int sign = (dir == FftDirection::Forward) ? FFTW_FORWARD : FFTW_BACKWARD;

    for (std::size_t d : dims.indices()) {
        fftw_plan p = planCache().get(out.shape(), d, sign, buf);
        fftw_execute_dft(p, buf, buf);
    }

    if (dir == FftDirection::Inverse) {
        std::size_t n = 1;
        for (std::size_t d : dims.indices()) n *= out.shape().extent(d);
        out.scaleInPlace(1.0 / static_cast<double>(n));
    }
    return out;
}

} // namespace invop
