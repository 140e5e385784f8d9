#pragma once

#include <atomic>
#include <complex>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "invop/tensor.hpp"

namespace invop {

enum class OpKind {
    Conv,
    Grad,
    Hess,
    Downsample,
    SelectorPatch,
    SumPatches,
    Diag,
    Identity,
    EWSqrt,
    Composition,
    Summation,
    Adjoint,
    Inversion,
    Scaled,
};

const char* opKindName(OpKind k);

enum class OpMethod { Apply, Adjoint, JacobianT, Inverse };

struct NormEstimate {
    double value = 0.0;
    std::size_t iterations = 0;
    double tolerance = 0.0;
};

/// Kind-specific parameters. Only the members relevant to a node's kind are
/// populated; the constructors in linops.hpp fill them in.
struct OpParams {
    // Conv: frequency-domain kernel over the full input shape.
    Tensor mtf;
    DimSelection dims; // Conv / Grad / Hess
    bool isReal = false;
    double mtfMinAbs = 0.0;
    double mtfMaxAbs = 0.0;

    // Downsample / SumPatches / SelectorPatch geometry.
    std::vector<std::size_t> factors;
    std::vector<std::size_t> corner; // 0-based
    std::vector<std::size_t> patch;

    // Diag
    Tensor diag;
    bool isScaledIdentity = false;
    std::complex<double> diagConst = 0.0;
    double diagMinAbs = 0.0;
    double diagMaxAbs = 0.0;

    // Scaled
    double scale = 1.0;
};

/// Modulus below which a frequency bin or diagonal entry makes inversion a
/// singularity error instead of a silent large value.
inline constexpr double kSingularityThreshold = 1e-14;

class Op;
using OpPtr = std::shared_ptr<const Op>;

/// One algebraic node: kind + parameters + children, with sizes, capability
/// flags and a mutable cache. Nodes are immutable after construction except
/// for the cache, which is internally synchronized (last-writer-wins memo
/// slot), so graphs are shareable across threads.
class Op : public std::enable_shared_from_this<Op> {
public:
    OpKind kind() const { return kind_; }
    const OpParams& params() const { return params_; }
    const std::vector<OpPtr>& children() const { return children_; }
    const Shape& sizein() const { return sizein_; }
    const Shape& sizeout() const { return sizeout_; }

    bool isLinear() const { return isLinear_; }
    bool isDifferentiable() const { return isDifferentiable_; }
    bool isInvertible() const { return isInvertible_; }

    /// g = H{f}. Validates the input shape, then runs the kernel (or returns
    /// the memo slot when enabled and the input digest matches).
    Tensor apply(const Tensor& f) const;

    /// u = H^T v (Hermitian adjoint for complex elements). Linear nodes only.
    Tensor applyAdjoint(const Tensor& v) const;

    /// u = [J_H{f}]^T v. Delegates to applyAdjoint for linear nodes.
    Tensor applyJacobianT(const Tensor& v, const Tensor& f) const;

    /// f = H^{-1}{g} for invertible nodes.
    Tensor applyInverse(const Tensor& g) const;

    // Caching controls: memoized repeat calls perform zero
    // kernel invocations and return bit-identical outputs).
    void setMemoize(OpMethod m, bool on) const;
    void setPrecompute(bool on) const;
    bool precomputeEnabled() const;
    std::uint64_t kernelCalls(OpMethod m) const;

    ~Op();

private:
    Op() = default;
    friend OpPtr makeOpNode(OpKind, OpParams, std::vector<OpPtr>, Shape, Shape);

    Tensor applyKernel(const Tensor& f) const;
    Tensor adjointKernel(const Tensor& v) const;
    Tensor jacobianTKernel(const Tensor& v, const Tensor& f) const;
    Tensor inverseKernel(const Tensor& g) const;

    /// Interface-to-core dispatch: consults the memo slot when enabled,
    /// bumps the kernel-invocation counter otherwise.
    Tensor runKernel(OpMethod m, const std::function<std::uint64_t()>& digest,
                     const std::function<Tensor()>& kernel) const;

    OpKind kind_ = OpKind::Identity;
    OpParams params_;
    std::vector<OpPtr> children_;
    Shape sizein_, sizeout_;
    bool isLinear_ = true;
    bool isDifferentiable_ = true;
    bool isInvertible_ = false;

    struct MemoSlot {
        bool enabled = false;
        std::optional<std::pair<std::uint64_t, Tensor>> stored;
    };
    struct Cache {
        std::mutex mu;
        MemoSlot slots[4];
        std::atomic<std::uint64_t> calls[4] = {0, 0, 0, 0};
        bool precompute = false;
        OpPtr adjointNode; // guarded by mu
    };
    mutable Cache cache_;
};

/// Internal factory: derives flags from kind/children and validates the
/// structural invariants (composition chains, summation shapes, adjoint on
/// linear children only). The rewrite-aware constructors below are the
/// public entry points.
OpPtr makeOpNode(OpKind kind, OpParams params, std::vector<OpPtr> children, Shape sizein,
                 Shape sizeout);

// ---- rewrite-aware algebra ------------------------------------------------
// These mirror the library's "make"-method dispatch: rules fire greedily at
// construction, otherwise a generic node is produced.

/// a after b: (a ∘ b){f} = a{b{f}}.
OpPtr compose(OpPtr a, OpPtr b);
OpPtr addOp(OpPtr a, OpPtr b);
OpPtr adjointOf(OpPtr a);
OpPtr scaleOf(OpPtr a, double c);
/// k = -1 requires isInvertible; k >= 0 folds repeated composition.
OpPtr powerOf(OpPtr a, long k);
inline OpPtr inversionOf(OpPtr a) { return powerOf(std::move(a), -1); }

// ---- generic (rule-free) constructors -------------------------------------
// Fallbacks for the rewrite engine; also used by tests to compare simplified
// nodes against their unsimplified counterparts.

OpPtr genericComposition(std::vector<OpPtr> children);
OpPtr genericSummation(std::vector<OpPtr> children);
OpPtr genericAdjoint(OpPtr a);
OpPtr genericInversion(OpPtr a);
OpPtr genericScaled(OpPtr a, double c);

/// Structural equality for the rewrite rules that must recognize "the same"
/// operator twice (e.g. S S^T). Pointer equality or matching kind+geometry.
bool opEquals(const OpPtr& a, const OpPtr& b);

/// Operator norm: closed form for Conv (max |mtf|), Diag (max |diag|) and
/// Identity; otherwise power iteration on H^T H from a fixed-seed start
/// (seed 0x5EED, tolerance on the Rayleigh-quotient relative change).
NormEstimate estimateNorm(const OpPtr& op, double tol = 1e-6, std::size_t maxit = 500);

/// Convenience: enables memoization of apply and applies.
Tensor memoizedApply(const OpPtr& op, const Tensor& f);

} // namespace invop
