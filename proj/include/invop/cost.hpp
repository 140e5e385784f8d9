#pragma once

#include <limits>

#include "invop/op.hpp"

namespace invop {

enum class CostKind {
    L2Residual,
    MixNorm21,
    MixNormSchatt1,
    NonNegIndicator,
    Hyperbolic,
    GoodRoughness,
    Composed,
    Sum,
    Scaled,
};

const char* costKindName(CostKind k);

/// Sentinel for indicator violations; propagated by Sum, never fed to
/// solvers that require finiteness.
inline constexpr double kInfCost = std::numeric_limits<double>::infinity();

class Cost;
using CostPtr = std::shared_ptr<const Cost>;

/// Functional descriptor: kind + parameters + optional inner operator,
/// exposing evaluate / gradient / prox according to its capability flags.
/// Immutable after construction except for lazily built caches (Woodbury
/// inverse node, precomputed least-squares constants), which are internally
/// synchronized.
class Cost : public std::enable_shared_from_this<Cost> {
public:
    CostKind kind() const { return kind_; }
    const Shape& sizein() const { return sizein_; }

    bool hasGrad() const { return hasGrad_; }
    bool hasProx() const { return hasProx_; }
    bool isConvex() const { return isConvex_; }

    double evaluate(const Tensor& f) const;
    Tensor gradient(const Tensor& f) const;

    /// prox(z, a) = argmin_f 1/2 ||f - z||^2 + a * J(f).
    Tensor prox(const Tensor& z, double alpha) const;

    /// Precomputation toggle: for a least-squares term composed with a
    /// linear operator, the gradient switches to H^T H f - H^T g with both
    /// constants computed once.
    void setPrecompute(bool on) const;
    bool precomputeEnabled() const;

    // introspection for tests and problem assembly
    const OpPtr& inner() const { return inner_; }
    const std::vector<CostPtr>& children() const { return children_; }
    const Tensor& data() const { return data_; }
    double epsilon() const { return epsilon_; }
    double lambda() const { return lambda_; }
    std::size_t groupDim() const { return groupDim_; }
    bool innerSemiOrthogonal() const { return semiOrtho_; }
    double semiOrthoNu() const { return nu_; }

private:
    Cost() = default;
    friend CostPtr makeL2Residual(Tensor);
    friend CostPtr makeMixNorm21(Shape, std::optional<std::size_t>);
    friend CostPtr makeMixNormSchatt1(Shape, double, std::optional<std::size_t>);
    friend CostPtr makeNonNeg(Shape);
    friend CostPtr makeHyperbolic(Shape, double, std::optional<std::size_t>);
    friend CostPtr makeGoodRoughness(OpPtr, double);
    friend CostPtr composeCost(CostPtr, OpPtr);
    friend CostPtr addCost(CostPtr, CostPtr);
    friend CostPtr scaleCost(CostPtr, double);

    double evaluateKernel(const Tensor& f) const;
    Tensor gradientKernel(const Tensor& f) const;
    Tensor proxKernel(const Tensor& z, double alpha) const;

    CostKind kind_ = CostKind::L2Residual;
    Shape sizein_;
    Tensor data_;            // L2Residual
    double epsilon_ = 0.0;   // Hyperbolic / GoodRoughness
    std::size_t groupDim_ = 0;
    double lambda_ = 1.0;    // Scaled
    OpPtr inner_;            // Composed; GoodRoughness gradient operator
    std::vector<CostPtr> children_; // Sum; Composed/Scaled store one child

    bool hasGrad_ = false;
    bool hasProx_ = false;
    bool isConvex_ = false;
    bool semiOrtho_ = false; // Composed: inner L with L L^T = nu I detected
    double nu_ = 0.0;

    struct Lazy {
        std::mutex mu;
        bool precompute = false;
        // least-squares precompute (Composed L2 with linear inner)
        bool lsReady = false;
        OpPtr normalOp;
        Tensor htg;
        // Woodbury caches
        OpPtr wwT;
        double alpha = -1.0;
        OpPtr smallInverse; // (I + a W W^T)^(-1) when it has a closed form
        OpPtr fallbackA;    // a W^T W + I for the CG fallback
    };
    mutable Lazy lazy_;

    friend Tensor composedProx(const Cost& c, const Tensor& z, double alpha);
    friend Tensor woodburyProx(const Cost& c, const Tensor& u, double alpha);
};

// ---- constructors ----------------------------------------------------------

/// 1/2 ||f - g||^2.
CostPtr makeL2Residual(Tensor g);

/// Sum over groups of the l2 norm along the group dimension (0-based;
/// defaults to the last dimension).
CostPtr makeMixNorm21(Shape in, std::optional<std::size_t> groupDim = std::nullopt);

/// Sum over pixels of the nuclear norm of the symmetric 2x2 matrix rebuilt
/// from 3 components (a, b, c) -> [[a, b], [b, c]] along the group dimension.
/// Only order p = 1 is supported.
CostPtr makeMixNormSchatt1(Shape in, double p = 1.0,
                           std::optional<std::size_t> groupDim = std::nullopt);

/// Indicator of the nonnegative orthant (0 / +inf sentinel).
CostPtr makeNonNeg(Shape in);

/// Sum over groups of sqrt(sum of squares + epsilon^2); smooth, gradient
/// only (no closed prox here).
CostPtr makeHyperbolic(Shape in, double epsilon = 1e-7,
                       std::optional<std::size_t> groupDim = std::nullopt);

/// Good's roughness: sum_n ||[grad f]_n||^2 / sqrt(f_n^2 + epsilon^2); the
/// gradient operator is taken as a parameter, mirroring its construction
/// from the image grid.
CostPtr makeGoodRoughness(OpPtr gradOp, double epsilon = 1e-2);

/// J(op .): detects a semi-orthogonal inner operator (L L^T = nu I) at
/// construction, which enables the closed-form composed prox; an L2 outer
/// with any linear inner gains a prox through the Woodbury/CG path.
CostPtr composeCost(CostPtr outer, OpPtr op);

CostPtr addCost(CostPtr a, CostPtr b);
CostPtr scaleCost(CostPtr c, double lambda);

// ---- specialized prox paths (exposed for direct use and tests) -------------

/// Semi-orthogonal shortcut: z + nu^{-1} L^T (prox_{nu a J}(L z) - L z).
Tensor composedProx(const Cost& c, const Tensor& z, double alpha);

/// Prox of 1/2 ||W f - g||^2 with W linear: evaluates
/// (I - a W^T (I + a W W^T)^{-1} W)(a W^T g + u) when a W W^T simplifies to
/// an invertible closed-form node, else falls back to a CG solve of
/// (a W^T W + I) x = a W^T g + u.
Tensor woodburyProx(const Cost& c, const Tensor& u, double alpha);

} // namespace invop
