#include "invop/op.hpp"

#include <cmath>

#include "invop/detail/kernels.hpp"
#include "invop/rng.hpp"

namespace invop {

const char* opKindName(OpKind k) {
    switch (k) {
        case OpKind::Conv: return "Conv";
        case OpKind::Grad: return "Grad";
        case OpKind::Hess: return "Hess";
        case OpKind::Downsample: return "Downsample";
        case OpKind::SelectorPatch: return "SelectorPatch";
        case OpKind::SumPatches: return "SumPatches";
        case OpKind::Diag: return "Diag";
        case OpKind::Identity: return "Identity";
        case OpKind::EWSqrt: return "EWSqrt";
        case OpKind::Composition: return "Composition";
        case OpKind::Summation: return "Summation";
        case OpKind::Adjoint: return "Adjoint";
        case OpKind::Inversion: return "Inversion";
        case OpKind::Scaled: return "Scaled";
    }
    return "?";
}

namespace {

// Promote mixed real/complex operands so pointwise ops see matching kinds.
std::pair<Tensor, Tensor> promotePair(const Tensor& a, const Tensor& b) {
    if (a.kind() == b.kind()) return {a, b};
    return {a.asComplex(), b.asComplex()};
}

Tensor mulPromote(const Tensor& a, const Tensor& b) {
    auto [x, y] = promotePair(a, b);
    return mul(x, y);
}

Tensor divPromote(const Tensor& a, const Tensor& b) {
    auto [x, y] = promotePair(a, b);
    return div(x, y);
}

Tensor addPromote(const Tensor& a, const Tensor& b) {
    auto [x, y] = promotePair(a, b);
    return add(x, y);
}

double realInnerPromote(const Tensor& a, const Tensor& b) {
    auto [x, y] = promotePair(a, b);
    return inner(x, y).real();
}

} // namespace

Op::~Op() = default;

OpPtr makeOpNode(OpKind kind, OpParams params, std::vector<OpPtr> children, Shape sizein,
                 Shape sizeout) {
    auto node = std::shared_ptr<Op>(new Op());
    node->kind_ = kind;
    node->params_ = std::move(params);
    node->children_ = std::move(children);
    node->sizein_ = std::move(sizein);
    node->sizeout_ = std::move(sizeout);

    const auto& ch = node->children_;
    switch (kind) {
        case OpKind::Composition: {
            if (ch.empty()) throw ShapeError("Composition: needs at least one child");
            for (std::size_t k = 0; k + 1 < ch.size(); ++k)
                if (ch[k]->sizein() != ch[k + 1]->sizeout())
                    throw ShapeError("Composition: child " + std::to_string(k) + " expects input " +
                                     ch[k]->sizein().str() + " but child " + std::to_string(k + 1) +
                                     " produces " + ch[k + 1]->sizeout().str());
            node->sizein_ = ch.back()->sizein();
            node->sizeout_ = ch.front()->sizeout();
            node->isLinear_ = true;
            node->isDifferentiable_ = true;
            node->isInvertible_ = true;
            for (const auto& c : ch) {
                node->isLinear_ &= c->isLinear();
                node->isDifferentiable_ &= c->isDifferentiable();
                node->isInvertible_ &= c->isInvertible();
            }
            break;
        }
        case OpKind::Summation: {
            if (ch.empty()) throw ShapeError("Summation: needs at least one child");
            for (const auto& c : ch)
                if (c->sizein() != ch[0]->sizein() || c->sizeout() != ch[0]->sizeout())
                    throw ShapeError("Summation: children must share input and output shapes");
            node->sizein_ = ch[0]->sizein();
            node->sizeout_ = ch[0]->sizeout();
            node->isLinear_ = true;
            node->isDifferentiable_ = true;
            for (const auto& c : ch) {
                node->isLinear_ &= c->isLinear();
                node->isDifferentiable_ &= c->isDifferentiable();
            }
            node->isInvertible_ = false;
            break;
        }
        case OpKind::Adjoint: {
            if (ch.size() != 1) throw ShapeError("Adjoint: exactly one child");
            if (!ch[0]->isLinear()) throw CapabilityError("Adjoint: child must be linear");
            node->sizein_ = ch[0]->sizeout();
            node->sizeout_ = ch[0]->sizein();
            node->isLinear_ = true;
            node->isDifferentiable_ = true;
            node->isInvertible_ = ch[0]->isInvertible();
            break;
        }
        case OpKind::Inversion: {
            if (ch.size() != 1) throw ShapeError("Inversion: exactly one child");
            if (!ch[0]->isInvertible())
                throw CapabilityError("Inversion: child is not invertible");
            node->sizein_ = ch[0]->sizeout();
            node->sizeout_ = ch[0]->sizein();
            node->isLinear_ = ch[0]->isLinear();
            node->isDifferentiable_ = node->isLinear_;
            node->isInvertible_ = true;
            break;
        }
        case OpKind::Scaled: {
            if (ch.size() != 1) throw ShapeError("Scaled: exactly one child");
            node->sizein_ = ch[0]->sizein();
            node->sizeout_ = ch[0]->sizeout();
            node->isLinear_ = ch[0]->isLinear();
            node->isDifferentiable_ = ch[0]->isDifferentiable();
            node->isInvertible_ =
                ch[0]->isInvertible() && std::abs(node->params_.scale) > kSingularityThreshold;
            break;
        }
        case OpKind::Identity:
            node->isLinear_ = true;
            node->isDifferentiable_ = true;
            node->isInvertible_ = true;
            break;
        case OpKind::Diag:
            node->isLinear_ = true;
            node->isDifferentiable_ = true;
            node->isInvertible_ = node->params_.diagMinAbs > kSingularityThreshold;
            break;
        case OpKind::Conv:
            node->isLinear_ = true;
            node->isDifferentiable_ = true;
            node->isInvertible_ = node->params_.mtfMinAbs > kSingularityThreshold;
            break;
        case OpKind::EWSqrt:
            node->isLinear_ = false;
            node->isDifferentiable_ = true;
            node->isInvertible_ = false;
            break;
        default: // Grad, Hess, Downsample, SelectorPatch, SumPatches
            node->isLinear_ = true;
            node->isDifferentiable_ = true;
            node->isInvertible_ = false;
            break;
    }
    return node;
}

// ---- interface methods (input validation + memoize dispatch) ---------------

Tensor Op::runKernel(OpMethod m, const std::function<std::uint64_t()>& digest,
                     const std::function<Tensor()>& kernel) const {
    auto& slot = cache_.slots[static_cast<int>(m)];
    bool enabled;
    {
        std::lock_guard<std::mutex> lock(cache_.mu);
        enabled = slot.enabled;
    }
    if (!enabled) {
        cache_.calls[static_cast<int>(m)]++;
        return kernel();
    }
    const std::uint64_t d = digest();
    {
        std::lock_guard<std::mutex> lock(cache_.mu);
        if (slot.stored && slot.stored->first == d) return slot.stored->second;
    }
    cache_.calls[static_cast<int>(m)]++;
    Tensor out = kernel();
    {
        std::lock_guard<std::mutex> lock(cache_.mu);
        slot.stored = std::make_pair(d, out);
    }
    return out;
}

Tensor Op::apply(const Tensor& f) const {
    if (f.shape() != sizein_)
        throw ShapeError(std::string("apply(") + opKindName(kind_) + "): input shape " +
                         f.shape().str() + " does not match sizein " + sizein_.str());
    return runKernel(
        OpMethod::Apply, [&] { return contentDigest(f); }, [&] { return applyKernel(f); });
}

Tensor Op::applyAdjoint(const Tensor& v) const {
    if (!isLinear_)
        throw CapabilityError(std::string("applyAdjoint(") + opKindName(kind_) +
                              "): node is not linear");
    if (v.shape() != sizeout_)
        throw ShapeError(std::string("applyAdjoint(") + opKindName(kind_) + "): input shape " +
                         v.shape().str() + " does not match sizeout " + sizeout_.str());
    return runKernel(
        OpMethod::Adjoint, [&] { return contentDigest(v); }, [&] { return adjointKernel(v); });
}

Tensor Op::applyJacobianT(const Tensor& v, const Tensor& f) const {
    if (!isDifferentiable_)
        throw CapabilityError(std::string("applyJacobianT(") + opKindName(kind_) +
                              "): node is not differentiable");
    if (v.shape() != sizeout_ || f.shape() != sizein_)
        throw ShapeError(std::string("applyJacobianT(") + opKindName(kind_) +
                         "): shape mismatch (v " + v.shape().str() + ", f " + f.shape().str() +
                         ")");
    if (isLinear_) return applyAdjoint(v);
    return runKernel(
        OpMethod::JacobianT,
        [&] { return contentDigest(v) * 1000003ull ^ contentDigest(f); },
        [&] { return jacobianTKernel(v, f); });
}

Tensor Op::applyInverse(const Tensor& g) const {
    if (!isInvertible_)
        throw CapabilityError(std::string("applyInverse(") + opKindName(kind_) +
                              "): node is not invertible");
    if (g.shape() != sizeout_)
        throw ShapeError(std::string("applyInverse(") + opKindName(kind_) + "): input shape " +
                         g.shape().str() + " does not match sizeout " + sizeout_.str());
    return runKernel(
        OpMethod::Inverse, [&] { return contentDigest(g); }, [&] { return inverseKernel(g); });
}

void Op::setMemoize(OpMethod m, bool on) const {
    std::lock_guard<std::mutex> lock(cache_.mu);
    auto& slot = cache_.slots[static_cast<int>(m)];
    slot.enabled = on;
    if (!on) slot.stored.reset();
}

void Op::setPrecompute(bool on) const {
    std::lock_guard<std::mutex> lock(cache_.mu);
    cache_.precompute = on;
}

bool Op::precomputeEnabled() const {
    std::lock_guard<std::mutex> lock(cache_.mu);
    return cache_.precompute;
}

std::uint64_t Op::kernelCalls(OpMethod m) const {
    return cache_.calls[static_cast<int>(m)].load();
}

Tensor memoizedApply(const OpPtr& op, const Tensor& f) {
    op->setMemoize(OpMethod::Apply, true);
    return op->apply(f);
}

// ---- kernels ---------------------------------------------------------------

Tensor Op::applyKernel(const Tensor& f) const {
    switch (kind_) {
        case OpKind::Identity: return f;
        case OpKind::Diag: return mulPromote(params_.diag, f);
        case OpKind::Conv: return detail::convApply(params_, f, false, false);
        case OpKind::Grad: return detail::gradApply(sizein_, params_.dims, f);
        case OpKind::Hess: return detail::hessApply(sizein_, params_.dims, f);
        case OpKind::Downsample: return detail::downsampleApply(sizein_, params_.factors, f);
        case OpKind::SelectorPatch:
            return detail::selectorApply(sizein_, params_.corner, sizeout_, f);
        case OpKind::SumPatches: return detail::sumPatchesApply(sizein_, params_.patch, f);
        case OpKind::EWSqrt: return sqrtElem(f);
        case OpKind::Composition: {
            Tensor x = f;
            for (std::size_t k = children_.size(); k-- > 0;) x = children_[k]->apply(x);
            return x;
        }
        case OpKind::Summation: {
            Tensor acc = children_[0]->apply(f);
            for (std::size_t k = 1; k < children_.size(); ++k)
                acc = addPromote(acc, children_[k]->apply(f));
            return acc;
        }
        case OpKind::Adjoint: return children_[0]->applyAdjoint(f);
        case OpKind::Inversion: return children_[0]->applyInverse(f);
        case OpKind::Scaled: return mul(children_[0]->apply(f), params_.scale);
    }
    throw Error("apply: unreachable");
}

Tensor Op::adjointKernel(const Tensor& v) const {
    switch (kind_) {
        case OpKind::Identity: return v;
        case OpKind::Diag: return mulPromote(conjugate(params_.diag), v);
        case OpKind::Conv: return detail::convApply(params_, v, true, false);
        case OpKind::Grad: return detail::gradAdjoint(sizein_, params_.dims, v);
        case OpKind::Hess: return detail::hessAdjoint(sizein_, params_.dims, v);
        case OpKind::Downsample: return detail::downsampleAdjoint(sizein_, params_.factors, v);
        case OpKind::SelectorPatch: return detail::selectorAdjoint(sizein_, params_.corner, v);
        case OpKind::SumPatches: return detail::sumPatchesAdjoint(sizein_, params_.patch, v);
        case OpKind::Composition: {
            Tensor u = v;
            for (const auto& c : children_) u = c->applyAdjoint(u);
            return u;
        }
        case OpKind::Summation: {
            Tensor acc = children_[0]->applyAdjoint(v);
            for (std::size_t k = 1; k < children_.size(); ++k)
                acc = addPromote(acc, children_[k]->applyAdjoint(v));
            return acc;
        }
        case OpKind::Adjoint: return children_[0]->apply(v);
        case OpKind::Inversion:
            // (X^{-1})^T = (X^T)^{-1}; the child's adjoint has a closed form
            // for every invertible kind that survives rewriting.
            return adjointOf(children_[0])->applyInverse(v);
        case OpKind::Scaled: return mul(children_[0]->applyAdjoint(v), params_.scale);
        default: break;
    }
    throw CapabilityError(std::string("applyAdjoint: no adjoint kernel for ") + opKindName(kind_));
}

Tensor Op::jacobianTKernel(const Tensor& v, const Tensor& f) const {
    switch (kind_) {
        case OpKind::EWSqrt: {
            Tensor root = sqrtElem(f);
            if (minAbs(root) == 0.0)
                throw DomainError("applyJacobianT(EWSqrt): derivative unbounded at zero entries");
            return divPromote(v, mul(root, 2.0));
        }
        case OpKind::Composition: {
            // Chain rule: record each child's input on the forward pass.
            std::vector<Tensor> ins(children_.size());
            ins.back() = f;
            for (std::size_t k = children_.size() - 1; k-- > 0;)
                ins[k] = children_[k + 1]->apply(ins[k + 1]);
            Tensor u = v;
            for (std::size_t k = 0; k < children_.size(); ++k)
                u = children_[k]->applyJacobianT(u, ins[k]);
            return u;
        }
        case OpKind::Summation: {
            Tensor acc = children_[0]->applyJacobianT(v, f);
            for (std::size_t k = 1; k < children_.size(); ++k)
                acc = addPromote(acc, children_[k]->applyJacobianT(v, f));
            return acc;
        }
        case OpKind::Scaled: return mul(children_[0]->applyJacobianT(v, f), params_.scale);
        default: break;
    }
    throw CapabilityError(std::string("applyJacobianT: no kernel for ") + opKindName(kind_));
}

Tensor Op::inverseKernel(const Tensor& g) const {
    switch (kind_) {
        case OpKind::Identity: return g;
        case OpKind::Diag: return divPromote(g, params_.diag);
        case OpKind::Conv: return detail::convApply(params_, g, false, true);
        case OpKind::Composition: {
            Tensor x = g;
            for (const auto& c : children_) x = c->applyInverse(x);
            return x;
        }
        case OpKind::Adjoint:
            // (X^T)^{-1} = (X^{-1})^T.
            return inversionOf(children_[0])->applyAdjoint(g);
        case OpKind::Inversion: return children_[0]->apply(g);
        case OpKind::Scaled:
            return children_[0]->applyInverse(mul(g, 1.0 / params_.scale));
        default: break;
    }
    throw CapabilityError(std::string("applyInverse: no kernel for ") + opKindName(kind_));
}

// ---- operator norm ---------------------------------------------------------

NormEstimate estimateNorm(const OpPtr& op, double tol, std::size_t maxit) {
    switch (op->kind()) {
        case OpKind::Identity: return {1.0, 0, tol};
        case OpKind::Conv: return {op->params().mtfMaxAbs, 0, tol};
        case OpKind::Diag: return {op->params().diagMaxAbs, 0, tol};
        case OpKind::Adjoint: return estimateNorm(op->children()[0], tol, maxit);
        case OpKind::Scaled: {
            NormEstimate e = estimateNorm(op->children()[0], tol, maxit);
            e.value *= std::abs(op->params().scale);
            return e;
        }
        default: break;
    }
    if (!op->isLinear()) throw CapabilityError("estimateNorm: operator is not linear");

    Rng rng(0x5EED);
    Tensor b = rng.uniformTensor(op->sizein());
    double nb = norm(b);
    if (nb == 0.0) return {0.0, 0, tol};
    b.scaleInPlace(1.0 / nb);

    double lambda = 0.0, prev = -1.0;
    std::size_t it = 0;
    for (; it < maxit; ++it) {
        Tensor w = op->applyAdjoint(op->apply(b));
        lambda = realInnerPromote(w, b); // Rayleigh quotient, ||b|| = 1
        double nw = norm(w);
        if (nw == 0.0) return {0.0, it + 1, tol};
        if (it > 0 && std::abs(lambda - prev) <= tol * std::max(std::abs(lambda), 1e-30)) {
            ++it;
            break;
        }
        prev = lambda;
        b = std::move(w);
        b.scaleInPlace(1.0 / nw);
    }
    return {std::sqrt(std::max(lambda, 0.0)), it, tol};
}

} // namespace invop
