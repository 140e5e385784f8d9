#include <cmath>
#include <optional>

#include "invop/detail/kernels.hpp"
#include "invop/linops.hpp"
#include "invop/op.hpp"

// Rewrite engine: a rule table keyed on (operation, kind-of-left,
// kind-of-right) fired greedily at construction time. Nodes are simplified
// only at each construction site; generic nodes already built are never
// retroactively rewritten.

namespace invop {

namespace {

bool isScaledIdentityNode(const OpPtr& x) {
    return x->kind() == OpKind::Diag && x->params().isScaledIdentity;
}

std::complex<double> scaledIdentityValue(const OpPtr& x) { return x->params().diagConst; }

OpPtr convWithMtf(const OpPtr& like, Tensor mtf, bool isReal) {
    return makeConvFromMtf(std::move(mtf), like->params().dims, isReal);
}

bool sameConvDims(const OpPtr& a, const OpPtr& b) {
    return a->params().dims == b->params().dims && a->sizein() == b->sizein();
}

// Pair rule for composition lists: returns the merged node when a rule
// fires, nullopt otherwise. x is applied after y.
std::optional<OpPtr> composePair(const OpPtr& x, const OpPtr& y) {
    // Scales commute with everything linear; pull them out and retry.
    if (x->kind() == OpKind::Scaled) {
        if (auto r = composePair(x->children()[0], y)) return scaleOf(*r, x->params().scale);
        return std::nullopt;
    }
    if (y->kind() == OpKind::Scaled && x->isLinear()) {
        if (auto r = composePair(x, y->children()[0])) return scaleOf(*r, y->params().scale);
        return std::nullopt;
    }

    if (x->kind() == OpKind::Identity) return y;
    if (y->kind() == OpKind::Identity) return x;

    if (x->kind() == OpKind::Conv && y->kind() == OpKind::Conv && sameConvDims(x, y))
        return convWithMtf(x, mul(x->params().mtf, y->params().mtf),
                           x->params().isReal && y->params().isReal);

    if (x->kind() == OpKind::Diag && y->kind() == OpKind::Diag) {
        auto dx = x->params().diag, dy = y->params().diag;
        if (dx.kind() != dy.kind()) {
            dx = dx.asComplex();
            dy = dy.asComplex();
        }
        return makeDiag(mul(dx, dy));
    }

    // Scaled identities absorb into convolutions and anything linear.
    if (isScaledIdentityNode(x)) {
        const auto c = scaledIdentityValue(x);
        if (y->kind() == OpKind::Conv)
            return convWithMtf(y, mul(y->params().mtf, c),
                               y->params().isReal && c.imag() == 0.0);
        if (c.imag() == 0.0) return scaleOf(y, c.real());
    }
    if (isScaledIdentityNode(y)) {
        const auto c = scaledIdentityValue(y);
        if (x->kind() == OpKind::Conv)
            return convWithMtf(x, mul(x->params().mtf, c),
                               x->params().isReal && c.imag() == 0.0);
        if (x->isLinear() && c.imag() == 0.0) return scaleOf(x, c.real());
    }

    // Semi-orthogonal samplers: S S^T = I on the small space.
    if ((x->kind() == OpKind::Downsample || x->kind() == OpKind::SelectorPatch) &&
        y->kind() == OpKind::Adjoint && opEquals(x, y->children()[0]))
        return makeIdentity(x->sizeout());

    // Normal operators of the difference stencils are convolutions.
    if (x->kind() == OpKind::Adjoint && y->kind() == OpKind::Grad &&
        opEquals(x->children()[0], y))
        return makeConvFromMtf(detail::gradSymbolSumAbs2(y->sizein(), y->params().dims),
                               y->params().dims, true);
    if (x->kind() == OpKind::Adjoint && y->kind() == OpKind::Hess &&
        opEquals(x->children()[0], y))
        return makeConvFromMtf(detail::hessSymbolSumAbs2(y->sizein(), y->params().dims),
                               y->params().dims, true);

    return std::nullopt;
}

// Triple rule (Example-2 pattern): Downsample ∘ Conv ∘ Downsample^T is a
// convolution on the small grid with the alias-summed kernel divided by the
// product of the factors.
std::optional<OpPtr> composeTriple(const OpPtr& x, const OpPtr& y, const OpPtr& z) {
    if (x->kind() != OpKind::Downsample || y->kind() != OpKind::Conv ||
        z->kind() != OpKind::Adjoint || !opEquals(x, z->children()[0]))
        return std::nullopt;
    // The alias-sum identity needs every downsampled dimension to be a
    // convolved one; untouched dimensions (factor 1) are fine.
    for (std::size_t d = 0; d < x->sizein().rank(); ++d)
        if (x->params().factors[d] != 1 && !y->params().dims.contains(d)) return std::nullopt;
    const Shape& small = x->sizeout();
    double prod = 1.0;
    for (std::size_t f : x->params().factors) prod *= static_cast<double>(f);
    Tensor aliased = detail::sumPatchesApply(x->sizein(), small.dims(), y->params().mtf);
    return makeConvFromMtf(mul(aliased, 1.0 / prod), y->params().dims, y->params().isReal);
}

void flattenInto(std::vector<OpPtr>& list, const OpPtr& node, OpKind kind) {
    if (node->kind() == kind)
        for (const auto& c : node->children()) list.push_back(c);
    else
        list.push_back(node);
}

// Pair rule for summation lists.
std::optional<OpPtr> addPair(const OpPtr& x, const OpPtr& y) {
    if (x->kind() == OpKind::Conv && y->kind() == OpKind::Conv && sameConvDims(x, y))
        return convWithMtf(x, add(x->params().mtf, y->params().mtf),
                           x->params().isReal && y->params().isReal);

    if (x->kind() == OpKind::Diag && y->kind() == OpKind::Diag) {
        auto dx = x->params().diag, dy = y->params().diag;
        if (dx.kind() != dy.kind()) {
            dx = dx.asComplex();
            dy = dy.asComplex();
        }
        return makeDiag(add(dx, dy));
    }

    if (x->kind() == OpKind::Identity && y->kind() == OpKind::Identity)
        return makeScaledIdentity(x->sizein(), 2.0);
    if (x->kind() == OpKind::Identity && y->kind() == OpKind::Diag)
        return makeDiag(add(y->params().diag, std::complex<double>(1.0)));
    if (x->kind() == OpKind::Diag && y->kind() == OpKind::Identity)
        return makeDiag(add(x->params().diag, std::complex<double>(1.0)));

    // Conv plus a scaled identity folds the constant into the kernel.
    auto convPlusConst = [](const OpPtr& conv, std::complex<double> c) -> OpPtr {
        return convWithMtf(conv, add(conv->params().mtf, c),
                           conv->params().isReal && c.imag() == 0.0);
    };
    if (x->kind() == OpKind::Conv && y->kind() == OpKind::Identity)
        return convPlusConst(x, 1.0);
    if (x->kind() == OpKind::Identity && y->kind() == OpKind::Conv)
        return convPlusConst(y, 1.0);
    if (x->kind() == OpKind::Conv && isScaledIdentityNode(y))
        return convPlusConst(x, scaledIdentityValue(y));
    if (isScaledIdentityNode(x) && y->kind() == OpKind::Conv)
        return convPlusConst(y, scaledIdentityValue(x));

    return std::nullopt;
}

} // namespace

bool opEquals(const OpPtr& a, const OpPtr& b) {
    if (a == b) return true;
    if (a->kind() != b->kind()) return false;
    if (a->sizein() != b->sizein() || a->sizeout() != b->sizeout()) return false;
    switch (a->kind()) {
        case OpKind::Identity: return true;
        case OpKind::Downsample: return a->params().factors == b->params().factors;
        case OpKind::SelectorPatch: return a->params().corner == b->params().corner;
        case OpKind::SumPatches: return a->params().patch == b->params().patch;
        case OpKind::Grad:
        case OpKind::Hess: return a->params().dims == b->params().dims;
        default: return false; // conservative: distinct unless the same node
    }
}

OpPtr compose(OpPtr a, OpPtr b) {
    if (a->sizein() != b->sizeout())
        throw ShapeError("compose: left expects input " + a->sizein().str() +
                         " but right produces " + b->sizeout().str());

    std::vector<OpPtr> list;
    flattenInto(list, a, OpKind::Composition);
    flattenInto(list, b, OpKind::Composition);

    // Greedy fixpoint over the child list; every firing shrinks it.
    bool changed = true;
    while (changed && list.size() > 1) {
        changed = false;
        for (std::size_t i = 0; i + 1 < list.size() && !changed; ++i) {
            if (auto r = composePair(list[i], list[i + 1])) {
                list[i] = *r;
                list.erase(list.begin() + static_cast<long>(i) + 1);
                changed = true;
            }
        }
        for (std::size_t i = 0; i + 2 < list.size() && !changed; ++i) {
            if (auto r = composeTriple(list[i], list[i + 1], list[i + 2])) {
                list[i] = *r;
                list.erase(list.begin() + static_cast<long>(i) + 1,
                           list.begin() + static_cast<long>(i) + 3);
                changed = true;
            }
        }
    }
    if (list.size() == 1) return list[0];
    return genericComposition(std::move(list));
}

OpPtr addOp(OpPtr a, OpPtr b) {
    if (a->sizein() != b->sizein() || a->sizeout() != b->sizeout())
        throw ShapeError("addOp: operand shapes disagree");

    std::vector<OpPtr> list;
    flattenInto(list, a, OpKind::Summation);
    flattenInto(list, b, OpKind::Summation);

    bool changed = true;
    while (changed && list.size() > 1) {
        changed = false;
        for (std::size_t i = 0; i < list.size() && !changed; ++i)
            for (std::size_t j = i + 1; j < list.size() && !changed; ++j) {
                if (auto r = addPair(list[i], list[j])) {
                    list[i] = *r;
                    list.erase(list.begin() + static_cast<long>(j));
                    changed = true;
                }
            }
    }
    if (list.size() == 1) return list[0];
    return genericSummation(std::move(list));
}

OpPtr adjointOf(OpPtr a) {
    if (!a->isLinear()) throw CapabilityError("adjointOf: node is not linear");
    switch (a->kind()) {
        case OpKind::Identity: return a;
        case OpKind::Diag: return makeDiag(conjugate(a->params().diag));
        case OpKind::Conv:
            return makeConvFromMtf(conjugate(a->params().mtf), a->params().dims,
                                   a->params().isReal);
        case OpKind::Adjoint: return a->children()[0];
        case OpKind::Scaled: return scaleOf(adjointOf(a->children()[0]), a->params().scale);
        case OpKind::Composition: {
            const auto& ch = a->children();
            OpPtr acc = adjointOf(ch.back());
            for (std::size_t k = ch.size() - 1; k-- > 0;) acc = compose(acc, adjointOf(ch[k]));
            return acc;
        }
        case OpKind::Summation: {
            const auto& ch = a->children();
            OpPtr acc = adjointOf(ch[0]);
            for (std::size_t k = 1; k < ch.size(); ++k) acc = addOp(acc, adjointOf(ch[k]));
            return acc;
        }
        case OpKind::Inversion: return genericInversion(adjointOf(a->children()[0]));
        default: return genericAdjoint(a);
    }
}

OpPtr scaleOf(OpPtr a, double c) {
    if (c == 1.0) return a;
    switch (a->kind()) {
        case OpKind::Scaled: return scaleOf(a->children()[0], c * a->params().scale);
        case OpKind::Identity: return makeScaledIdentity(a->sizein(), c);
        case OpKind::Diag: return makeDiag(mul(a->params().diag, c));
        case OpKind::Conv:
            return makeConvFromMtf(mul(a->params().mtf, c), a->params().dims, a->params().isReal);
        default: return genericScaled(a, c);
    }
}

OpPtr powerOf(OpPtr a, long k) {
    if (k < -1) throw DomainError("powerOf: exponent must be -1 or nonnegative");
    if (k == 1) return a;
    if (k == 0) {
        if (a->sizein() != a->sizeout())
            throw ShapeError("powerOf: zeroth power needs a square operator");
        return makeIdentity(a->sizein());
    }
    if (k >= 2) {
        OpPtr acc = a;
        for (long i = 1; i < k; ++i) acc = compose(a, acc);
        return acc;
    }

    // k == -1
    if (!a->isInvertible())
        throw CapabilityError(std::string("powerOf(-1): ") + opKindName(a->kind()) +
                              " node is not invertible");
    switch (a->kind()) {
        case OpKind::Identity: return a;
        case OpKind::Diag: {
            Tensor ones = Tensor::full(a->params().diag.shape(), 1.0);
            if (a->params().diag.isComplex()) ones = ones.asComplex();
            return makeDiag(div(ones, a->params().diag));
        }
        case OpKind::Conv: {
            Tensor ones = Tensor::full(a->params().mtf.shape(), 1.0).asComplex();
            return makeConvFromMtf(div(ones, a->params().mtf), a->params().dims,
                                   a->params().isReal);
        }
        case OpKind::Scaled:
            return scaleOf(powerOf(a->children()[0], -1), 1.0 / a->params().scale);
        case OpKind::Composition: {
            const auto& ch = a->children();
            OpPtr acc = powerOf(ch[0], -1);
            for (std::size_t i = 1; i < ch.size(); ++i) acc = compose(powerOf(ch[i], -1), acc);
            return acc;
        }
        case OpKind::Adjoint: return adjointOf(powerOf(a->children()[0], -1));
        case OpKind::Inversion: return a->children()[0];
        default: return genericInversion(a);
    }
}

OpPtr genericComposition(std::vector<OpPtr> children) {
    return makeOpNode(OpKind::Composition, {}, std::move(children), {}, {});
}

OpPtr genericSummation(std::vector<OpPtr> children) {
    return makeOpNode(OpKind::Summation, {}, std::move(children), {}, {});
}

OpPtr genericAdjoint(OpPtr a) {
    std::vector<OpPtr> ch{std::move(a)};
    return makeOpNode(OpKind::Adjoint, {}, std::move(ch), {}, {});
}

OpPtr genericInversion(OpPtr a) {
    std::vector<OpPtr> ch{std::move(a)};
    return makeOpNode(OpKind::Inversion, {}, std::move(ch), {}, {});
}

OpPtr genericScaled(OpPtr a, double c) {
    OpParams p;
    p.scale = c;
    Shape in = a->sizein(), out = a->sizeout();
    std::vector<OpPtr> ch{std::move(a)};
    return makeOpNode(OpKind::Scaled, std::move(p), std::move(ch), std::move(in), std::move(out));
}

} // namespace invop
