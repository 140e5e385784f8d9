#include "invop/cost.hpp"

#include <cmath>

#include "invop/cg.hpp"
#include "invop/linops.hpp"

namespace invop {

const char* costKindName(CostKind k) {
    switch (k) {
        case CostKind::L2Residual: return "L2Residual";
        case CostKind::MixNorm21: return "MixNorm21";
        case CostKind::MixNormSchatt1: return "MixNormSchatt1";
        case CostKind::NonNegIndicator: return "NonNegIndicator";
        case CostKind::Hyperbolic: return "Hyperbolic";
        case CostKind::GoodRoughness: return "GoodRoughness";
        case CostKind::Composed: return "Composed";
        case CostKind::Sum: return "Sum";
        case CostKind::Scaled: return "Scaled";
    }
    return "?";
}

namespace {

// Iteration over the groups defined by one dimension: group g has elements
// base(g) + j*stride for j = 0..K-1.
struct Groups {
    std::size_t count = 0;  // number of groups
    std::size_t size = 0;   // elements per group (extent of the group dim)
    std::size_t stride = 0; // flat stride of the group dim
    std::vector<std::size_t> bases;
};

Groups groupsOf(const Shape& shape, std::size_t groupDim) {
    if (groupDim >= shape.rank())
        throw ShapeError("cost: group dimension out of range for shape " + shape.str());
    const auto strides = shape.strides();
    Groups g;
    g.size = shape.extent(groupDim);
    g.stride = strides[groupDim];
    g.count = shape.count() / g.size;
    g.bases.reserve(g.count);
    // Row-major walk over the complement of the group dimension.
    std::vector<std::size_t> coords(shape.rank(), 0);
    for (std::size_t r = 0; r < g.count; ++r) {
        std::size_t flat = 0;
        for (std::size_t d = 0; d < shape.rank(); ++d) flat += coords[d] * strides[d];
        g.bases.push_back(flat);
        for (std::size_t d = shape.rank(); d-- > 0;) {
            if (d == groupDim) continue;
            if (++coords[d] < shape.extent(d)) break;
            coords[d] = 0;
        }
    }
    return g;
}

double softShrink(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

std::optional<double> detectSemiOrtho(const OpPtr& t) {
    if (t->kind() == OpKind::Identity) return 1.0;
    if (t->kind() != OpKind::Diag) return std::nullopt;
    // L L^T came back diagonal: accept entries equal within 1e-10 relative,
    // real and positive.
    const Tensor& d = t->params().diag;
    const std::complex<double> first = d.get(0);
    if (first.real() <= 0.0 || std::abs(first.imag()) > 1e-10 * std::abs(first)) return std::nullopt;
    for (std::size_t i = 1; i < d.size(); ++i)
        if (std::abs(d.get(i) - first) > 1e-10 * std::abs(first)) return std::nullopt;
    return first.real();
}

} // namespace

// ---- constructors ----------------------------------------------------------

namespace {
} // namespace

CostPtr makeL2Residual(Tensor g) {
    auto c = std::shared_ptr<Cost>(new Cost());
    c->kind_ = CostKind::L2Residual;
    c->sizein_ = g.shape();
    c->data_ = std::move(g);
    c->hasGrad_ = true;
    c->hasProx_ = true;
    c->isConvex_ = true;
    return c;
}

CostPtr makeMixNorm21(Shape in, std::optional<std::size_t> groupDim) {
    auto c = std::shared_ptr<Cost>(new Cost());
    c->kind_ = CostKind::MixNorm21;
    c->groupDim_ = groupDim.value_or(in.rank() - 1);
    if (c->groupDim_ >= in.rank()) throw ShapeError("makeMixNorm21: group dimension out of range");
    c->sizein_ = std::move(in);
    c->hasGrad_ = false;
    c->hasProx_ = true;
    c->isConvex_ = true;
    return c;
}

CostPtr makeMixNormSchatt1(Shape in, double p, std::optional<std::size_t> groupDim) {
    if (p != 1.0)
        throw ConfigError("makeMixNormSchatt1: only the nuclear norm (p = 1) is supported");
    auto c = std::shared_ptr<Cost>(new Cost());
    c->kind_ = CostKind::MixNormSchatt1;
    c->groupDim_ = groupDim.value_or(in.rank() - 1);
    if (c->groupDim_ >= in.rank() || in.extent(c->groupDim_) != 3)
        throw ShapeError("makeMixNormSchatt1: group dimension must hold the 3 components of the "
                         "symmetric 2x2 field");
    c->sizein_ = std::move(in);
    c->hasGrad_ = false;
    c->hasProx_ = true;
    c->isConvex_ = true;
    return c;
}

CostPtr makeNonNeg(Shape in) {
    auto c = std::shared_ptr<Cost>(new Cost());
    c->kind_ = CostKind::NonNegIndicator;
    c->sizein_ = std::move(in);
    c->hasGrad_ = false;
    c->hasProx_ = true;
    c->isConvex_ = true;
    return c;
}

CostPtr makeHyperbolic(Shape in, double epsilon, std::optional<std::size_t> groupDim) {
    if (epsilon <= 0.0) throw ConfigError("makeHyperbolic: epsilon must be positive");
    auto c = std::shared_ptr<Cost>(new Cost());
    c->kind_ = CostKind::Hyperbolic;
    c->epsilon_ = epsilon;
    c->groupDim_ = groupDim.value_or(in.rank() - 1);
    if (c->groupDim_ >= in.rank()) throw ShapeError("makeHyperbolic: group dimension out of range");
    c->sizein_ = std::move(in);
    c->hasGrad_ = true;
    c->hasProx_ = false;
    c->isConvex_ = true;
    return c;
}

CostPtr makeGoodRoughness(OpPtr gradOp, double epsilon) {
    if (epsilon <= 0.0) throw ConfigError("makeGoodRoughness: epsilon must be positive");
    if (gradOp->kind() != OpKind::Grad)
        throw ConfigError("makeGoodRoughness: expects the finite-difference gradient operator");
    auto c = std::shared_ptr<Cost>(new Cost());
    c->kind_ = CostKind::GoodRoughness;
    c->epsilon_ = epsilon;
    c->sizein_ = gradOp->sizein();
    c->groupDim_ = gradOp->sizeout().rank() - 1;
    c->inner_ = std::move(gradOp);
    c->hasGrad_ = true;
    c->hasProx_ = false;
    c->isConvex_ = false;
    return c;
}

CostPtr composeCost(CostPtr outer, OpPtr op) {
    if (outer->sizein() != op->sizeout())
        throw ShapeError("composeCost: cost expects " + outer->sizein().str() +
                         " but operator produces " + op->sizeout().str());
    if (op->kind() == OpKind::Identity) return outer;

    // (J o L1) o L2 = J o (L1 L2): recompose against the original outer so
    // the operator rewrite rules see the whole chain.
    if (outer->kind() == CostKind::Composed)
        return composeCost(outer->children()[0], compose(outer->inner(), op));

    auto c = std::shared_ptr<Cost>(new Cost());
    c->kind_ = CostKind::Composed;
    c->sizein_ = op->sizein();
    c->inner_ = op;
    c->children_ = {outer};

    if (op->isLinear()) {
        auto nu = detectSemiOrtho(compose(op, adjointOf(op)));
        if (nu && *nu > 0.0) {
            c->semiOrtho_ = true;
            c->nu_ = *nu;
        }
    }

    c->hasGrad_ = outer->hasGrad() && op->isDifferentiable();
    c->isConvex_ = outer->isConvex() && op->isLinear();
    const bool semiOrthoProx = c->semiOrtho_ && outer->hasProx() && outer->isConvex();
    const bool woodburyProxOk = outer->kind() == CostKind::L2Residual && op->isLinear();
    c->hasProx_ = semiOrthoProx || woodburyProxOk;
    return c;
}

CostPtr addCost(CostPtr a, CostPtr b) {
    if (a->sizein() != b->sizein()) throw ShapeError("addCost: input shapes disagree");
    auto c = std::shared_ptr<Cost>(new Cost());
    c->kind_ = CostKind::Sum;
    c->sizein_ = a->sizein();
    auto flatten = [&](const CostPtr& x) {
        if (x->kind() == CostKind::Sum)
            for (const auto& ch : x->children()) c->children_.push_back(ch);
        else
            c->children_.push_back(x);
    };
    flatten(a);
    flatten(b);
    c->hasGrad_ = true;
    c->isConvex_ = true;
    for (const auto& ch : c->children_) {
        c->hasGrad_ &= ch->hasGrad();
        c->isConvex_ &= ch->isConvex();
    }
    c->hasProx_ = false; // no prox of sums
    return c;
}

CostPtr scaleCost(CostPtr base, double lambda) {
    if (lambda == 1.0) return base;
    auto c = std::shared_ptr<Cost>(new Cost());
    c->kind_ = CostKind::Scaled;
    c->sizein_ = base->sizein();
    c->lambda_ = lambda;
    c->hasGrad_ = base->hasGrad();
    c->hasProx_ = base->hasProx() && lambda > 0.0;
    c->isConvex_ = base->isConvex() && lambda >= 0.0;
    c->children_ = {std::move(base)};
    return c;
}

// ---- interface methods -----------------------------------------------------

double Cost::evaluate(const Tensor& f) const {
    if (f.shape() != sizein_)
        throw ShapeError(std::string("evaluate(") + costKindName(kind_) + "): input shape " +
                         f.shape().str() + " does not match " + sizein_.str());
    return evaluateKernel(f);
}

Tensor Cost::gradient(const Tensor& f) const {
    if (!hasGrad_)
        throw CapabilityError(std::string("gradient(") + costKindName(kind_) +
                              "): cost has no gradient");
    if (f.shape() != sizein_)
        throw ShapeError(std::string("gradient(") + costKindName(kind_) + "): shape mismatch");
    return gradientKernel(f);
}

Tensor Cost::prox(const Tensor& z, double alpha) const {
    if (!hasProx_)
        throw CapabilityError(std::string("prox(") + costKindName(kind_) +
                              "): cost has no proximity operator");
    if (z.shape() != sizein_)
        throw ShapeError(std::string("prox(") + costKindName(kind_) + "): shape mismatch");
    if (alpha <= 0.0) throw DomainError("prox: step must be positive");
    return proxKernel(z, alpha);
}

void Cost::setPrecompute(bool on) const {
    std::lock_guard<std::mutex> lock(lazy_.mu);
    lazy_.precompute = on;
    if (!on) lazy_.lsReady = false;
}

bool Cost::precomputeEnabled() const {
    bool own;
    {
        std::lock_guard<std::mutex> lock(lazy_.mu);
        own = lazy_.precompute;
    }
    return own || (inner_ && inner_->precomputeEnabled());
}

// ---- kernels ---------------------------------------------------------------

double Cost::evaluateKernel(const Tensor& f) const {
    switch (kind_) {
        case CostKind::L2Residual: {
            if (f.kind() == data_.kind()) return 0.5 * normSq(sub(f, data_));
            return 0.5 * normSq(sub(f.asComplex(), data_.asComplex()));
        }
        case CostKind::MixNorm21: {
            const Groups g = groupsOf(sizein_, groupDim_);
            auto x = f.real();
            double acc = 0.0;
            for (std::size_t r = 0; r < g.count; ++r) {
                double s = 0.0;
                for (std::size_t j = 0; j < g.size; ++j) {
                    const double v = x[g.bases[r] + j * g.stride];
                    s += v * v;
                }
                acc += std::sqrt(s);
            }
            return acc;
        }
        case CostKind::MixNormSchatt1: {
            const Groups g = groupsOf(sizein_, groupDim_);
            auto x = f.real();
            double acc = 0.0;
            for (std::size_t r = 0; r < g.count; ++r) {
                const double a = x[g.bases[r]];
                const double b = x[g.bases[r] + g.stride];
                const double cc = x[g.bases[r] + 2 * g.stride];
                const double half = 0.5 * (a + cc);
                const double rad = std::hypot(0.5 * (a - cc), b);
                acc += std::abs(half + rad) + std::abs(half - rad);
            }
            return acc;
        }
        case CostKind::NonNegIndicator: {
            for (double v : f.real())
                if (v < 0.0) return kInfCost;
            return 0.0;
        }
        case CostKind::Hyperbolic: {
            const Groups g = groupsOf(sizein_, groupDim_);
            auto x = f.real();
            double acc = 0.0;
            for (std::size_t r = 0; r < g.count; ++r) {
                double s = epsilon_ * epsilon_;
                for (std::size_t j = 0; j < g.size; ++j) {
                    const double v = x[g.bases[r] + j * g.stride];
                    s += v * v;
                }
                acc += std::sqrt(s);
            }
            return acc;
        }
        case CostKind::GoodRoughness: {
            const Tensor df = inner_->apply(f);
            const Groups g = groupsOf(df.shape(), groupDim_);
            auto dx = df.real();
            auto x = f.real();
            double acc = 0.0;
            for (std::size_t r = 0; r < g.count; ++r) {
                double s = 0.0;
                for (std::size_t j = 0; j < g.size; ++j) {
                    const double v = dx[g.bases[r] + j * g.stride];
                    s += v * v;
                }
                acc += s / std::sqrt(x[r] * x[r] + epsilon_ * epsilon_);
            }
            return acc;
        }
        case CostKind::Composed: return children_[0]->evaluate(inner_->apply(f));
        case CostKind::Sum: {
            double acc = 0.0;
            for (const auto& c : children_) acc += c->evaluate(f);
            return acc;
        }
        case CostKind::Scaled: return lambda_ * children_[0]->evaluate(f);
    }
    throw Error("evaluate: unreachable");
}

Tensor Cost::gradientKernel(const Tensor& f) const {
    switch (kind_) {
        case CostKind::L2Residual: return sub(f, data_);
        case CostKind::Hyperbolic: {
            const Groups g = groupsOf(sizein_, groupDim_);
            Tensor out = f;
            auto x = out.real();
            for (std::size_t r = 0; r < g.count; ++r) {
                double s = epsilon_ * epsilon_;
                for (std::size_t j = 0; j < g.size; ++j) {
                    const double v = x[g.bases[r] + j * g.stride];
                    s += v * v;
                }
                const double w = 1.0 / std::sqrt(s);
                for (std::size_t j = 0; j < g.size; ++j) x[g.bases[r] + j * g.stride] *= w;
            }
            return out;
        }
        case CostKind::GoodRoughness: {
            // d/df [ sum_n ||(Df)_n||^2 w(f_n) ] with w = (f^2 + eps^2)^{-1/2}:
            // 2 D^T(w Df) - ||Df||^2 f (f^2 + eps^2)^{-3/2}.
            Tensor df = inner_->apply(f);
            const Groups g = groupsOf(df.shape(), groupDim_);
            auto dx = df.real();
            auto x = f.real();
            Tensor density = Tensor::zeros(sizein_, ElementKind::Real64);
            auto dens = density.real();
            for (std::size_t r = 0; r < g.count; ++r) {
                const double denom = x[r] * x[r] + epsilon_ * epsilon_;
                const double w = 1.0 / std::sqrt(denom);
                double s = 0.0;
                for (std::size_t j = 0; j < g.size; ++j) {
                    double& v = dx[g.bases[r] + j * g.stride];
                    s += v * v;
                    v *= 2.0 * w;
                }
                dens[r] = -s * x[r] * w / denom;
            }
            Tensor out = inner_->applyAdjoint(df);
            out.addInPlace(density);
            return out;
        }
        case CostKind::Composed: {
            if (precomputeEnabled() && children_[0]->kind() == CostKind::L2Residual &&
                inner_->isLinear()) {
                OpPtr normalOp;
                Tensor htg;
                {
                    std::lock_guard<std::mutex> lock(lazy_.mu);
                    if (!lazy_.lsReady) {
                        lazy_.normalOp = compose(adjointOf(inner_), inner_);
                        lazy_.htg = inner_->applyAdjoint(children_[0]->data());
                        lazy_.lsReady = true;
                    }
                    normalOp = lazy_.normalOp;
                    htg = lazy_.htg;
                }
                return sub(normalOp->apply(f), htg);
            }
            return inner_->applyJacobianT(children_[0]->gradient(inner_->apply(f)), f);
        }
        case CostKind::Sum: {
            Tensor acc = children_[0]->gradient(f);
            for (std::size_t k = 1; k < children_.size(); ++k)
                acc.addInPlace(children_[k]->gradient(f));
            return acc;
        }
        case CostKind::Scaled: return mul(children_[0]->gradient(f), lambda_);
        default: break;
    }
    throw CapabilityError(std::string("gradient: no kernel for ") + costKindName(kind_));
}

Tensor Cost::proxKernel(const Tensor& z, double alpha) const {
    switch (kind_) {
        case CostKind::L2Residual: {
            // argmin 1/2||f-z||^2 + a/2 ||f-g||^2 = (z + a g)/(1 + a)
            Tensor out = z;
            out.axpyInPlace(alpha, data_);
            out.scaleInPlace(1.0 / (1.0 + alpha));
            return out;
        }
        case CostKind::NonNegIndicator: return max0(z);
        case CostKind::MixNorm21: {
            const Groups g = groupsOf(sizein_, groupDim_);
            Tensor out = z;
            auto x = out.real();
            for (std::size_t r = 0; r < g.count; ++r) {
                double s = 0.0;
                for (std::size_t j = 0; j < g.size; ++j) {
                    const double v = x[g.bases[r] + j * g.stride];
                    s += v * v;
                }
                s = std::sqrt(s);
                const double factor = s > alpha ? 1.0 - alpha / s : 0.0;
                for (std::size_t j = 0; j < g.size; ++j) x[g.bases[r] + j * g.stride] *= factor;
            }
            return out;
        }
        case CostKind::MixNormSchatt1: {
            // Per-pixel eigen-shrinkage of [a b; b c].
            const Groups g = groupsOf(sizein_, groupDim_);
            Tensor out = z;
            auto x = out.real();
            for (std::size_t r = 0; r < g.count; ++r) {
                double& a = x[g.bases[r]];
                double& b = x[g.bases[r] + g.stride];
                double& cc = x[g.bases[r] + 2 * g.stride];
                if (b == 0.0) {
                    a = softShrink(a, alpha);
                    cc = softShrink(cc, alpha);
                    continue;
                }
                const double half = 0.5 * (a + cc);
                const double diff = 0.5 * (a - cc);
                const double rad = std::hypot(diff, b);
                const double s1 = softShrink(half + rad, alpha);
                const double s2 = softShrink(half - rad, alpha);
                const double q = rad - diff; // > 0 since b != 0
                const double n2 = b * b + q * q;
                a = (s1 * b * b + s2 * q * q) / n2;
                cc = (s1 * q * q + s2 * b * b) / n2;
                b = b * q * (s1 - s2) / n2;
            }
            return out;
        }
        case CostKind::Composed: {
            if (semiOrtho_ && children_[0]->hasProx() && children_[0]->isConvex())
                return composedProx(*this, z, alpha);
            if (children_[0]->kind() == CostKind::L2Residual && inner_->isLinear())
                return woodburyProx(*this, z, alpha);
            break;
        }
        case CostKind::Scaled: return children_[0]->prox(z, alpha * lambda_);
        default: break;
    }
    throw CapabilityError(std::string("prox: no kernel for ") + costKindName(kind_));
}

Tensor composedProx(const Cost& c, const Tensor& z, double alpha) {
    if (c.kind() != CostKind::Composed || !c.innerSemiOrthogonal())
        throw CapabilityError("composedProx: inner operator is not semi-orthogonal");
    const double nu = c.semiOrthoNu();
    const auto& outer = c.children()[0];
    Tensor lz = c.inner()->apply(z);
    Tensor p = outer->prox(lz, nu * alpha);
    p.subInPlace(lz);
    Tensor corr = c.inner()->applyAdjoint(p);
    Tensor out = corr.kind() == z.kind() ? z : z.asComplex();
    out.axpyInPlace(1.0 / nu, corr);
    return out;
}

Tensor woodburyProx(const Cost& c, const Tensor& u, double alpha) {
    if (c.kind() != CostKind::Composed || c.children()[0]->kind() != CostKind::L2Residual ||
        !c.inner()->isLinear())
        throw CapabilityError("woodburyProx: needs a least-squares term composed with a linear "
                              "operator");
    const OpPtr& w = c.inner();
    const Tensor& g = c.children()[0]->data();

    // rhs = a W^T g + u
    Tensor rhs = c.inner()->applyAdjoint(g);
    rhs.scaleInPlace(alpha);
    rhs.addInPlace(u);

    OpPtr smallInverse, fallbackA;
    {
        std::lock_guard<std::mutex> lock(c.lazy_.mu);
        if (!c.lazy_.wwT) c.lazy_.wwT = compose(w, adjointOf(w));
        if (c.lazy_.alpha != alpha) {
            OpPtr node = addOp(makeIdentity(w->sizeout()), scaleOf(c.lazy_.wwT, alpha));
            if (node->isInvertible()) {
                c.lazy_.smallInverse = powerOf(node, -1);
                c.lazy_.fallbackA = nullptr;
            } else {
                c.lazy_.smallInverse = nullptr;
                c.lazy_.fallbackA =
                    addOp(scaleOf(compose(adjointOf(w), w), alpha), makeIdentity(w->sizein()));
            }
            c.lazy_.alpha = alpha;
        }
        smallInverse = c.lazy_.smallInverse;
        fallbackA = c.lazy_.fallbackA;
    }

    if (smallInverse) {
        // x = rhs - a W^T (I + a W W^T)^{-1} W rhs
        Tensor t = w->applyAdjoint(smallInverse->apply(w->apply(rhs)));
        Tensor out = rhs;
        out.axpyInPlace(-alpha, t);
        return out;
    }
    // Normal-equation fallback: (a W^T W + I) x = rhs.
    CgResult res = conjugateGradient(fallbackA, rhs, u, 1e-12, 1000);
    if (!res.converged)
        throw NumericalError("woodburyProx: CG fallback did not converge (relative residual " +
                             std::to_string(res.relResidual) + ")");
    return res.x;
}

} // namespace invop
