#include "invop/solvers.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <sstream>

#include "invop/cg.hpp"
#include "invop/linops.hpp"

namespace invop {

namespace {

using Clock = std::chrono::steady_clock;

double elapsedSince(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool anyCostCriterion(const std::vector<ConvergenceCriterion>& cs) {
    for (const auto& c : cs) {
        if (c.kind == ConvergenceCriterion::Kind::CostRelative) return true;
        if (c.kind == ConvergenceCriterion::Kind::Combined && anyCostCriterion(c.sub)) return true;
    }
    return false;
}

double relStep(const Tensor& x, const Tensor& xPrev) {
    return norm(sub(x, xPrev)) / std::max(norm(xPrev), 1e-30);
}

// Shared iteration bookkeeping: logging cadence, convergence state, timing.
class RunState {
public:
    RunState(const SolverConfig& cfg, const Monitor& mon,
             std::function<double(const Tensor&)> costFn)
        : cfg_(cfg), mon_(mon), costFn_(std::move(costFn)), t0_(Clock::now()) {}

    void recordInitial(const Tensor& x0) {
        IterationRecord r;
        r.iteration = 0;
        if (costFn_) r.cost = costFn_(x0);
        if (mon_.snr) r.snrDb = mon_.snr(x0);
        r.seconds = elapsedSince(t0_);
        log_.records.push_back(std::move(r));
    }

    /// Returns true when the configured criteria all fire.
    bool afterIteration(std::size_t k, const Tensor& x, const Tensor& xPrev) {
        state_.stepRel = relStep(x, xPrev);
        const bool costForCvg = costFn_ && anyCostCriterion(cfg_.convergence);
        const bool logged = cfg_.logEvery > 0 && (k % cfg_.logEvery == 0 || k == cfg_.maxiter);
        std::optional<double> cost;
        if (costForCvg || (logged && costFn_)) cost = costFn_(x);
        if (cost) {
            state_.costPrev = state_.costCurr;
            state_.costCurr = cost;
        }
        if (logged) {
            IterationRecord r;
            r.iteration = k;
            r.cost = cost;
            r.stepRel = state_.stepRel;
            if (mon_.snr) r.snrDb = mon_.snr(x);
            r.seconds = elapsedSince(t0_);
            log_.records.push_back(std::move(r));
        }
        return !cfg_.convergence.empty() && checkConvergence(cfg_.convergence, state_);
    }

    void recordFinal(std::size_t k, const Tensor& x) {
        if (!log_.records.empty() && log_.records.back().iteration == k) return;
        IterationRecord r;
        r.iteration = k;
        if (costFn_) r.cost = costFn_(x);
        r.stepRel = state_.stepRel;
        if (mon_.snr) r.snrDb = mon_.snr(x);
        r.seconds = elapsedSince(t0_);
        log_.records.push_back(std::move(r));
    }

    IterationLog takeLog() { return std::move(log_); }

private:
    const SolverConfig& cfg_;
    const Monitor& mon_;
    std::function<double(const Tensor&)> costFn_;
    Clock::time_point t0_;
    ConvergenceState state_;
    IterationLog log_;
};

} // namespace

std::string IterationLog::toCsv() const {
    std::ostringstream os;
    os.precision(17);
    os << "iteration,cost,step_rel,snr_db,seconds\n";
    for (const auto& r : records) {
        os << r.iteration << ",";
        if (r.cost) os << *r.cost;
        os << ",";
        if (r.stepRel) os << *r.stepRel;
        os << ",";
        if (r.snrDb) os << *r.snrDb;
        os << "," << r.seconds << "\n";
    }
    return os.str();
}

bool checkConvergence(const std::vector<ConvergenceCriterion>& criteria,
                      const ConvergenceState& state) {
    for (const auto& c : criteria) {
        switch (c.kind) {
            case ConvergenceCriterion::Kind::StepRelative:
                if (!state.stepRel || !(*state.stepRel < c.tol)) return false;
                break;
            case ConvergenceCriterion::Kind::CostRelative: {
                if (!state.costPrev || !state.costCurr) return false;
                const double rel = std::abs(*state.costCurr - *state.costPrev) /
                                   std::max(std::abs(*state.costPrev), 1e-30);
                if (!(rel < c.tol)) return false;
                break;
            }
            case ConvergenceCriterion::Kind::Combined:
                if (!checkConvergence(c.sub, state)) return false;
                break;
        }
    }
    return true;
}

double computeSnr(const Tensor& est, const Tensor& gt) {
    if (est.shape() != gt.shape()) throw ShapeError("computeSnr: shape mismatch");
    const double errSq = normSq(sub(gt, est));
    if (errSq == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(normSq(gt) / errSq);
}

double splitObjectiveFinite(const SplitProblem& p, const Tensor& x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.fn.size(); ++i) {
        const Cost* c = p.fn[i].get();
        // peel scaling to identify indicator terms
        double scale = 1.0;
        while (c->kind() == CostKind::Scaled) {
            scale *= c->lambda();
            c = c->children()[0].get();
        }
        if (c->kind() == CostKind::NonNegIndicator) continue;
        acc += scale * c->evaluate(p.hn[i]->apply(x));
    }
    if (p.f0) acc += p.f0->evaluate(x);
    if (p.g && p.g->kind() != CostKind::NonNegIndicator) acc += p.g->evaluate(x);
    return acc;
}

// ---- ADMM -------------------------------------------------------------------

SolveResult runADMM(const SplitProblem& p, const SolverConfig& cfg, const Tensor& x0,
                    const Monitor& mon) {
    const std::size_t P = p.fn.size();
    if (P == 0 || p.hn.size() != P)
        throw ConfigError("runADMM: needs matching lists of costs and operators");
    if (p.f0 || p.g)
        throw ConfigError("runADMM: smooth/plain-prox terms are not part of this splitting");
    std::vector<double> rho = cfg.rho;
    if (rho.size() == 1) rho.assign(P, rho[0]);
    if (rho.size() != P) throw ConfigError("runADMM: one rho per split term required");
    for (std::size_t i = 0; i < P; ++i) {
        if (!p.fn[i]->hasProx())
            throw CapabilityError("runADMM: term " + std::to_string(i) + " has no prox");
        if (rho[i] <= 0.0) throw ConfigError("runADMM: rho must be positive");
        if (p.hn[i]->sizein() != x0.shape())
            throw ShapeError("runADMM: operator/initial point shapes disagree");
    }

    // x-update operator sum rho_p T_p^T T_p; the rewrite rules usually turn
    // it into an invertible convolution, otherwise fall back to CG.
    OpPtr A = scaleOf(compose(adjointOf(p.hn[0]), p.hn[0]), rho[0]);
    for (std::size_t i = 1; i < P; ++i)
        A = addOp(A, scaleOf(compose(adjointOf(p.hn[i]), p.hn[i]), rho[i]));
    OpPtr AInv = A->isInvertible() ? powerOf(A, -1) : nullptr;

    Tensor x = x0;
    std::vector<Tensor> z(P), u(P);
    for (std::size_t i = 0; i < P; ++i) {
        z[i] = p.hn[i]->apply(x);
        u[i] = Tensor::zeros(z[i].shape(), z[i].kind());
    }

    RunState rs(cfg, mon, [&](const Tensor& xx) { return splitObjectiveFinite(p, xx); });
    rs.recordInitial(x);

    std::size_t k = 1;
    for (; k <= cfg.maxiter; ++k) {
        // z/u updates first so the first iteration moves even from a cold
        // start (with x first, the solve would just reproduce x0).
        for (std::size_t i = 0; i < P; ++i) {
            Tensor w = p.hn[i]->apply(x);
            Tensor v = add(w, u[i]);
            z[i] = p.fn[i]->prox(v, 1.0 / rho[i]);
            u[i].addInPlace(w);
            u[i].subInPlace(z[i]);
        }

        Tensor rhs = Tensor::zeros(x.shape(), x.kind());
        for (std::size_t i = 0; i < P; ++i)
            rhs.axpyInPlace(rho[i], p.hn[i]->applyAdjoint(sub(z[i], u[i])));

        Tensor xPrev = x;
        if (AInv) {
            x = AInv->apply(rhs);
        } else {
            CgResult res = conjugateGradient(A, rhs, x, cfg.cg.tol, cfg.cg.maxit);
            if (!res.converged)
                throw NumericalError("runADMM: x-update CG did not converge (relative residual " +
                                     std::to_string(res.relResidual) + ")");
            x = std::move(res.x);
        }

        if (rs.afterIteration(k, x, xPrev)) break;
    }
    rs.recordFinal(std::min(k, cfg.maxiter), x);

    SolveResult out{std::move(x), rs.takeLog(), {}};
    out.finalPrimalResiduals.reserve(P);
    for (std::size_t i = 0; i < P; ++i)
        out.finalPrimalResiduals.push_back(norm(sub(p.hn[i]->apply(out.x), z[i])));
    return out;
}

// ---- Condat primal-dual ------------------------------------------------------

SolveResult runPrimalDual(const SplitProblem& p, const SolverConfig& cfg, const Tensor& x0,
                          const Monitor& mon) {
    const std::size_t P = p.fn.size();
    if (P == 0 || p.hn.size() != P)
        throw ConfigError("runPrimalDual: needs matching lists of costs and operators");
    for (std::size_t i = 0; i < P; ++i)
        if (!p.fn[i]->hasProx())
            throw CapabilityError("runPrimalDual: term " + std::to_string(i) + " has no prox");
    if (p.f0 && !p.f0->hasGrad())
        throw CapabilityError("runPrimalDual: smooth term has no gradient");
    if (p.g && !p.g->hasProx()) throw CapabilityError("runPrimalDual: plain term has no prox");
    if (cfg.tau <= 0.0) throw ConfigError("runPrimalDual: tau must be positive");
    if (cfg.relaxation <= 0.0 || cfg.relaxation >= 2.0)
        throw ConfigError("runPrimalDual: relaxation must lie in (0, 2)");

    // Feasibility: tau * sigma * ||sum T_p^T T_p|| <= 1.
    OpPtr tSum = compose(adjointOf(p.hn[0]), p.hn[0]);
    for (std::size_t i = 1; i < P; ++i) tSum = addOp(tSum, compose(adjointOf(p.hn[i]), p.hn[i]));
    const double opNorm = estimateNorm(tSum).value;
    const double sigma = cfg.sigma.value_or(opNorm > 0.0 ? 1.0 / (cfg.tau * opNorm) : 1.0);
    if (sigma <= 0.0) throw ConfigError("runPrimalDual: sigma must be positive");
    if (cfg.tau * sigma * opNorm > 1.0 + 1e-9)
        throw NumericalError("runPrimalDual: infeasible steps, tau*sigma*||sum T^T T|| = " +
                             std::to_string(cfg.tau * sigma * opNorm) + " > 1 (norm " +
                             std::to_string(opNorm) + ")");

    const double rho = cfg.relaxation;
    Tensor x = x0;
    std::vector<Tensor> u(P);
    for (std::size_t i = 0; i < P; ++i) {
        Tensor probe = p.hn[i]->apply(x);
        u[i] = Tensor::zeros(probe.shape(), probe.kind());
    }

    RunState rs(cfg, mon, [&](const Tensor& xx) { return splitObjectiveFinite(p, xx); });
    rs.recordInitial(x);

    std::size_t k = 1;
    for (; k <= cfg.maxiter; ++k) {
        Tensor xPrev = x;

        Tensor step = Tensor::zeros(x.shape(), x.kind());
        for (std::size_t i = 0; i < P; ++i) step.addInPlace(p.hn[i]->applyAdjoint(u[i]));
        if (p.f0) step.addInPlace(p.f0->gradient(x));
        Tensor xTil = x;
        xTil.axpyInPlace(-cfg.tau, step);
        if (p.g) xTil = p.g->prox(xTil, cfg.tau);

        // xbar = 2 xTil - x
        Tensor xBar = xTil;
        xBar.scaleInPlace(2.0);
        xBar.subInPlace(x);

        for (std::size_t i = 0; i < P; ++i) {
            Tensor v = u[i];
            v.axpyInPlace(sigma, p.hn[i]->apply(xBar));
            // Moreau: prox of the conjugate
            Tensor pr = p.fn[i]->prox(mul(v, 1.0 / sigma), 1.0 / sigma);
            v.axpyInPlace(-sigma, pr);
            // relaxation on the dual
            u[i].scaleInPlace(1.0 - rho);
            u[i].axpyInPlace(rho, v);
        }

        // relaxation on the primal
        x.scaleInPlace(1.0 - rho);
        x.axpyInPlace(rho, xTil);

        // iteration 1 only warms up the duals (x cannot move from zero dual
        // variables without a smooth/prox primal term), so the convergence
        // tests start at iteration 2.
        const bool converged = rs.afterIteration(k, x, xPrev);
        if (k > 1 && converged) break;
    }
    rs.recordFinal(std::min(k, cfg.maxiter), x);
    return {std::move(x), rs.takeLog(), {}};
}

// ---- forward-backward splitting ----------------------------------------------

SolveResult runFBS(const CostPtr& f0, const CostPtr& g, const SolverConfig& cfg, const Tensor& x0,
                   const Monitor& mon) {
    if (!f0 || !f0->hasGrad()) throw CapabilityError("runFBS: smooth term has no gradient");
    if (g && !g->hasProx()) throw CapabilityError("runFBS: prox term has no prox");
    if (cfg.gamma <= 0.0) throw ConfigError("runFBS: gamma must be positive");

    Tensor x = x0;
    Tensor y = x0;
    double t = 1.0;

    auto costFn = [&](const Tensor& xx) {
        double v = f0->evaluate(xx);
        if (g) v += g->evaluate(xx);
        return v;
    };
    RunState rs(cfg, mon, costFn);
    rs.recordInitial(x);

    std::size_t k = 1;
    for (; k <= cfg.maxiter; ++k) {
        Tensor xPrev = x;
        Tensor step = y;
        step.axpyInPlace(-cfg.gamma, f0->gradient(y));
        Tensor xNew = g ? g->prox(step, cfg.gamma) : std::move(step);

        if (cfg.fista) {
            const double tNew = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            y = xNew;
            Tensor diff = sub(xNew, x);
            y.axpyInPlace((t - 1.0) / tNew, diff);
            t = tNew;
        } else {
            y = xNew;
        }
        x = std::move(xNew);

        if (rs.afterIteration(k, x, xPrev)) break;
    }
    rs.recordFinal(std::min(k, cfg.maxiter), x);
    return {std::move(x), rs.takeLog(), {}};
}

// ---- VMLMB (projected limited-memory quasi-Newton) ----------------------------

namespace {

struct BoundInfo {
    bool active = false;
    double scalar = 0.0;
    const Tensor* tensor = nullptr;

    double lb(std::size_t i) const { return tensor ? tensor->real()[i] : scalar; }
};

void projectLower(Tensor& x, const BoundInfo& b) {
    if (!b.active) return;
    auto xs = x.real();
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = std::max(xs[i], b.lb(i));
}

} // namespace

SolveResult runVMLMB(const CostPtr& j, const SolverConfig& cfg, const Tensor& x0,
                     const Monitor& mon) {
    if (!j || !j->hasGrad()) throw CapabilityError("runVMLMB: cost has no gradient");
    if (cfg.memory == 0) throw ConfigError("runVMLMB: memory must be positive");

    BoundInfo bound;
    if (cfg.lowerBoundTensor) {
        if (cfg.lowerBoundTensor->shape() != x0.shape())
            throw ShapeError("runVMLMB: lower-bound tensor shape mismatch");
        bound.active = true;
        bound.tensor = &*cfg.lowerBoundTensor;
    } else if (cfg.lowerBound) {
        bound.active = true;
        bound.scalar = *cfg.lowerBound;
    }

    Tensor x = x0;
    projectLower(x, bound);
    double fx = j->evaluate(x);
    Tensor grad = j->gradient(x);

    std::deque<std::pair<Tensor, Tensor>> pairs; // (s, y)

    RunState rs(cfg, mon, [&](const Tensor& xx) { return j->evaluate(xx); });
    rs.recordInitial(x);
    bool warned = false;

    constexpr double c1 = 1e-4;     // Armijo slope fraction
    constexpr double backtrack = 0.5;
    constexpr int maxBacktracks = 30;

    std::size_t k = 1;
    for (; k <= cfg.maxiter; ++k) {
        // Variables pinned at the bound with an outward-pushing gradient are
        // frozen for this iteration.
        std::vector<bool> activeSet(x.size(), false);
        if (bound.active) {
            auto xs = x.real();
            auto gs = grad.real();
            for (std::size_t i = 0; i < xs.size(); ++i)
                activeSet[i] = xs[i] <= bound.lb(i) && gs[i] > 0.0;
        }
        Tensor gm = grad;
        {
            auto gs = gm.real();
            for (std::size_t i = 0; i < gs.size(); ++i)
                if (activeSet[i]) gs[i] = 0.0;
        }
        if (norm(gm) <= 1e-16 * std::max(1.0, std::abs(fx))) break; // stationary

        // Two-loop recursion on the masked gradient.
        Tensor d = gm;
        std::vector<double> alphaCoef(pairs.size());
        for (std::size_t idx = pairs.size(); idx-- > 0;) {
            const auto& [s, yv] = pairs[idx];
            const double rhoInv = inner(yv, s).real();
            alphaCoef[idx] = inner(s, d).real() / rhoInv;
            d.axpyInPlace(-alphaCoef[idx], yv);
        }
        if (!pairs.empty()) {
            const auto& [s, yv] = pairs.back();
            d.scaleInPlace(inner(s, yv).real() / inner(yv, yv).real());
        }
        for (std::size_t idx = 0; idx < pairs.size(); ++idx) {
            const auto& [s, yv] = pairs[idx];
            const double rhoInv = inner(yv, s).real();
            const double beta = inner(yv, d).real() / rhoInv;
            d.axpyInPlace(alphaCoef[idx] - beta, s);
        }
        d.scaleInPlace(-1.0);
        {
            auto ds = d.real();
            for (std::size_t i = 0; i < ds.size(); ++i)
                if (activeSet[i]) ds[i] = 0.0;
        }
        if (inner(d, gm).real() >= 0.0) {
            d = gm;
            d.scaleInPlace(-1.0); // fall back to steepest descent
        }

        // Projected Armijo backtracking.
        double step = 1.0;
        Tensor xNew = x;
        double fNew = fx;
        bool accepted = false;
        for (int ls = 0; ls < maxBacktracks; ++ls) {
            xNew = x;
            xNew.axpyInPlace(step, d);
            projectLower(xNew, bound);
            fNew = j->evaluate(xNew);
            const double decrease = inner(grad, sub(xNew, x)).real();
            if (fNew <= fx + c1 * decrease && decrease < 0.0) {
                accepted = true;
                break;
            }
            step *= backtrack;
        }
        if (!accepted) {
            warned = true; // keep the best iterate, flag the failure
            break;
        }

        Tensor gNew = j->gradient(xNew);
        Tensor s = sub(xNew, x);
        Tensor yv = sub(gNew, grad);
        const double sy = inner(yv, s).real();
        if (sy > 1e-10 * norm(s) * norm(yv)) {
            pairs.emplace_back(std::move(s), std::move(yv));
            if (pairs.size() > cfg.memory) pairs.pop_front();
        }

        Tensor xPrev = std::move(x);
        x = std::move(xNew);
        fx = fNew;
        grad = std::move(gNew);

        if (rs.afterIteration(k, x, xPrev)) break;
    }
    rs.recordFinal(std::min(k, cfg.maxiter), x);
    IterationLog log = rs.takeLog();
    log.lineSearchWarning = warned;
    return {std::move(x), std::move(log), {}};
}

} // namespace invop
