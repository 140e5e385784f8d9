#include <doctest.h>

#include "invop/linops.hpp"
#include "invop/rng.hpp"
#include "invop/solvers.hpp"
#include "oracles.hpp"

using namespace invop;

namespace {

OpPtr randomConv(const Shape& s, Rng& rng) {
    return makeConvFromSpatial(rng.uniformTensor(s), DimSelection::all(s.rank()));
}

SolverConfig quietConfig(std::size_t maxiter) {
    SolverConfig cfg;
    cfg.maxiter = maxiter;
    cfg.logEvery = 0; // no per-iteration records beyond first/last
    return cfg;
}

} // namespace

TEST_CASE("convergence criteria") {
    ConvergenceState state;

    SUBCASE("identical consecutive iterates fire at any tolerance") {
        state.stepRel = 0.0;
        ConvergenceCriterion step{ConvergenceCriterion::Kind::StepRelative, 1e-300, {}};
        CHECK(checkConvergence({step}, state));
    }

    SUBCASE("step ratio 5e-5 fires at tol 1e-4") {
        // x_{k-1} all ones, x_k all (1 + 5e-5): ||dx||/||x|| = 5e-5
        Tensor prev = Tensor::full(Shape{16}, 1.0);
        Tensor curr = Tensor::full(Shape{16}, 1.0 + 5e-5);
        state.stepRel = norm(sub(curr, prev)) / norm(prev);
        CHECK(*state.stepRel == doctest::Approx(5e-5).epsilon(1e-10));
        ConvergenceCriterion step{ConvergenceCriterion::Kind::StepRelative, 1e-4, {}};
        CHECK(checkConvergence({step}, state));
        step.tol = 1e-5;
        CHECK(!checkConvergence({step}, state));
    }

    SUBCASE("combined fires only when every sub-criterion fires") {
        state.stepRel = 1e-6;
        state.costPrev = 1.0;
        state.costCurr = 0.5; // cost still moving
        ConvergenceCriterion combined;
        combined.kind = ConvergenceCriterion::Kind::Combined;
        combined.sub = {{ConvergenceCriterion::Kind::StepRelative, 1e-4, {}},
                        {ConvergenceCriterion::Kind::CostRelative, 1e-4, {}}};
        CHECK(!checkConvergence({combined}, state));
        state.costCurr = 1.0 - 1e-6;
        CHECK(checkConvergence({combined}, state));
    }
}

TEST_CASE("snr in decibels") {
    Rng rng(41);
    Tensor gt = rng.uniformTensor(Shape{32});

    SUBCASE("constructed error with exact power ratio gives 10 dB") {
        Tensor w = rng.uniformTensor(Shape{32});
        w.scaleInPlace(norm(gt) / norm(w));            // ||w|| = ||gt||
        Tensor est = gt;
        est.axpyInPlace(std::pow(10.0, -0.5), w);      // error power = 10^-1 ||gt||^2
        CHECK(computeSnr(est, gt) == doctest::Approx(10.0).epsilon(1e-12));
    }

    SUBCASE("zero estimate scores 0 dB") {
        CHECK(computeSnr(Tensor::zeros(Shape{32}), gt) == doctest::Approx(0.0));
    }

    SUBCASE("doubling the error norm costs about 6.02 dB") {
        Tensor w = rng.uniformTensor(Shape{32});
        Tensor e1 = gt, e2 = gt;
        e1.axpyInPlace(0.1, w);
        e2.axpyInPlace(0.2, w);
        CHECK(computeSnr(e1, gt) - computeSnr(e2, gt) ==
              doctest::Approx(20.0 * std::log10(2.0)).epsilon(1e-12));
    }

    SUBCASE("exact match is the +inf sentinel") {
        CHECK(std::isinf(computeSnr(gt, gt)));
    }
}

TEST_CASE("ADMM sanity and splits") {
    Rng rng(42);

    SUBCASE("single term with T = I converges to the data") {
        Shape s{12};
        Tensor g = rng.uniformTensor(s);
        SplitProblem p;
        p.fn = {makeL2Residual(g)};
        p.hn = {makeIdentity(s)};
        SolverConfig cfg = quietConfig(50);
        cfg.rho = {1.0};
        SolveResult res = runADMM(p, cfg, Tensor::zeros(s));
        CHECK(norm(sub(res.x, g)) <= 1e-8);
        REQUIRE(res.finalPrimalResiduals.size() == 1);
        CHECK(res.finalPrimalResiduals[0] <= 1e-6);
    }

    SUBCASE("lasso matches a long FBS run") {
        Shape s{16, 1};
        Rng r2(43);
        Tensor kernel = r2.uniformTensor(s);
        OpPtr A = makeConvFromSpatial(kernel, DimSelection{0});
        Tensor x_true = Tensor::zeros(s);
        x_true.real()[2] = 1.5;
        x_true.real()[9] = -0.7;
        Tensor b = A->apply(x_true);
        const double lambda = 0.05;

        SplitProblem p;
        p.fn = {makeL2Residual(b), scaleCost(makeMixNorm21(s), lambda)};
        p.hn = {A, makeIdentity(s)};
        SolverConfig cfg = quietConfig(4000);
        cfg.rho = {1.0, 1.0};
        cfg.convergence = {{ConvergenceCriterion::Kind::StepRelative, 1e-12, {}}};
        SolveResult admm = runADMM(p, cfg, Tensor::zeros(s));

        // reference: plain forward-backward, many iterations
        CostPtr f0 = composeCost(makeL2Residual(b), A);
        CostPtr g = scaleCost(makeMixNorm21(s), lambda);
        SolverConfig fbsCfg = quietConfig(100000);
        const double L = estimateNorm(A).value;
        fbsCfg.gamma = 1.0 / (L * L);
        fbsCfg.fista = false;
        SolveResult fbs = runFBS(f0, g, fbsCfg, Tensor::zeros(s));

        CHECK(norm(sub(admm.x, fbs.x)) <= 1e-6 * std::max(1.0, norm(fbs.x)));
        for (double r : admm.finalPrimalResiduals) CHECK(r <= 1e-6);
    }
}

TEST_CASE("primal-dual sanity and feasibility") {
    Rng rng(44);
    Shape s{12};
    Tensor g = rng.uniformTensor(s);

    SUBCASE("matches the ADMM single-term minimizer") {
        SplitProblem p;
        p.fn = {makeL2Residual(g)};
        p.hn = {makeIdentity(s)};
        SolverConfig cfg = quietConfig(400);
        cfg.tau = 1.0; // sigma defaults to 1/(tau * norm) = 1
        SolveResult res = runPrimalDual(p, cfg, Tensor::zeros(s));
        CHECK(norm(sub(res.x, g)) <= 1e-7);
    }

    SUBCASE("feasibility boundary") {
        SplitProblem p;
        p.fn = {makeL2Residual(g)};
        p.hn = {makeIdentity(s)}; // ||T^T T|| = 1
        SolverConfig cfg = quietConfig(3);
        cfg.tau = 1.0;
        cfg.sigma = 1.0 + 1e-6;
        CHECK_THROWS_AS(runPrimalDual(p, cfg, Tensor::zeros(s)), NumericalError);
        cfg.sigma = 1.0 - 1e-6;
        CHECK_NOTHROW(runPrimalDual(p, cfg, Tensor::zeros(s)));
        cfg.sigma.reset(); // the script default tau*sigma*norm == 1 is accepted
        CHECK_NOTHROW(runPrimalDual(p, cfg, Tensor::zeros(s)));
    }
}

TEST_CASE("primal-dual with populated smooth and plain-prox terms") {
    Rng rng(50);
    Shape s{12, 1};

    SUBCASE("smooth term F0: lasso solved with the data term out of the splitting") {
        Tensor kernel = rng.uniformTensor(s);
        OpPtr A = makeConvFromSpatial(kernel, DimSelection{0});
        Tensor b = rng.uniformTensor(s);
        const double lambda = 0.08;

        SplitProblem p;
        p.f0 = composeCost(makeL2Residual(b), A); // handled by its gradient
        p.fn = {scaleCost(makeMixNorm21(s), lambda)};
        p.hn = {makeIdentity(s)};
        SolverConfig cfg = quietConfig(20000);
        // 1/tau - sigma ||T^T T|| >= beta/2 with beta = ||A||^2
        const double beta = std::pow(estimateNorm(A).value, 2.0);
        cfg.tau = 1.0 / (1.0 + beta);
        cfg.sigma = 1.0;
        SolveResult pd = runPrimalDual(p, cfg, Tensor::zeros(s));

        CostPtr f0 = composeCost(makeL2Residual(b), A);
        CostPtr g = scaleCost(makeMixNorm21(s), lambda);
        SolverConfig fbsCfg = quietConfig(100000);
        fbsCfg.gamma = 1.0 / beta;
        fbsCfg.fista = false;
        SolveResult fbs = runFBS(f0, g, fbsCfg, Tensor::zeros(s));
        CHECK(norm(sub(pd.x, fbs.x)) <= 1e-6 * std::max(1.0, norm(fbs.x)));
    }

    SUBCASE("plain-prox term G: nonnegativity handled in the primal step") {
        Tensor a = rng.uniformTensor(s);
        SplitProblem p;
        p.f0 = makeL2Residual(a);
        p.g = makeNonNeg(s);
        p.fn = {scaleCost(makeMixNorm21(s), 0.05)};
        p.hn = {makeIdentity(s)};
        SolverConfig cfg = quietConfig(20000);
        cfg.tau = 0.5;
        cfg.sigma = 1.0;
        SolveResult pd = runPrimalDual(p, cfg, Tensor::zeros(s));

        SolverConfig fbsCfg = quietConfig(100000);
        fbsCfg.gamma = 0.9;
        fbsCfg.fista = false;
        // reference solves the same objective with the prox terms merged:
        // min 1/2||x-a||^2 + 0.05 ||x||_1 s.t. x >= 0 — separable closed form
        Tensor want = Tensor::zeros(s);
        for (std::size_t i = 0; i < want.size(); ++i)
            want.real()[i] = std::max(0.0, a.real()[i] - 0.05);
        CHECK(norm(sub(pd.x, want)) <= 1e-6 * std::max(1.0, norm(want)));
        double lo = 0.0;
        for (double v : pd.x.real()) lo = std::min(lo, v);
        CHECK(lo >= 0.0); // the prox of G is the last primal operation
    }
}

TEST_CASE("forward-backward splitting") {
    Rng rng(45);

    SUBCASE("quadratic with unit step converges in one iteration") {
        Shape s{9};
        Tensor a = rng.uniformTensor(s);
        CostPtr f0 = makeL2Residual(a);
        SolverConfig cfg = quietConfig(1);
        cfg.gamma = 1.0;
        cfg.fista = false;
        SolveResult res = runFBS(f0, nullptr, cfg, Tensor::zeros(s));
        CHECK(norm(sub(res.x, a)) <= 1e-14);
    }

    SUBCASE("nonnegative least squares matches a projected-gradient long run") {
        Shape s{8, 8};
        OpPtr A = randomConv(s, rng);
        Tensor b = rng.uniformTensor(s);
        CostPtr f0 = composeCost(makeL2Residual(b), A);
        CostPtr g = makeNonNeg(s);
        const double L = std::pow(estimateNorm(A).value, 2.0);

        SolverConfig cfg = quietConfig(20000);
        cfg.gamma = 1.0 / L;
        cfg.fista = true;
        SolveResult fista = runFBS(f0, g, cfg, Tensor::zeros(s));

        // oracle: plain projected gradient, 1e5 iterations
        Tensor x = Tensor::zeros(s);
        for (int it = 0; it < 100000; ++it) {
            x.axpyInPlace(-1.0 / L, f0->gradient(x));
            x = max0(x);
        }
        CHECK(norm(sub(fista.x, x)) <= 1e-6 * std::max(1.0, norm(x)));
    }

    SUBCASE("cost is monotone without momentum on a convex problem") {
        Shape s{6, 6};
        OpPtr A = randomConv(s, rng);
        Tensor b = rng.uniformTensor(s);
        CostPtr f0 = composeCost(makeL2Residual(b), A);
        SolverConfig cfg = quietConfig(200);
        cfg.logEvery = 1;
        cfg.gamma = 0.9 / std::pow(estimateNorm(A).value, 2.0);
        cfg.fista = false;
        SolveResult res = runFBS(f0, makeNonNeg(s), cfg, Tensor::zeros(s));
        for (std::size_t i = 1; i < res.log.records.size(); ++i) {
            REQUIRE(res.log.records[i].cost.has_value());
            CHECK(*res.log.records[i].cost <= *res.log.records[i - 1].cost + 1e-12);
        }
    }
}

TEST_CASE("VMLMB") {
    Rng rng(46);

    SUBCASE("unconstrained quadratic reaches tiny gradients quickly") {
        Shape s{10};
        Tensor a = rng.uniformTensor(s);
        Tensor weights = add(rng.uniformTensor(s), 2.0); // spd diagonal
        OpPtr D = makeDiag(weights);
        CostPtr j = composeCost(makeL2Residual(D->apply(a)), D);
        SolverConfig cfg = quietConfig(50);
        cfg.convergence = {{ConvergenceCriterion::Kind::StepRelative, 1e-14, {}}};
        SolveResult res = runVMLMB(j, cfg, Tensor::zeros(s));
        CHECK(norm(j->gradient(res.x)) <= 1e-8);
        CHECK(norm(sub(res.x, a)) <= 1e-7);
    }

    SUBCASE("bound-constrained quadratic matches the KKT solution") {
        // min 1/2||x - a||^2 s.t. x >= 0: solution max(a, 0), KKT multipliers
        // on the negative entries of a.
        Shape s{12};
        Tensor a = rng.uniformTensor(s);
        CostPtr j = makeL2Residual(a);
        SolverConfig cfg = quietConfig(100);
        cfg.lowerBound = 0.0;
        SolveResult res = runVMLMB(j, cfg, Tensor::zeros(s));
        Tensor want = max0(a);
        CHECK(norm(sub(res.x, want)) <= 1e-10);
        // active set: gradient positive where pinned, zero elsewhere
        Tensor grad = j->gradient(res.x);
        for (std::size_t i = 0; i < 12; ++i) {
            if (a.real()[i] < 0.0)
                CHECK(grad.real()[i] > 0.0);
            else
                CHECK(std::abs(grad.real()[i]) <= 1e-10);
        }
    }

    SUBCASE("line-search failure returns the best iterate with a warning") {
        // curvature ~1e30: Armijo cannot succeed within 30 backtracks
        Shape s{4};
        Tensor a = rng.uniformTensor(s);
        CostPtr j = scaleCost(makeL2Residual(a), 1e30);
        SolverConfig cfg = quietConfig(10);
        SolveResult res = runVMLMB(j, cfg, Tensor::zeros(s));
        CHECK(res.log.lineSearchWarning);
        CHECK(norm(res.x) == 0.0); // never left the (best) initial iterate
    }

    SUBCASE("general bound-constrained quadratic against a dense KKT solve") {
        Shape s{6};
        Rng r2(47);
        Tensor a = r2.uniformTensor(s);
        Tensor w = add(r2.uniformTensor(s), 1.5);
        OpPtr D = makeDiag(w);
        CostPtr j = composeCost(makeL2Residual(D->apply(a)), D); // 1/2||D(x-a)||^2
        SolverConfig cfg = quietConfig(200);
        cfg.lowerBound = 0.1;
        SolveResult res = runVMLMB(j, cfg, Tensor::zeros(s));
        // separable problem: x_i = max(a_i, 0.1)
        for (std::size_t i = 0; i < 6; ++i)
            CHECK(res.x.real()[i] ==
                  doctest::Approx(std::max(a.real()[i], 0.1)).epsilon(1e-8));
    }
}

TEST_CASE("all four solvers agree on a strongly convex toy problem") {
    Rng rng(48);
    Shape s{8, 8};
    OpPtr A = randomConv(s, rng);
    Tensor b = rng.uniformTensor(s);
    Tensor c = rng.uniformTensor(s);
    const double mu = 0.5;
    // J(x) = 1/2||A x - b||^2 + mu/2 ||x - c||^2

    SplitProblem p;
    p.fn = {makeL2Residual(b), scaleCost(makeL2Residual(c), mu)};
    p.hn = {A, makeIdentity(s)};
    const Tensor x0 = Tensor::full(s, 0.5);

    SolverConfig admmCfg = quietConfig(2000);
    admmCfg.rho = {1.0, 1.0};
    admmCfg.convergence = {{ConvergenceCriterion::Kind::StepRelative, 1e-13, {}}};
    Tensor xAdmm = runADMM(p, admmCfg, x0).x;

    SolverConfig pdCfg = quietConfig(20000);
    pdCfg.tau = 0.5;
    pdCfg.convergence = {{ConvergenceCriterion::Kind::StepRelative, 1e-13, {}}};
    Tensor xPd = runPrimalDual(p, pdCfg, x0).x;

    CostPtr smooth = addCost(composeCost(makeL2Residual(b), A),
                             scaleCost(makeL2Residual(c), mu));
    SolverConfig fbsCfg = quietConfig(50000);
    fbsCfg.gamma = 1.0 / (std::pow(estimateNorm(A).value, 2.0) + mu);
    fbsCfg.fista = true;
    fbsCfg.convergence = {{ConvergenceCriterion::Kind::StepRelative, 1e-13, {}}};
    Tensor xFbs = runFBS(smooth, nullptr, fbsCfg, x0).x;

    SolverConfig vmCfg = quietConfig(2000);
    vmCfg.convergence = {{ConvergenceCriterion::Kind::StepRelative, 1e-13, {}}};
    Tensor xVm = runVMLMB(smooth, vmCfg, x0).x;

    const double scale = std::max(1.0, norm(xAdmm));
    CHECK(norm(sub(xPd, xAdmm)) <= 1e-6 * scale);
    CHECK(norm(sub(xFbs, xAdmm)) <= 1e-6 * scale);
    CHECK(norm(sub(xVm, xAdmm)) <= 1e-6 * scale);
}

TEST_CASE("solver runs are deterministic") {
    Rng rng(49);
    Shape s{10};
    Tensor g = rng.uniformTensor(s);
    SplitProblem p;
    p.fn = {makeL2Residual(g), scaleCost(makeMixNorm21(Shape{10, 1}), 0.1)};
    p.hn = {makeIdentity(s), makeGrad(s, DimSelection{0})};
    // grad of a 1-D signal has sizeout {10,1}
    SolverConfig cfg = quietConfig(100);
    cfg.logEvery = 10;
    cfg.rho = {1.0, 1.0};

    SolveResult a = runADMM(p, cfg, Tensor::zeros(s));
    SolveResult b = runADMM(p, cfg, Tensor::zeros(s));
    CHECK(norm(sub(a.x, b.x)) == 0.0);
    REQUIRE(a.log.records.size() == b.log.records.size());
    for (std::size_t i = 0; i < a.log.records.size(); ++i) {
        // identical numeric content; wall-clock seconds excluded
        CHECK(a.log.records[i].iteration == b.log.records[i].iteration);
        CHECK(a.log.records[i].cost == b.log.records[i].cost);
        CHECK(a.log.records[i].stepRel == b.log.records[i].stepRel);
    }
}

TEST_CASE("iteration log CSV format") {
    IterationLog log;
    log.records.push_back({0, 1.5, std::nullopt, std::nullopt, 0.0});
    log.records.push_back({10, 0.75, 1e-3, 12.5, 0.125});
    const std::string csv = log.toCsv();
    CHECK(csv.rfind("iteration,cost,step_rel,snr_db,seconds\n", 0) == 0);
    CHECK(csv.find("\n0,1.5,,,") != std::string::npos);
    CHECK(csv.find("\n10,0.75,0.001,12.5,") != std::string::npos);
}
