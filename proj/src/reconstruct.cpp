#include "invop/reconstruct.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "invop/linops.hpp"

namespace invop {

Regularizer regularizerFromName(const std::string& name) {
    if (name == "TV" || name == "tv") return Regularizer::TV;
    if (name == "HS" || name == "hs") return Regularizer::HS;
    if (name == "STV" || name == "stv" || name == "S-TV") return Regularizer::STV;
    if (name == "GR" || name == "gr") return Regularizer::GR;
    throw ConfigError("unknown regularizer '" + name + "' (expected TV, HS, STV or GR)");
}

const char* regularizerName(Regularizer r) {
    switch (r) {
        case Regularizer::TV: return "TV";
        case Regularizer::HS: return "HS";
        case Regularizer::STV: return "STV";
        case Regularizer::GR: return "GR";
    }
    return "?";
}

namespace {

bool proxSolver(SolverAlgorithm a) {
    return a == SolverAlgorithm::ADMM || a == SolverAlgorithm::PrimalDualCondat;
}

} // namespace

ReconResult reconstruct(const ReconSpec& spec, const Tensor& data, const Tensor& otfStack,
                        const GroundTruthRef* gt) {
    if (spec.lambda <= 0.0) throw ConfigError("reconstruct: lambda must be positive");
    const Shape& pad = spec.padShape;
    if (otfStack.shape() != pad)
        throw ShapeError("reconstruct: OTF stack must live on the reconstruction grid");

    const bool smoothReg =
        spec.regularizer == Regularizer::STV || spec.regularizer == Regularizer::GR;
    if (smoothReg == proxSolver(spec.solver.algorithm))
        throw ConfigError(std::string("reconstruct: ") + regularizerName(spec.regularizer) +
                          (smoothReg ? " needs a gradient solver (FBS or VMLMB)"
                                     : " needs a proximal solver (ADMM or primal-dual)"));

    const DimSelection convDims{0, 1};
    OpPtr H = makeConvFromMtf(otfStack, convDims, true);
    OpPtr S = makeSelectorPatch(pad, spec.fovCorner, data.shape().dims());
    CostPtr l2 = makeL2Residual(data);

    Monitor mon;
    OpPtr gtSel;
    if (gt) {
        gtSel = makeSelectorPatch(pad, gt->corner, gt->image.shape().dims());
        mon.snr = [gtSel, gt](const Tensor& x) { return computeSnr(gtSel->apply(x), gt->image); };
    }

    Tensor x0 = S->applyAdjoint(data);
    SolveResult solved;
    SplitProblem split; // kept for final-cost evaluation of the prox solvers

    switch (spec.regularizer) {
        case Regularizer::TV:
        case Regularizer::HS: {
            OpPtr L = spec.regularizer == Regularizer::TV ? makeGrad(pad, convDims)
                                                          : makeHess(pad, convDims);
            CostPtr R = spec.regularizer == Regularizer::TV
                            ? makeMixNorm21(L->sizeout())
                            : makeMixNormSchatt1(L->sizeout(), 1.0);
            split.fn = {composeCost(l2, S), scaleCost(R, spec.lambda), makeNonNeg(pad)};
            split.hn = {H, L, makeIdentity(pad)};
            solved = spec.solver.algorithm == SolverAlgorithm::ADMM
                         ? runADMM(split, spec.solver, x0, mon)
                         : runPrimalDual(split, spec.solver, x0, mon);
            break;
        }
        case Regularizer::STV:
        case Regularizer::GR: {
            OpPtr L = makeGrad(pad, convDims);
            CostPtr RL;
            if (spec.regularizer == Regularizer::STV) {
                const double eps = spec.epsilon > 0.0 ? spec.epsilon : 1e-7;
                RL = composeCost(makeHyperbolic(L->sizeout(), eps), L);
            } else {
                const double eps = spec.epsilon > 0.0 ? spec.epsilon : 1e-2;
                RL = makeGoodRoughness(L, eps);
            }
            CostPtr obj = addCost(composeCost(l2, compose(S, H)), scaleCost(RL, spec.lambda));
            if (spec.solver.algorithm == SolverAlgorithm::FBS) {
                solved = runFBS(obj, makeNonNeg(pad), spec.solver, x0, mon);
            } else {
                SolverConfig cfg = spec.solver;
                if (!cfg.lowerBound && !cfg.lowerBoundTensor) cfg.lowerBound = 0.0;
                solved = runVMLMB(obj, cfg, x0, mon);
            }
            split.f0 = obj;
            break;
        }
    }

    ReconResult out;
    out.estimate = std::move(solved.x);
    out.log = std::move(solved.log);
    out.finalCost = split.f0 ? split.f0->evaluate(out.estimate)
                             : splitObjectiveFinite(split, out.estimate);
    if (gt) out.snrDb = computeSnr(gtSel->apply(out.estimate), gt->image);
    return out;
}

std::string SweepResult::toCsv() const {
    std::ostringstream os;
    os.precision(17);
    os << "lambda,snr_db\n";
    for (const auto& p : points) os << p.lambda << "," << p.snrDb << "\n";
    return os.str();
}

std::size_t resolveThreadCount(std::size_t requested, std::size_t jobs) {
    std::size_t n = requested;
    if (n == 0) {
        if (const char* env = std::getenv("INVOP_THREADS")) {
            const long v = std::atol(env);
            if (v > 0) n = static_cast<std::size_t>(v);
        }
    }
    if (n == 0) n = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    return std::max<std::size_t>(1, std::min(n, jobs));
}

SweepResult sweepLambda(const ReconSpec& tmpl, const std::vector<double>& lambdas,
                        const Tensor& data, const Tensor& otfStack, const GroundTruthRef& gt,
                        std::size_t threads) {
    if (lambdas.empty()) throw ConfigError("sweepLambda: empty lambda list");
    std::vector<double> sorted = lambdas;
    std::sort(sorted.begin(), sorted.end());

    SweepResult result;
    result.points.resize(sorted.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string firstError;
    std::mutex errMu;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= sorted.size() || failed.load()) return;
            try {
                ReconSpec spec = tmpl;
                spec.lambda = sorted[i];
                ReconResult r = reconstruct(spec, data, otfStack, &gt);
                result.points[i] = {sorted[i], r.snrDb.value_or(0.0)};
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(errMu);
                if (!failed.exchange(true)) firstError = e.what();
            }
        }
    };

    const std::size_t nThreads = resolveThreadCount(threads, sorted.size());
    std::vector<std::thread> pool;
    pool.reserve(nThreads);
    for (std::size_t t = 0; t < nThreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failed.load()) throw NumericalError("sweepLambda: " + firstError);

    for (std::size_t i = 1; i < result.points.size(); ++i)
        if (result.points[i].snrDb > result.points[result.bestIndex].snrDb) result.bestIndex = i;
    return result;
}

} // namespace invop
