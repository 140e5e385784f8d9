#pragma once

#include <functional>
#include <optional>
#include <string>

#include "invop/cost.hpp"

namespace invop {

enum class SolverAlgorithm { ADMM, PrimalDualCondat, FBS, VMLMB };

struct ConvergenceCriterion {
    enum class Kind { StepRelative, CostRelative, Combined };
    Kind kind = Kind::StepRelative;
    double tol = 1e-4;
    std::vector<ConvergenceCriterion> sub; // Combined only
};

struct CgOptions {
    double tol = 1e-10;
    std::size_t maxit = 200;
};

struct SolverConfig {
    SolverAlgorithm algorithm = SolverAlgorithm::ADMM;
    std::size_t maxiter = 500;
    std::size_t logEvery = 50; // "ItUpOut"
    std::vector<ConvergenceCriterion> convergence;

    // ADMM
    std::vector<double> rho; // one per split term (a single value broadcasts)
    CgOptions cg;

    // Primal-dual (Condat)
    double tau = 1.0;
    std::optional<double> sigma; // default 1 / (tau * ||sum T_p^T T_p||)
    double relaxation = 1.0;

    // FBS
    double gamma = 5e-2;
    bool fista = true;

    // VMLMB
    std::size_t memory = 5;
    std::optional<double> lowerBound;
    std::optional<Tensor> lowerBoundTensor;
};

struct IterationRecord {
    std::size_t iteration = 0;
    std::optional<double> cost;
    std::optional<double> stepRel;
    std::optional<double> snrDb;
    double seconds = 0.0;
};

struct IterationLog {
    std::vector<IterationRecord> records;
    bool lineSearchWarning = false;
    std::string toCsv() const; // header: iteration,cost,step_rel,snr_db,seconds
};

/// J = sum_p J_p(T_p x) plus an optional smooth term F0 and an optional
/// plain-prox term G (both used by the primal-dual solver; FBS takes F0/G
/// directly).
struct SplitProblem {
    std::vector<CostPtr> fn;
    std::vector<OpPtr> hn;
    CostPtr f0;
    CostPtr g;
};

struct SolveResult {
    Tensor x;
    IterationLog log;
    std::vector<double> finalPrimalResiduals; // ADMM: ||T_p x - z_p|| per term
};

/// Optional per-iteration scoring against a reference (SNR column).
using SnrFn = std::function<double(const Tensor&)>;

struct Monitor {
    SnrFn snr; // empty: no SNR column
};

SolveResult runADMM(const SplitProblem& p, const SolverConfig& cfg, const Tensor& x0,
                    const Monitor& mon = {});
SolveResult runPrimalDual(const SplitProblem& p, const SolverConfig& cfg, const Tensor& x0,
                          const Monitor& mon = {});
SolveResult runFBS(const CostPtr& f0, const CostPtr& g, const SolverConfig& cfg, const Tensor& x0,
                   const Monitor& mon = {});
SolveResult runVMLMB(const CostPtr& j, const SolverConfig& cfg, const Tensor& x0,
                     const Monitor& mon = {});

struct ConvergenceState {
    std::optional<double> stepRel;
    std::optional<double> costPrev;
    std::optional<double> costCurr;
};

/// True when every criterion in the list fires for the given state.
bool checkConvergence(const std::vector<ConvergenceCriterion>& criteria,
                      const ConvergenceState& state);

/// 10 log10(||gt||^2 / ||gt - est||^2); +inf when est == gt exactly.
double computeSnr(const Tensor& est, const Tensor& gt);

/// Objective of a split problem with indicator terms omitted, so logged
/// cost curves stay finite while iterates are slightly infeasible.
double splitObjectiveFinite(const SplitProblem& p, const Tensor& x);

} // namespace invop
