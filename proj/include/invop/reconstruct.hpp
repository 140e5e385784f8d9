#pragma once

#include <filesystem>

#include "invop/solvers.hpp"

namespace invop {

enum class Regularizer { TV, HS, STV, GR };

Regularizer regularizerFromName(const std::string& name);
const char* regularizerName(Regularizer r);

/// One multichannel deconvolution run: data term 1/2||S H f - g||^2 per
/// channel, regularizer R(L f) and a nonnegativity constraint. TV and HS are
/// handled by the proximal solvers (ADMM, primal-dual); their smoothed
/// counterparts S-TV and GR by the gradient solvers (FBS, VMLMB).
struct ReconSpec {
    Regularizer regularizer = Regularizer::TV;
    double lambda = 5e-3;
    double epsilon = 0.0; // 0: kind-specific default (1e-7 S-TV, 1e-2 GR)
    SolverConfig solver;
    Shape padShape;                      // reconstruction grid
    std::vector<std::size_t> fovCorner;  // 0-based position of the data window
};

struct ReconResult {
    Tensor estimate; // on the padded grid
    IterationLog log;
    double finalCost = 0.0;
    std::optional<double> snrDb; // vs ground truth when provided
};

/// Optional scoring reference: ground truth plus its position in the padded
/// grid (the SNR is computed on the ground-truth support region).
struct GroundTruthRef {
    Tensor image;
    std::vector<std::size_t> corner;
};

ReconResult reconstruct(const ReconSpec& spec, const Tensor& data, const Tensor& otfStack,
                        const GroundTruthRef* gt = nullptr);

struct SweepPoint {
    double lambda = 0.0;
    double snrDb = 0.0;
};

struct SweepResult {
    std::vector<SweepPoint> points; // sorted by lambda
    std::size_t bestIndex = 0;
    std::string toCsv() const; // header: lambda,snr_db
};

/// One reconstruction per lambda (worker pool capped by `threads`, falling
/// back to INVOP_THREADS, then hardware concurrency). Results are
/// deterministic regardless of the pool size.
SweepResult sweepLambda(const ReconSpec& tmpl, const std::vector<double>& lambdas,
                        const Tensor& data, const Tensor& otfStack, const GroundTruthRef& gt,
                        std::size_t threads = 0);

/// Number of sweep workers honoring the explicit override and INVOP_THREADS.
std::size_t resolveThreadCount(std::size_t requested, std::size_t jobs);

} // namespace invop
