#pragma once

#include <filesystem>

#include <json.hpp>

#include "invop/reconstruct.hpp"

namespace invop {

/// Operator graphs from a JSON expression tree, e.g.
///   {"compose":[{"selector":{...}},{"conv":{"kernelFile":"...","dims":[1,2]}}]}
/// All dimensions, corners and indices in these configs are 1-based.
/// File paths are resolved relative to baseDir.
OpPtr buildOp(const nlohmann::json& j, const std::filesystem::path& baseDir);

/// Cost expressions, e.g.
///   {"sum":[{"l2":{"dataFile":"...","inner":<op>}},
///           {"scale":{"lambda":5e-3,"cost":{"mixnorm21":{...}}}}]}
CostPtr buildCost(const nlohmann::json& j, const std::filesystem::path& baseDir);

SolverConfig buildSolverConfig(const nlohmann::json& j);

} // namespace invop
