#include "invop/json_build.hpp"

#include "invop/linops.hpp"
#include "invop/tensor_io.hpp"

namespace invop {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw ConfigError("config: " + what); }

Shape shapeOf(const json& j, const char* key) {
    if (!j.contains(key)) bad(std::string("missing '") + key + "'");
    return Shape(j.at(key).get<std::vector<std::size_t>>());
}

DimSelection dimsOf(const json& j, const char* key) {
    if (!j.contains(key)) bad(std::string("missing '") + key + "'");
    return DimSelection::fromOneBased(j.at(key).get<std::vector<long long>>());
}

// 1-based inclusive corner -> 0-based
std::vector<std::size_t> cornerOf(const json& j, const char* key) {
    auto v = j.at(key).get<std::vector<long long>>();
    std::vector<std::size_t> out;
    out.reserve(v.size());
    for (long long c : v) {
        if (c < 1) bad("corners are 1-based, got " + std::to_string(c));
        out.push_back(static_cast<std::size_t>(c - 1));
    }
    return out;
}

std::filesystem::path resolve(const std::filesystem::path& baseDir, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : baseDir / path;
}

} // namespace

OpPtr buildOp(const json& j, const std::filesystem::path& baseDir) {
    if (!j.is_object() || j.size() != 1) bad("operator node must be a single-key object");
    const std::string key = j.begin().key();
    const json& v = j.begin().value();

    if (key == "identity") return makeIdentity(shapeOf(v, "shape"));
    if (key == "ewsqrt") return makeEWSqrt(shapeOf(v, "shape"));
    if (key == "conv") {
        Tensor kernel = readTensor(resolve(baseDir, v.at("kernelFile").get<std::string>()));
        DimSelection dims = dimsOf(v, "dims");
        const std::string domain = v.value("domain", "mtf");
        if (domain == "spatial") return makeConvFromSpatial(kernel, dims);
        if (domain != "mtf") bad("conv domain must be 'mtf' or 'spatial'");
        return makeConvFromMtf(std::move(kernel), dims, v.value("real", true));
    }
    if (key == "diag") {
        if (v.contains("file")) return makeDiag(readTensor(resolve(baseDir, v.at("file"))));
        return makeScaledIdentity(shapeOf(v, "shape"), v.at("value").get<double>());
    }
    if (key == "grad") return makeGrad(shapeOf(v, "shape"), dimsOf(v, "dims"));
    if (key == "hess") return makeHess(shapeOf(v, "shape"), dimsOf(v, "dims"));
    if (key == "downsample")
        return makeDownsample(shapeOf(v, "shape"),
                              v.at("factors").get<std::vector<std::size_t>>());
    if (key == "selector")
        return makeSelectorPatch(shapeOf(v, "shape"), cornerOf(v, "corner"),
                                 v.at("size").get<std::vector<std::size_t>>());
    if (key == "sumpatches")
        return makeSumPatches(shapeOf(v, "shape"), v.at("patch").get<std::vector<std::size_t>>());
    if (key == "compose") {
        if (!v.is_array() || v.empty()) bad("compose expects a non-empty array");
        OpPtr acc = buildOp(v.back(), baseDir);
        for (std::size_t i = v.size() - 1; i-- > 0;) acc = compose(buildOp(v[i], baseDir), acc);
        return acc;
    }
    if (key == "sum") {
        if (!v.is_array() || v.empty()) bad("sum expects a non-empty array");
        OpPtr acc = buildOp(v[0], baseDir);
        for (std::size_t i = 1; i < v.size(); ++i) acc = addOp(acc, buildOp(v[i], baseDir));
        return acc;
    }
    if (key == "adjoint") return adjointOf(buildOp(v, baseDir));
    if (key == "scale") return scaleOf(buildOp(v.at("op"), baseDir), v.at("c").get<double>());
    if (key == "power")
        return powerOf(buildOp(v.at("op"), baseDir), v.at("k").get<long>());
    bad("unknown operator kind '" + key + "'");
}

namespace {

std::optional<std::size_t> groupDimOf(const json& v) {
    if (!v.contains("groupDim")) return std::nullopt;
    const long long g = v.at("groupDim").get<long long>();
    if (g < 1) bad("groupDim is 1-based");
    return static_cast<std::size_t>(g - 1);
}

CostPtr withInner(CostPtr c, const json& v, const std::filesystem::path& baseDir) {
    if (!v.contains("inner")) return c;
    return composeCost(std::move(c), buildOp(v.at("inner"), baseDir));
}

} // namespace

CostPtr buildCost(const json& j, const std::filesystem::path& baseDir) {
    if (!j.is_object() || j.size() != 1) bad("cost node must be a single-key object");
    const std::string key = j.begin().key();
    const json& v = j.begin().value();

    if (key == "l2") {
        Tensor g = readTensor(resolve(baseDir, v.at("dataFile").get<std::string>()));
        return withInner(makeL2Residual(std::move(g)), v, baseDir);
    }
    if (key == "nonneg") return makeNonNeg(shapeOf(v, "shape"));
    if (key == "mixnorm21")
        return withInner(makeMixNorm21(shapeOf(v, "shape"), groupDimOf(v)), v, baseDir);
    if (key == "schatten")
        return withInner(makeMixNormSchatt1(shapeOf(v, "shape"), v.value("p", 1.0), groupDimOf(v)),
                         v, baseDir);
    if (key == "hyperbolic")
        return withInner(
            makeHyperbolic(shapeOf(v, "shape"), v.value("epsilon", 1e-7), groupDimOf(v)), v,
            baseDir);
    if (key == "goodroughness")
        return makeGoodRoughness(makeGrad(shapeOf(v, "shape"), dimsOf(v, "dims")),
                                 v.value("epsilon", 1e-2));
    if (key == "sum") {
        if (!v.is_array() || v.size() < 2) bad("cost sum expects at least two terms");
        CostPtr acc = buildCost(v[0], baseDir);
        for (std::size_t i = 1; i < v.size(); ++i) acc = addCost(acc, buildCost(v[i], baseDir));
        return acc;
    }
    if (key == "scale")
        return scaleCost(buildCost(v.at("cost"), baseDir), v.at("lambda").get<double>());
    bad("unknown cost kind '" + key + "'");
}

SolverConfig buildSolverConfig(const json& j) {
    SolverConfig cfg;
    const std::string algo = j.value("algorithm", "ADMM");
    if (algo == "ADMM")
        cfg.algorithm = SolverAlgorithm::ADMM;
    else if (algo == "PD" || algo == "PrimalDual" || algo == "PrimalDualCondat")
        cfg.algorithm = SolverAlgorithm::PrimalDualCondat;
    else if (algo == "FBS" || algo == "FISTA")
        cfg.algorithm = SolverAlgorithm::FBS;
    else if (algo == "VMLMB")
        cfg.algorithm = SolverAlgorithm::VMLMB;
    else
        bad("unknown algorithm '" + algo + "'");

    cfg.maxiter = j.value("maxiter", std::size_t(500));
    cfg.logEvery = j.value("logEvery", std::size_t(50));

    if (j.contains("convergence")) {
        std::function<ConvergenceCriterion(const json&)> parse = [&](const json& c) {
            ConvergenceCriterion crit;
            const std::string kind = c.at("kind").get<std::string>();
            if (kind == "step")
                crit.kind = ConvergenceCriterion::Kind::StepRelative;
            else if (kind == "cost")
                crit.kind = ConvergenceCriterion::Kind::CostRelative;
            else if (kind == "combined") {
                crit.kind = ConvergenceCriterion::Kind::Combined;
                for (const auto& s : c.at("sub")) crit.sub.push_back(parse(s));
                return crit;
            } else
                bad("unknown convergence kind '" + kind + "'");
            crit.tol = c.at("tol").get<double>();
            if (crit.tol <= 0.0) bad("convergence tolerance must be positive");
            return crit;
        };
        for (const auto& c : j.at("convergence")) cfg.convergence.push_back(parse(c));
    }

    if (j.contains("rho")) {
        if (j.at("rho").is_array())
            cfg.rho = j.at("rho").get<std::vector<double>>();
        else
            cfg.rho = {j.at("rho").get<double>()};
    }
    if (j.contains("cg")) {
        cfg.cg.tol = j.at("cg").value("tol", 1e-10);
        cfg.cg.maxit = j.at("cg").value("maxit", std::size_t(200));
    }
    cfg.tau = j.value("tau", 1.0);
    if (j.contains("sigma") && !j.at("sigma").is_null()) cfg.sigma = j.at("sigma").get<double>();
    cfg.relaxation = j.value("relaxation", 1.0);
    cfg.gamma = j.value("gamma", 5e-2);
    cfg.fista = j.value("fista", true);
    cfg.memory = j.value("memory", std::size_t(5));
    if (j.contains("lowerBound") && !j.at("lowerBound").is_null())
        cfg.lowerBound = j.at("lowerBound").get<double>();
    return cfg;
}

} // namespace invop
