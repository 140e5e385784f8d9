// invop: composable inverse-problem toolkit CLI.
// Subcommands: psf, simulate, reconstruct, sweep-lambda, info.

#include <complex>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "invop/fft.hpp"
#include "invop/json_build.hpp"
#include "invop/linops.hpp"
#include "invop/psf.hpp"
#include "invop/simulate.hpp"
#include "invop/tensor_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json loadConfig(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw invop::ConfigError("cannot open config file " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw invop::ConfigError("bad JSON in " + path + ": " + e.what());
    }
    return j;
}

invop::PsfSpec psfSpecFrom(const json& j) {
    invop::PsfSpec spec;
    spec.na = j.value("na", 1.4);
    spec.pixelNm = j.value("pixel_nm", 64.5);
    if (j.contains("wavelengths_nm"))
        spec.wavelengthsNm = j.at("wavelengths_nm").get<std::vector<double>>();
    spec.gridShape = invop::Shape(j.at("grid").get<std::vector<std::size_t>>());
    return spec;
}

fs::path outPath(const json& j, const char* key, const std::string& fallback,
                 const fs::path& baseDir, const std::string& outOverride) {
    if (!outOverride.empty()) return fs::path(outOverride + "_" + fallback);
    if (j.contains("out") && j.at("out").contains(key))
        return baseDir / j.at("out").at(key).get<std::string>();
    return baseDir / fallback;
}

int cmdPsf(const json& cfg, const fs::path& baseDir, const std::string& outOverride) {
    invop::PsfSpec spec = psfSpecFrom(cfg);
    invop::Tensor stack = invop::stackOtfs(spec);
    invop::Tensor spatial =
        invop::idft(stack, invop::DimSelection{0, 1}).realPart();

    const fs::path otfFile = outPath(cfg, "otfFile", "otf.invt", baseDir, outOverride);
    const fs::path psfFile = outPath(cfg, "psfFile", "psf.invt", baseDir, outOverride);
    invop::writeTensor(otfFile, stack);
    invop::writeTensor(psfFile, spatial);
    std::cout << "psf: wrote OTF " << otfFile.string() << " and spatial PSF " << psfFile.string()
              << " on grid " << spec.gridShape.str() << "\n";
    return 0;
}

invop::Tensor loadOtfStack(const json& cfg, const fs::path& baseDir) {
    if (cfg.contains("otfFile"))
        return invop::readTensor(baseDir / cfg.at("otfFile").get<std::string>()).asComplex();
    if (cfg.contains("psf")) return invop::stackOtfs(psfSpecFrom(cfg.at("psf")));
    throw invop::ConfigError("config needs 'otfFile' or an inline 'psf' block");
}

int cmdSimulate(const json& cfg, const fs::path& baseDir, std::optional<std::uint64_t> seed,
                const std::string& outOverride) {
    invop::Tensor gt =
        invop::readTensor(baseDir / cfg.at("groundTruthFile").get<std::string>());

    invop::SimulationSpec spec;
    spec.padTo = invop::Shape(cfg.at("padTo").get<std::vector<std::size_t>>());
    spec.fovSize = invop::Shape(cfg.at("fov").get<std::vector<std::size_t>>());
    if (cfg.contains("snr_db") && !cfg.at("snr_db").is_null())
        spec.targetSnrDb = cfg.at("snr_db").get<double>();
    else
        spec.targetSnrDb.reset();
    spec.noiseSeed = seed.value_or(cfg.value("seed", std::uint64_t(0)));
    if (cfg.contains("fovCorner")) {
        auto c = cfg.at("fovCorner").get<std::vector<long long>>();
        std::vector<std::size_t> corner;
        for (long long v : c) corner.push_back(static_cast<std::size_t>(v - 1));
        spec.fovCorner = corner;
    }

    invop::Tensor otf = loadOtfStack(cfg, baseDir);
    invop::SimulationResult sim = invop::simulate(spec, gt, otf);

    const fs::path dataFile = outPath(cfg, "dataFile", "data.invt", baseDir, outOverride);
    invop::writeTensor(dataFile, sim.data);
    if (cfg.contains("out") && cfg.at("out").contains("cleanFile"))
        invop::writeTensor(baseDir / cfg.at("out").at("cleanFile").get<std::string>(), sim.clean);

    json meta;
    meta["achieved_snr_db"] = sim.achievedSnrDb;
    meta["seed"] = spec.noiseSeed;
    meta["fov_corner"] = sim.fovCorner;
    meta["gt_corner"] = sim.gtCorner;
    const fs::path metaFile = outPath(cfg, "metaFile", "sim_meta.json", baseDir, outOverride);
    std::ofstream(metaFile) << meta.dump(2) << "\n";

    std::cout << "simulate: wrote " << dataFile.string() << " (SNR " << sim.achievedSnrDb
              << " dB, seed " << spec.noiseSeed << ")\n";
    return 0;
}

struct ReconInputs {
    invop::ReconSpec spec;
    invop::Tensor data;
    invop::Tensor otf;
    std::optional<invop::GroundTruthRef> gt;
};

ReconInputs reconInputsFrom(const json& cfg, const fs::path& baseDir) {
    ReconInputs in;
    in.data = invop::readTensor(baseDir / cfg.at("dataFile").get<std::string>());
    in.otf = loadOtfStack(cfg, baseDir);

    in.spec.regularizer = invop::regularizerFromName(cfg.at("regularizer").get<std::string>());
    in.spec.lambda = cfg.value("lambda", 5e-3);
    in.spec.epsilon = cfg.value("epsilon", 0.0);
    in.spec.padShape = invop::Shape(cfg.at("padTo").get<std::vector<std::size_t>>());
    in.spec.solver = invop::buildSolverConfig(cfg.at("solver"));

    if (cfg.contains("fovCorner")) {
        for (long long v : cfg.at("fovCorner").get<std::vector<long long>>())
            in.spec.fovCorner.push_back(static_cast<std::size_t>(v - 1));
    } else {
        in.spec.fovCorner = invop::centeredCorner(in.spec.padShape, in.data.shape());
    }

    if (cfg.contains("groundTruthFile")) {
        invop::GroundTruthRef gt;
        gt.image = invop::readTensor(baseDir / cfg.at("groundTruthFile").get<std::string>());
        if (cfg.contains("gtCorner")) {
            for (long long v : cfg.at("gtCorner").get<std::vector<long long>>())
                gt.corner.push_back(static_cast<std::size_t>(v - 1));
        } else {
            gt.corner = invop::centeredCorner(in.spec.padShape, gt.image.shape());
        }
        in.gt = std::move(gt);
    }
    return in;
}

int cmdReconstruct(const json& cfg, const fs::path& baseDir, const std::string& outOverride) {
    ReconInputs in = reconInputsFrom(cfg, baseDir);
    invop::ReconResult res =
        invop::reconstruct(in.spec, in.data, in.otf, in.gt ? &*in.gt : nullptr);

    std::string prefix = outOverride.empty()
                             ? (baseDir / cfg.value("outputPrefix", std::string("recon"))).string()
                             : outOverride;
    invop::writeTensor(prefix + "_estimate.invt", res.estimate);
    std::ofstream(prefix + "_log.csv") << res.log.toCsv();
    invop::writePgmChannels(prefix, res.estimate);

    std::cout << "reconstruct[" << invop::regularizerName(in.spec.regularizer)
              << "]: final cost " << res.finalCost;
    if (res.snrDb) std::cout << ", SNR " << *res.snrDb << " dB";
    std::cout << ", iterations " << res.log.records.back().iteration << ", wrote " << prefix
              << "_*\n";
    return 0;
}

int cmdSweep(const json& cfg, const fs::path& baseDir, std::size_t threads,
             const std::string& outOverride) {
    ReconInputs in = reconInputsFrom(cfg, baseDir);
    if (!in.gt) throw invop::ConfigError("sweep-lambda: ground truth required for scoring");

    std::vector<double> lambdas;
    if (cfg.contains("lambdas")) {
        lambdas = cfg.at("lambdas").get<std::vector<double>>();
    } else if (cfg.contains("lambdaGrid")) {
        const auto& g = cfg.at("lambdaGrid");
        const double lo = g.at("min").get<double>(), hi = g.at("max").get<double>();
        const std::size_t count = g.at("count").get<std::size_t>();
        if (count < 2 || lo <= 0.0 || hi <= lo) throw invop::ConfigError("bad lambdaGrid");
        for (std::size_t i = 0; i < count; ++i)
            lambdas.push_back(lo * std::pow(hi / lo, static_cast<double>(i) /
                                                         static_cast<double>(count - 1)));
    } else {
        throw invop::ConfigError("sweep-lambda: needs 'lambdas' or 'lambdaGrid'");
    }

    invop::SweepResult sweep =
        invop::sweepLambda(in.spec, lambdas, in.data, in.otf, *in.gt, threads);

    std::string csvPath = outOverride.empty()
                              ? (baseDir / cfg.value("outputCsv", std::string("sweep.csv"))).string()
                              : outOverride + "_sweep.csv";
    std::ofstream(csvPath) << sweep.toCsv();
    const auto& best = sweep.points[sweep.bestIndex];
    std::cout << "sweep-lambda: " << sweep.points.size() << " points, best lambda "
              << best.lambda << " (SNR " << best.snrDb << " dB), wrote " << csvPath << "\n";
    return 0;
}

int cmdInfo(const std::string& file) {
    invop::Tensor t = invop::readTensor(file);
    std::cout << "tensor " << file << ": shape " << t.shape().str() << ", kind "
              << invop::kindName(t.kind()) << ", min|x| " << invop::minAbs(t) << ", max|x| "
              << invop::maxAbs(t) << ", norm " << invop::norm(t) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"invop: matrix-free operators, proximal solvers and the multichannel "
                 "deconvolution pipeline"};
    app.require_subcommand(1);

    std::string configPath, outOverride, infoFile;
    std::optional<std::uint64_t> seed;
    std::size_t threads = 0;

    auto addCommon = [&](CLI::App* sub, bool needsConfig) {
        if (needsConfig)
            sub->add_option("--config", configPath, "JSON config file")->required();
        sub->add_option("--out", outOverride, "output path prefix override");
        sub->add_option("--threads", threads, "worker pool cap (also INVOP_THREADS)");
        sub->add_option("--seed", seed, "noise seed override");
    };

    CLI::App* psf = app.add_subcommand("psf", "synthesize the Airy OTF/PSF stack");
    addCommon(psf, true);
    CLI::App* sim = app.add_subcommand("simulate", "generate blurred noisy data");
    addCommon(sim, true);
    CLI::App* rec = app.add_subcommand("reconstruct", "run one deconvolution");
    addCommon(rec, true);
    CLI::App* sweep = app.add_subcommand("sweep-lambda", "reconstruction SNR across lambdas");
    addCommon(sweep, true);
    CLI::App* info = app.add_subcommand("info", "describe a tensor file");
    info->add_option("--file", infoFile, "tensor file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (info->parsed()) return cmdInfo(infoFile);
        const json cfg = loadConfig(configPath);
        const fs::path baseDir = fs::absolute(configPath).parent_path();
        if (psf->parsed()) return cmdPsf(cfg, baseDir, outOverride);
        if (sim->parsed()) return cmdSimulate(cfg, baseDir, seed, outOverride);
        if (rec->parsed()) return cmdReconstruct(cfg, baseDir, outOverride);
        if (sweep->parsed()) return cmdSweep(cfg, baseDir, threads, outOverride);
    } catch (const invop::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
