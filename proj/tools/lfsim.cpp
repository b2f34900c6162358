// Experiment runner for the quark-nucleus scattering toolkit: builds the
// light-front Hamiltonian (sampled MV field or the embedded model fixture),
// evolves the quark state with the selected engine, and writes manifest plus
// plot-ready CSV files.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <vector>

#include "lfsim/runner.hpp"

namespace {

int do_run(const std::string& config_path, lfsim::RunConfig cfg, int sweep) {
    if (sweep <= 1) {
        lfsim::RunResult res = lfsim::run(cfg);
        std::printf("run complete: %s  (Lambda = %.6g GeV, tau = %.6g GeV^-1, %d steps)\n",
                    cfg.out_dir.c_str(), res.lambda, res.tau, res.steps);
        std::printf("outputs: manifest.json, observables.csv, probabilities.csv\n");
        return 0;
    }
    std::vector<std::future<std::string>> jobs;
    for (int i = 0; i < sweep; ++i) {
        lfsim::RunConfig c = cfg;
        c.seed = cfg.seed + static_cast<uint64_t>(i);
        c.out_dir = cfg.out_dir + "/sweep_" + std::to_string(i);
        jobs.push_back(std::async(std::launch::async, [c] {
            lfsim::run(c);
            return c.out_dir;
        }));
    }
    for (auto& j : jobs) std::printf("run complete: %s\n", j.get().c_str());
    (void)config_path;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"light-front quark-nucleus scattering simulator"};
    app.require_subcommand(1);

    std::string config_path, algorithm, mode, out_dir;
    int k_r = -1, steps = -1, sweep = 1;
    int64_t seed = -1;
    int64_t shots = -1;

    auto* run_cmd = app.add_subcommand("run", "run one experiment from a config file");
    run_cmd->add_option("--config", config_path, "run configuration file")->required();
    run_cmd->add_option("--algorithm", algorithm, "tts|trotter|exact|tts-matrix");
    run_cmd->add_option("--K", k_r, "Taylor truncation order K_r");
    run_cmd->add_option("--steps", steps, "number of evolution steps r");
    run_cmd->add_option("--shots", shots, "shot count for shots mode");
    run_cmd->add_option("--seed", seed, "rng seed");
    run_cmd->add_option("--mode", mode, "statevector|shots");
    run_cmd->add_option("--out", out_dir, "output directory");
    run_cmd->add_option("--sweep", sweep, "fan out N runs with consecutive seeds");

    std::string dir_a, dir_b, compare_out = "deviations.csv";
    auto* cmp_cmd = app.add_subcommand("compare", "per-step deviations between two runs");
    cmp_cmd->add_option("run_a", dir_a, "output directory of the run under test")->required();
    cmp_cmd->add_option("run_b", dir_b, "output directory of the reference run")->required();
    cmp_cmd->add_option("--out", compare_out, "deviation CSV path");

    std::string model_config, model_out = "model.json";
    auto* model_cmd = app.add_subcommand("export-model", "write the assembled Hamiltonian as JSON");
    model_cmd->add_option("--config", model_config, "run configuration file")->required();
    model_cmd->add_option("--out", model_out, "model JSON path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            lfsim::RunConfig cfg = lfsim::parse_run_config_file(config_path);
            if (!algorithm.empty()) cfg.algorithm = lfsim::algorithm_from(algorithm);
            if (k_r >= 0) cfg.k_r = k_r;
            if (steps >= 0) cfg.steps = steps;
            if (shots >= 0) cfg.shots = static_cast<uint64_t>(shots);
            if (seed >= 0) cfg.seed = static_cast<uint64_t>(seed);
            if (!mode.empty()) {
                if (mode == "statevector") cfg.mode = lfsim::RunMode::Statevector;
                else if (mode == "shots") cfg.mode = lfsim::RunMode::Shots;
                else throw lfsim::ConfigError("unknown mode '" + mode + "'");
            }
            if (!out_dir.empty()) cfg.out_dir = out_dir;
            return do_run(config_path, cfg, sweep);
        }
        if (cmp_cmd->parsed()) {
            lfsim::compare_runs(dir_a, dir_b, compare_out);
            std::printf("wrote %s\n", compare_out.c_str());
            return 0;
        }
        if (model_cmd->parsed()) {
            lfsim::RunConfig cfg = lfsim::parse_run_config_file(model_config);
            lfsim::LatticeSpec spec;
            lfsim::EncodingLayout lay;
            lfsim::HamiltonianModel model;
            lfsim::build_problem(cfg, spec, lay, model);
            std::ofstream f(model_out);
            f << lfsim::model_to_json(model).dump(2) << '\n';
            std::printf("wrote %s (%zu terms, Lambda = %.6g GeV)\n", model_out.c_str(),
                        model.total_terms(), model.lambda_norm);
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
