#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lfsim/runner.hpp"

using namespace lfsim;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

const char* kDemoConfig = R"(# demo fixture run
[lattice]
n_perp = 2
l_perp = 5.0

[physics]
m_quark = 0.02
p_plus = 850
helicity = 0.5
g = 1.0
g2mu = 0.407294
m_g = 0.1
l_eta = 50

[engine]
algorithm = exact
k_r = 3
steps = 25

[source]
field = fixture

[run]
seed = 7
out = run_out/exact
)";

RunConfig demo_config() {
    std::stringstream ss(kDemoConfig);
    return parse_run_config(ss);
}

int count_lines(const std::string& path) {
    std::ifstream f(path);
    std::string line;
    int n = 0;
    while (std::getline(f, line))
        if (!line.empty()) ++n;
    return n;
}

}  // namespace

TEST_CASE("config parsing reads sections and rejects junk") {
    RunConfig c = demo_config();
    CHECK(c.n_perp == 2);
    CHECK(c.l_perp == doctest::Approx(5.0));
    CHECK(c.algorithm == Algorithm::Exact);
    CHECK(c.steps == 25);
    CHECK(c.fixture);
    CHECK(c.seed == 7);
    CHECK(c.out_dir == "run_out/exact");

    std::stringstream bad("[engine]\nalgorithm = warp\n");
    CHECK_THROWS_AS(parse_run_config(bad), ConfigError);
    std::stringstream bad2("[lattice\nn_perp = 2\n");
    CHECK_THROWS_AS(parse_run_config(bad2), ConfigError);
    std::stringstream bad3("n_perp 2\n");
    CHECK_THROWS_AS(parse_run_config(bad3), ConfigError);
}

TEST_CASE("exact demo run writes 26 observable rows and a finished manifest") {
    RunConfig c = demo_config();
    c.out_dir = "run_out/exact";
    RunResult res = run(c);
    CHECK(count_lines(c.out_dir + "/observables.csv") == 1 + 26);
    CHECK(count_lines(c.out_dir + "/probabilities.csv") == 1 + 26 * 64);

    nlohmann::json manifest;
    std::ifstream mf(c.out_dir + "/manifest.json");
    mf >> manifest;
    CHECK(manifest["status"] == "completed");
    CHECK(manifest["lambda_gev"].get<double>() == doctest::Approx(0.110024).epsilon(1e-5));
    double tau = manifest["tau_gev_inv"].get<double>();
    CHECK(tau * manifest["lambda_gev"].get<double>() == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(manifest["x_plus_total"].get<double>() ==
          doctest::Approx(tau * manifest["r_steps"].get<int>()).epsilon(1e-12));
    CHECK(res.trajectory.steps.size() == 26);
}

TEST_CASE("steps = 0 leaves only the initial record") {
    RunConfig c = demo_config();
    c.steps = 0;
    c.out_dir = "run_out/zero";
    RunResult res = run(c);
    CHECK(res.trajectory.steps.size() == 1);
    CHECK(count_lines(c.out_dir + "/observables.csv") == 1 + 1);
}

TEST_CASE("tts manifest reports the printed qubit budget") {
    RunConfig c = demo_config();
    c.algorithm = Algorithm::Tts;
    c.k_r = 3;
    c.steps = 0;  // geometry only; the full run is the acceptance suite's job
    c.out_dir = "run_out/tts_geom";
    RunResult res = run(c);
    CHECK(res.manifest["system_qubits"] == 6);
    CHECK(res.manifest["ancilla_qubits"] == 21);
    CHECK(res.manifest["total_qubits"] == 27);
    CHECK(res.manifest["l1_terms"] == 7);
    CHECK(res.manifest["l2_terms"] == 32);
}

TEST_CASE("same config and seed give byte-identical CSV outputs") {
    RunConfig c = demo_config();
    c.algorithm = Algorithm::TtsMatrix;
    c.steps = 6;
    c.out_dir = "run_out/rep_a";
    run(c);
    c.out_dir = "run_out/rep_b";
    run(c);
    CHECK(slurp("run_out/rep_a/observables.csv") == slurp("run_out/rep_b/observables.csv"));
    CHECK(slurp("run_out/rep_a/probabilities.csv") == slurp("run_out/rep_b/probabilities.csv"));
}

TEST_CASE("sampled-field runs are reproducible and engine-consistent") {
    RunConfig c = demo_config();
    c.fixture = false;
    c.algorithm = Algorithm::Exact;
    c.steps = 4;
    c.out_dir = "run_out/sampled_a";
    RunResult a = run(c);
    c.out_dir = "run_out/sampled_b";
    RunResult b = run(c);
    CHECK(slurp("run_out/sampled_a/observables.csv") == slurp("run_out/sampled_b/observables.csv"));
    CHECK(a.model.total_terms() == b.model.total_terms());
    CHECK(a.model.l1() == 7);  // same kinetic structure as the fixture lattice
    CHECK(a.model.l2() > 0);
}

TEST_CASE("compare of a run against itself is identically zero") {
    RunConfig c = demo_config();
    c.steps = 5;
    c.out_dir = "run_out/self";
    run(c);
    compare_runs("run_out/self", "run_out/self", "run_out/self/deviations.csv");
    std::ifstream f("run_out/self/deviations.csv");
    std::string line;
    std::getline(f, line);
    CHECK(line == "step,x_plus,dev_p_perp_sq,dev_P_red,dev_P_green,dev_P_blue");
    int rows = 0;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        ++rows;
        std::stringstream ss(line);
        std::string cell;
        int col = 0;
        while (std::getline(ss, cell, ',')) {
            if (col >= 2 && !cell.empty()) CHECK(std::stod(cell) == 0.0);
            ++col;
        }
    }
    CHECK(rows == 6);
}

TEST_CASE("compare tts-matrix against exact is finite and nonzero") {
    RunConfig c = demo_config();
    c.steps = 6;
    c.algorithm = Algorithm::Exact;
    c.out_dir = "run_out/cmp_exact";
    run(c);
    c.algorithm = Algorithm::TtsMatrix;
    c.k_r = 3;
    c.out_dir = "run_out/cmp_tts";
    run(c);
    compare_runs("run_out/cmp_tts", "run_out/cmp_exact", "run_out/cmp_dev.csv");
    std::ifstream f("run_out/cmp_dev.csv");
    std::string line;
    std::getline(f, line);
    bool any_nonzero = false;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        int col = 0;
        while (std::getline(ss, cell, ',')) {
            if (col >= 2 && !cell.empty()) {
                double v = std::stod(cell);
                CHECK(std::isfinite(v));
                if (v > 0.0) any_nonzero = true;
            }
            ++col;
        }
    }
    CHECK(any_nonzero);
}

TEST_CASE("grid mismatch in compare is rejected") {
    RunConfig c = demo_config();
    c.steps = 3;
    c.out_dir = "run_out/grid_a";
    run(c);
    c.steps = 4;
    c.out_dir = "run_out/grid_b";
    run(c);
    CHECK_THROWS_AS(compare_runs("run_out/grid_a", "run_out/grid_b", "run_out/grid_dev.csv"),
                    DimensionError);
}

TEST_CASE("shots mode produces normalized, seed-stable histograms") {
    RunConfig c = demo_config();
    c.algorithm = Algorithm::TtsMatrix;
    c.mode = RunMode::Shots;
    c.shots = 20000;
    c.steps = 3;
    c.out_dir = "run_out/shots_a";
    RunResult a = run(c);
    for (const auto& s : a.trajectory.steps) {
        double total = 0.0;
        for (double p : s.probs) total += p;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
    c.out_dir = "run_out/shots_b";
    run(c);
    CHECK(slurp("run_out/shots_a/probabilities.csv") == slurp("run_out/shots_b/probabilities.csv"));
}

TEST_CASE("shot-sampled observables track the statevector run within five sigma") {
    RunConfig c = demo_config();
    c.algorithm = Algorithm::TtsMatrix;
    c.steps = 4;
    c.out_dir = "run_out/sv_ref";
    RunResult sv = run(c);
    c.mode = RunMode::Shots;
    c.shots = 1000000;
    c.out_dir = "run_out/shots_ref";
    RunResult sm = run(c);
    for (size_t s = 0; s < sv.trajectory.steps.size(); ++s) {
        for (size_t b = 0; b < 64; ++b) {
            double p = sv.trajectory.steps[s].probs[b];
            double f = sm.trajectory.steps[s].probs[b];
            if (p == 0.0) continue;  // shot thinning keeps zero cells at zero
            double sigma = std::sqrt(p * (1.0 - p) / 1e6);
            CHECK(std::abs(f - p) < 5.0 * std::max(sigma, 1e-9));
        }
    }
}

TEST_CASE("gate-level tts and matrix emulation agree through the run pipeline") {
    // N_perp = 1 keeps the full register small enough for a unit test
    RunConfig c = demo_config();
    c.fixture = false;
    c.n_perp = 1;
    c.l_perp = 5.0;
    c.k_r = 2;
    c.steps = 3;
    c.seed = 3;
    c.algorithm = Algorithm::Tts;
    c.out_dir = "run_out/xengine_tts";
    RunResult gate = run(c);
    c.algorithm = Algorithm::TtsMatrix;
    c.out_dir = "run_out/xengine_emu";
    RunResult emu = run(c);
    REQUIRE(gate.trajectory.steps.size() == emu.trajectory.steps.size());
    for (size_t s = 0; s < gate.trajectory.steps.size(); ++s)
        for (size_t b = 0; b < gate.trajectory.steps[s].probs.size(); ++b)
            CHECK(std::abs(gate.trajectory.steps[s].probs[b] - emu.trajectory.steps[s].probs[b]) <
                  1e-8);
    compare_runs("run_out/xengine_tts", "run_out/xengine_emu", "run_out/xengine_dev.csv");
    std::ifstream f("run_out/xengine_dev.csv");
    std::string line;
    std::getline(f, line);
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        int col = 0;
        while (std::getline(ss, cell, ',')) {
            if (col >= 2 && !cell.empty()) CHECK(std::stod(cell) < 1e-8);
            ++col;
        }
    }
}

TEST_CASE("unknown algorithm or oversized tts register are configuration errors") {
    RunConfig c = demo_config();
    c.fixture = false;
    c.n_perp = 8;  // blows past the dense-engine qubit budget
    c.algorithm = Algorithm::Tts;
    c.k_r = 3;
    c.steps = 1;
    c.out_dir = "run_out/too_big";
    CHECK_THROWS_AS(run(c), ConfigError);
}
