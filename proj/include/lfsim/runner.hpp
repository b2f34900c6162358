#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lfsim/cgc_field.hpp"
#include "lfsim/hamiltonian.hpp"
#include "lfsim/observables.hpp"
#include "lfsim/reference.hpp"
#include "lfsim/trotter.hpp"
#include "lfsim/tts.hpp"

namespace lfsim {

inline constexpr const char* kArtifactVersion = "lfsim 0.1.0";

enum class Algorithm { Tts, Trotter, Exact, TtsMatrix };
enum class RunMode { Statevector, Shots };

inline Algorithm algorithm_from(const std::string& s) {
    if (s == "tts") return Algorithm::Tts;
    if (s == "trotter") return Algorithm::Trotter;
    if (s == "exact") return Algorithm::Exact;
    if (s == "tts-matrix") return Algorithm::TtsMatrix;
    throw ConfigError("unknown algorithm '" + s + "' (tts|trotter|exact|tts-matrix)");
}

inline const char* algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::Tts: return "tts";
        case Algorithm::Trotter: return "trotter";
        case Algorithm::Exact: return "exact";
        case Algorithm::TtsMatrix: return "tts-matrix";
    }
    return "?";
}

struct RunConfig {
    // lattice
    int n_perp = 2;
    double l_perp = 5.0;
    int n_par = 1;
    double l_par = 1.0;
    // physics
    double m_quark = 0.02;
    double p_plus = 850.0;
    double helicity = 0.5;
    double g = 1.0;
    double g2mu = 0.407294;
    double m_g = 0.1;
    double l_eta = 50.0;
    int n_eta = 1;
    // engine
    Algorithm algorithm = Algorithm::Exact;
    int k_r = 3;
    int steps = 25;
    double tau_prime = 0.0;  // Trotter override; 0 = use ln2/Lambda
    uint64_t shots = 1000000;
    RunMode mode = RunMode::Statevector;
    // source
    bool fixture = true;
    bool dump_field = false;
    // initial state
    int init_q1 = 0, init_q2 = 0;
    Color init_color = Color::Red;
    // run
    uint64_t seed = 1;
    std::string out_dir = "out";
};

// ---------------------------------------------------------------------------
// Config file: INI-style sections mirroring RunConfig.

namespace config_detail {

inline std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

using SectionMap = std::map<std::string, std::map<std::string, std::string>>;

inline SectionMap parse_ini(std::istream& in) {
    SectionMap out;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw ConfigError("config line " + std::to_string(lineno) + ": bad section header");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        out[section][trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return out;
}

template <typename T>
inline T parse_value(const std::string& s);

template <> inline double parse_value<double>(const std::string& s) { return std::stod(s); }
template <> inline int parse_value<int>(const std::string& s) { return std::stoi(s); }
template <> inline uint64_t parse_value<uint64_t>(const std::string& s) { return std::stoull(s); }
template <> inline std::string parse_value<std::string>(const std::string& s) { return s; }
template <> inline bool parse_value<bool>(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("expected boolean, got '" + s + "'");
}

template <typename T>
inline void load(const SectionMap& m, const std::string& sec, const std::string& key, T& into) {
    auto si = m.find(sec);
    if (si == m.end()) return;
    auto ki = si->second.find(key);
    if (ki == si->second.end()) return;
    try {
        into = parse_value<T>(ki->second);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("config [" + sec + "] " + key + ": cannot parse '" + ki->second + "'");
    }
}

}  // namespace config_detail

inline RunConfig parse_run_config(std::istream& in) {
    using namespace config_detail;
    SectionMap m = parse_ini(in);
    RunConfig c;
    load(m, "lattice", "n_perp", c.n_perp);
    load(m, "lattice", "l_perp", c.l_perp);
    load(m, "lattice", "n_par", c.n_par);
    load(m, "lattice", "l_par", c.l_par);
    load(m, "physics", "m_quark", c.m_quark);
    load(m, "physics", "p_plus", c.p_plus);
    load(m, "physics", "helicity", c.helicity);
    load(m, "physics", "g", c.g);
    load(m, "physics", "g2mu", c.g2mu);
    load(m, "physics", "m_g", c.m_g);
    load(m, "physics", "l_eta", c.l_eta);
    load(m, "physics", "n_eta", c.n_eta);
    std::string alg = algorithm_name(c.algorithm), mode = "statevector", color = "red", field = "fixture";
    load(m, "engine", "algorithm", alg);
    load(m, "engine", "k_r", c.k_r);
    load(m, "engine", "steps", c.steps);
    load(m, "engine", "tau_prime", c.tau_prime);
    load(m, "engine", "shots", c.shots);
    load(m, "engine", "mode", mode);
    load(m, "source", "field", field);
    load(m, "source", "dump_field", c.dump_field);
    load(m, "initial", "q1", c.init_q1);
    load(m, "initial", "q2", c.init_q2);
    load(m, "initial", "color", color);
    load(m, "run", "seed", c.seed);
    load(m, "run", "out", c.out_dir);
    c.algorithm = algorithm_from(alg);
    if (mode == "statevector") c.mode = RunMode::Statevector;
    else if (mode == "shots") c.mode = RunMode::Shots;
    else throw ConfigError("unknown mode '" + mode + "' (statevector|shots)");
    if (field == "fixture") c.fixture = true;
    else if (field == "sampled") c.fixture = false;
    else throw ConfigError("unknown field source '" + field + "' (sampled|fixture)");
    if (color == "red") c.init_color = Color::Red;
    else if (color == "green") c.init_color = Color::Green;
    else if (color == "blue") c.init_color = Color::Blue;
    else throw ConfigError("unknown initial color '" + color + "'");
    return c;
}

inline RunConfig parse_run_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    return parse_run_config(f);
}

// ---------------------------------------------------------------------------

struct RunResult {
    HamiltonianModel model;
    LatticeSpec spec;
    EncodingLayout layout;
    Trajectory trajectory;
    double lambda = 0.0, tau = 0.0;
    int steps = 0;
    nlohmann::json manifest;
};

namespace run_detail {

inline nlohmann::json config_json(const RunConfig& c) {
    nlohmann::json j;
    j["lattice"] = {{"n_perp", c.n_perp}, {"l_perp", c.l_perp}, {"n_par", c.n_par}, {"l_par", c.l_par}};
    j["physics"] = {{"m_quark", c.m_quark}, {"p_plus", c.p_plus}, {"helicity", c.helicity},
                    {"g", c.g},             {"g2mu", c.g2mu},     {"m_g", c.m_g},
                    {"l_eta", c.l_eta},     {"n_eta", c.n_eta}};
    j["engine"] = {{"algorithm", algorithm_name(c.algorithm)},
                   {"k_r", c.k_r},
                   {"steps", c.steps},
                   {"tau_prime", c.tau_prime},
                   {"shots", c.shots},
                   {"mode", c.mode == RunMode::Shots ? "shots" : "statevector"}};
    j["source"] = {{"field", c.fixture ? "fixture" : "sampled"}};
    j["initial"] = {{"q1", c.init_q1}, {"q2", c.init_q2}, {"color", color_name(c.init_color)}};
    j["seed"] = c.seed;
    j["out"] = c.out_dir;
    return j;
}

/// Binomially thins `shots` through the per-step postselection probability,
/// then resamples the recorded distribution from the retained shots.  This is
/// the per-shot rerun semantics: for a pure state, postselected shots are
/// exactly multinomial draws from the projected state.
inline void apply_shot_noise(Trajectory& traj, uint64_t shots, std::mt19937_64& rng) {
    double cumulative_success = 1.0;
    for (auto& rec : traj.steps) {
        if (rec.step > 0 && !std::isnan(rec.ancilla_success))
            cumulative_success *= rec.ancilla_success;
        uint64_t retained = 0;
        for (uint64_t s = 0; s < shots; ++s) {
            double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
            if (u < cumulative_success) ++retained;
        }
        if (retained == 0) throw ProjectionError("apply_shot_noise: every shot was discarded");
        // multinomial over the recorded distribution
        std::vector<double> cdf(rec.probs.size());
        double acc = 0.0;
        for (size_t i = 0; i < rec.probs.size(); ++i) {
            acc += rec.probs[i];
            cdf[i] = acc;
        }
        std::vector<uint64_t> counts(rec.probs.size(), 0);
        for (uint64_t s = 0; s < retained; ++s) {
            double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53 * acc;
            size_t lo = 0, hi = cdf.size() - 1;
            while (lo < hi) {
                size_t mid = (lo + hi) / 2;
                if (cdf[mid] <= u) lo = mid + 1; else hi = mid;
            }
            ++counts[lo];
        }
        for (size_t i = 0; i < rec.probs.size(); ++i)
            rec.probs[i] = static_cast<double>(counts[i]) / static_cast<double>(retained);
    }
}

}  // namespace run_detail

/// Builds lattice, layout and Hamiltonian from the configuration (fixture or
/// sampled MV field).
inline void build_problem(const RunConfig& cfg, LatticeSpec& spec, EncodingLayout& lay,
                          HamiltonianModel& model) {
    if (cfg.fixture) {
        spec = fixture_lattice();
        lay = make_layout(spec);
        model = demo_fixture();
        return;
    }
    LatticeConfig lc;
    lc.n_perp = cfg.n_perp;
    lc.l_perp = cfg.l_perp;
    lc.n_par = cfg.n_par;
    lc.l_par = cfg.l_par;
    if (cfg.n_par == 1) lc.fixed_p_plus = cfg.p_plus;  // single retained mode
    lc.fixed_helicity = cfg.helicity;
    spec = build_lattice(lc);
    lay = make_layout(spec);

    FieldParams fp;
    fp.g = cfg.g;
    fp.g2mu = cfg.g2mu;
    fp.m_g = cfg.m_g;
    fp.l_eta = cfg.l_eta;
    fp.n_eta = cfg.n_eta;
    fp.m_quark = cfg.m_quark;
    fp.seed = cfg.seed;
    GaussianStream rng(cfg.seed);
    ChargeDensity rho = sample_charge_density(fp, spec, rng);
    ColorField field = accumulate_field(solve_poisson(rho, fp, spec), fp);
    if (cfg.dump_field) {
        std::filesystem::create_directories(cfg.out_dir);
        dump_charge_csv(rho, cfg.out_dir + "/charge_density.csv");
        dump_field_csv(field, cfg.out_dir + "/color_field.csv");
    }
    auto kin = kinetic_terms_of(build_kinetic(spec, cfg.m_quark, cfg.p_plus, lay), lay);
    auto inter = build_interaction(field, spec, cfg.g, lay);
    model = assemble(std::move(kin), std::move(inter), lay);
}

/// Full experiment: field/fixture -> Hamiltonian -> engine -> observables and
/// provenance files (manifest.json, probabilities.csv, observables.csv).
inline RunResult run(const RunConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    std::filesystem::create_directories(cfg.out_dir);

    RunResult res;
    build_problem(cfg, res.spec, res.layout, res.model);
    res.lambda = res.model.lambda_norm;
    if (!(res.lambda > 0.0)) throw ConfigError("run: model has zero norm");
    const double ln2 = std::log(2.0);
    res.tau = (cfg.algorithm == Algorithm::Trotter && cfg.tau_prime > 0.0) ? cfg.tau_prime
                                                                           : ln2 / res.lambda;
    res.steps = cfg.steps;

    BasisLabel init;
    init.q1 = cfg.init_q1;
    init.q2 = cfg.init_q2;
    init.color = cfg.init_color;
    init.helicity = cfg.helicity;
    init.q_plus = 0.5;
    uint64_t init_code = encode_index(init, res.layout);

    nlohmann::json manifest;
    manifest["artifact_version"] = kArtifactVersion;
    manifest["status"] = "running";
    manifest["config"] = run_detail::config_json(cfg);
    manifest["units"] = {{"energy", "GeV"}, {"length", "GeV^-1"}};
    manifest["lambda_gev"] = res.lambda;
    manifest["tau_gev_inv"] = res.tau;
    manifest["r_steps"] = res.steps;
    manifest["x_plus_total"] = res.tau * res.steps;
    manifest["k_r"] = cfg.k_r;
    manifest["system_qubits"] = res.model.n_qubits;
    manifest["l1_terms"] = res.model.l1();
    manifest["l2_terms"] = res.model.l2();
    manifest["term_order"] = "lexicographic Pauli strings, kinetic before interaction";
    manifest["initial_bitstring"] = encode_basis(init, res.layout);
    if (cfg.algorithm == Algorithm::Tts) {
        ResourceEstimate est = resource_estimate(res.model, cfg.k_r, std::max(1, cfg.steps));
        manifest["ancilla_qubits"] = est.ancilla;
        manifest["total_qubits"] = est.total;
        manifest["gate_cost"] = est.gate_cost;
        if (est.total > 30)
            throw ConfigError("run: TTS register needs " + std::to_string(est.total) +
                              " qubits; too large for the dense engine");
    }
    {
        std::ofstream mf(cfg.out_dir + "/manifest.json");
        mf << manifest.dump(2) << '\n';
    }

    try {
        switch (cfg.algorithm) {
            case Algorithm::Tts: {
                TTSConfig tc = make_tts_config(res.model, cfg.k_r, cfg.steps);
                res.trajectory = tts_evolve(res.model, tc, init_code);
                break;
            }
            case Algorithm::Trotter: {
                TrotterConfig trc{res.tau, cfg.steps, 0.0};
                res.trajectory = trotter_evolve(res.model, trc, init_code);
                break;
            }
            case Algorithm::Exact:
                res.trajectory = exact_trajectory(res.model, res.tau, cfg.steps, init_code);
                break;
            case Algorithm::TtsMatrix: {
                TTSConfig tc = make_tts_config(res.model, cfg.k_r, cfg.steps);
                res.trajectory =
                    tts_matrix_emulation(res.model, cfg.k_r, tc.tau, cfg.steps, init_code);
                break;
            }
        }
    } catch (const std::exception& e) {
        manifest["status"] = "aborted";
        manifest["error"] = e.what();
        std::ofstream mf(cfg.out_dir + "/manifest.json");
        mf << manifest.dump(2) << '\n';
        throw;
    }

    if (cfg.mode == RunMode::Shots) {
        std::mt19937_64 shot_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
        run_detail::apply_shot_noise(res.trajectory, cfg.shots, shot_rng);
    }

    write_observables_csv(res.trajectory, res.spec, res.layout, cfg.out_dir + "/observables.csv");
    write_probabilities_csv(res.trajectory, res.layout, cfg.out_dir + "/probabilities.csv");

    auto t1 = std::chrono::steady_clock::now();
    manifest["status"] = "completed";
    manifest["wall_clock_seconds"] = std::chrono::duration<double>(t1 - t0).count();
    manifest["ancilla_success_per_step"] = nlohmann::json::array();
    for (const auto& s : res.trajectory.steps)
        if (s.step > 0 && !std::isnan(s.ancilla_success))
            manifest["ancilla_success_per_step"].push_back(s.ancilla_success);
    {
        std::ofstream mf(cfg.out_dir + "/manifest.json");
        mf << manifest.dump(2) << '\n';
    }
    res.manifest = manifest;
    return res;
}

// ---------------------------------------------------------------------------
// compare: per-step deviations between two run outputs.

struct ObservablesTable {
    std::vector<int> step;
    std::vector<double> x_plus, p_perp_sq, p_red, p_green, p_blue;
};

inline ObservablesTable read_observables_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open '" + path + "'");
    ObservablesTable t;
    std::string line;
    std::getline(f, line);  // header
    while (std::getline(f, line)) {
        if (config_detail::trim(line).empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 6) throw ConfigError("malformed observables row: " + line);
        t.step.push_back(std::stoi(cells[0]));
        t.x_plus.push_back(std::stod(cells[1]));
        t.p_perp_sq.push_back(std::stod(cells[2]));
        t.p_red.push_back(std::stod(cells[3]));
        t.p_green.push_back(std::stod(cells[4]));
        t.p_blue.push_back(std::stod(cells[5]));
    }
    return t;
}

/// Writes deviations.csv: pointwise |A - B| / B of <p_perp^2> and the color
/// marginals, with run B as the reference; cells where the reference is zero
/// are left empty.
inline void compare_runs(const std::string& dir_a, const std::string& dir_b,
                         const std::string& out_path) {
    ObservablesTable a = read_observables_csv(dir_a + "/observables.csv");
    ObservablesTable b = read_observables_csv(dir_b + "/observables.csv");
    if (a.step.size() != b.step.size())
        throw DimensionError("compare_runs: step grids have different lengths");
    for (size_t i = 0; i < a.step.size(); ++i)
        if (a.step[i] != b.step[i] || std::abs(a.x_plus[i] - b.x_plus[i]) > 1e-9 * std::max(1.0, std::abs(b.x_plus[i])))
            throw DimensionError("compare_runs: step grids do not align");
    auto dev = [](double s, double e) -> std::optional<double> {
        if (e == 0.0) return std::nullopt;
        return std::abs(s - e) / std::abs(e);
    };
    std::ofstream f(out_path);
    f << "step,x_plus,dev_p_perp_sq,dev_P_red,dev_P_green,dev_P_blue\n";
    auto cell = [](std::optional<double> v) { return v ? csv_detail::num(*v) : std::string(); };
    for (size_t i = 0; i < a.step.size(); ++i) {
        f << a.step[i] << ',' << csv_detail::num(a.x_plus[i]) << ','
          << cell(dev(a.p_perp_sq[i], b.p_perp_sq[i])) << ','
          << cell(dev(a.p_red[i], b.p_red[i])) << ','
          << cell(dev(a.p_green[i], b.p_green[i])) << ','
          << cell(dev(a.p_blue[i], b.p_blue[i])) << '\n';
    }
}

}  // namespace lfsim
