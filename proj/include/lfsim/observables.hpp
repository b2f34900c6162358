#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lfsim/errors.hpp"
#include "lfsim/lattice.hpp"

namespace lfsim {

/// One recorded evolution step: basis probabilities over the system register
/// plus the ancilla postselection probability (TTS engines only).
struct StepRecord {
    int step = 0;
    double x_plus = 0.0;               // GeV^-1
    std::vector<double> probs;         // indexed by system register code
    double ancilla_success = std::numeric_limits<double>::quiet_NaN();
};

struct Trajectory {
    std::vector<StepRecord> steps;
};

inline std::string render_code(uint64_t code, int bits) {
    std::string s;
    for (int i = bits - 1; i >= 0; --i) s.push_back(((code >> i) & 1u) ? '1' : '0');
    return s;
}

/// |<phi_f | psi; x+>|^2 series for one basis label.
inline std::vector<double> transition_probability(const Trajectory& traj, const BasisLabel& label,
                                                  const EncodingLayout& lay) {
    uint64_t idx = encode_index(label, lay);
    std::vector<double> out;
    out.reserve(traj.steps.size());
    for (const auto& s : traj.steps) out.push_back(s.probs.at(idx));
    return out;
}

/// <p_perp^2> series, tracing out every label but the transverse momenta.
/// The reserved color code contributes nothing (it carries no probability in
/// valid runs) and is skipped.
inline std::vector<double> p_perp_squared_expectation(const Trajectory& traj,
                                                      const LatticeSpec& spec,
                                                      const EncodingLayout& lay) {
    std::vector<double> out;
    out.reserve(traj.steps.size());
    const double ap2 = spec.a_p_perp * spec.a_p_perp;
    for (const auto& s : traj.steps) {
        double acc = 0.0;
        for (uint64_t idx = 0; idx < s.probs.size(); ++idx) {
            if ((idx & 3u) == 3u) continue;  // Null color code
            uint64_t v = idx >> (2 + lay.helicity_bits);
            int u2 = static_cast<int>(v & ((1u << lay.trans_bits) - 1));
            int u1 = static_cast<int>((v >> lay.trans_bits) & ((1u << lay.trans_bits) - 1));
            if (u1 >= 2 * lay.n_perp || u2 >= 2 * lay.n_perp) continue;
            double q1 = u1 - lay.n_perp, q2 = u2 - lay.n_perp;
            acc += s.probs[idx] * ap2 * (q1 * q1 + q2 * q2);
        }
        out.push_back(acc);
    }
    return out;
}

struct ColorProbabilities {
    double red = 0.0, green = 0.0, blue = 0.0;
};

inline std::vector<ColorProbabilities> color_marginal(const Trajectory& traj) {
    std::vector<ColorProbabilities> out;
    out.reserve(traj.steps.size());
    for (const auto& s : traj.steps) {
        ColorProbabilities c;
        for (uint64_t idx = 0; idx < s.probs.size(); ++idx) {
            switch (idx & 3u) {
                case 0: c.red += s.probs[idx]; break;
                case 1: c.green += s.probs[idx]; break;
                case 2: c.blue += s.probs[idx]; break;
                default: break;
            }
        }
        out.push_back(c);
    }
    return out;
}

/// Pointwise |sim - exact| / exact; points with exact = 0 are skipped
/// (nullopt) rather than erroring.
inline std::vector<std::optional<double>> relative_deviation(const std::vector<double>& sim,
                                                             const std::vector<double>& exact) {
    if (sim.size() != exact.size())
        throw DimensionError("relative_deviation: series lengths differ");
    std::vector<std::optional<double>> out(sim.size());
    for (size_t i = 0; i < sim.size(); ++i)
        if (exact[i] != 0.0) out[i] = std::abs(sim[i] - exact[i]) / std::abs(exact[i]);
    return out;
}

// ---------------------------------------------------------------------------
// CSV output (12 significant digits)

namespace csv_detail {
inline std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}
}  // namespace csv_detail

inline void write_observables_csv(const Trajectory& traj, const LatticeSpec& spec,
                                  const EncodingLayout& lay, const std::string& path) {
    auto pp = p_perp_squared_expectation(traj, spec, lay);
    auto col = color_marginal(traj);
    std::ofstream f(path);
    f << "step,x_plus,p_perp_sq,P_red,P_green,P_blue\n";
    for (size_t i = 0; i < traj.steps.size(); ++i) {
        f << traj.steps[i].step << ',' << csv_detail::num(traj.steps[i].x_plus) << ','
          << csv_detail::num(pp[i]) << ',' << csv_detail::num(col[i].red) << ','
          << csv_detail::num(col[i].green) << ',' << csv_detail::num(col[i].blue) << '\n';
    }
}

inline void write_probabilities_csv(const Trajectory& traj, const EncodingLayout& lay,
                                    const std::string& path) {
    std::ofstream f(path);
    f << "step,x_plus,bitstring,probability\n";
    for (const auto& s : traj.steps)
        for (uint64_t idx = 0; idx < s.probs.size(); ++idx)
            f << s.step << ',' << csv_detail::num(s.x_plus) << ','
              << render_code(idx, lay.total_bits()) << ',' << csv_detail::num(s.probs[idx]) << '\n';
}

}  // namespace lfsim
