#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "lfsim/hamiltonian.hpp"
#include "lfsim/observables.hpp"
#include "lfsim/statevector.hpp"

namespace lfsim {

/// Partial exponential sum N_K = sum_{k<=K} x^k / k!.
inline double normalization_factor(int order, double x) {
    if (order < 0) throw ConfigError("normalization_factor: order must be >= 0");
    double s = 1.0, term = 1.0;
    for (int k = 1; k <= order; ++k) {
        term *= x / k;
        s += term;
    }
    return s;
}

/// Smallest K >= 1 whose single-step remainder bound e^{ln2} (ln2)^{K+1}/(K+1)!
/// stays below epsilon/r, with r = Lambda x+ / ln2 steps.
inline int truncation_order_for(double epsilon, double lambda, double x_plus) {
    if (!(epsilon > 0.0)) throw ConfigError("truncation_order_for: epsilon must be positive");
    const double ln2 = std::log(2.0);
    double r = std::max(1.0, std::round(lambda * x_plus / ln2));
    double budget = epsilon / r;
    double term = ln2;  // (ln2)^{K+1} / (K+1)! at K = 0
    for (int k = 1; k <= 64; ++k) {
        term *= ln2 / (k + 1);
        if (2.0 * term < budget) return k;
    }
    return 64;
}

/// Rotation angles of the unary y0 chain (k = 1..K), Taylor weights and the
/// normalization for one step.
struct TaylorWeights {
    int order = 1;
    double lambda_tau = 0.0;
    double n_k = 1.0;
    std::vector<double> thetas;  // thetas[k-1] drives the k-th unary qubit
};

inline TaylorWeights taylor_weights(int order, double lambda_tau) {
    if (order < 1) throw ConfigError("taylor_weights: order must be >= 1");
    TaylorWeights w;
    w.order = order;
    w.lambda_tau = lambda_tau;
    w.n_k = normalization_factor(order, lambda_tau);
    w.thetas.resize(static_cast<size_t>(order));
    for (int k = 1; k <= order; ++k) {
        // head = (Lt)^{k-1}/(k-1)!, tail_sum = sum_{q=k-1}^{K} (Lt)^q/q!
        double head = 1.0, term = 1.0;
        for (int i = 1; i <= k - 1; ++i) head *= lambda_tau / i;
        double tail = 0.0;
        term = head;
        for (int q = k - 1; q <= order; ++q) {
            tail += term;
            term *= lambda_tau / (q + 1);
        }
        // tail vanishes only when this order is unreachable (lambda_tau = 0)
        w.thetas[static_cast<size_t>(k - 1)] =
            tail > 0.0 ? 2.0 * std::asin(std::sqrt(1.0 - head / tail)) : 0.0;
    }
    return w;
}

/// Step schedule and ancilla geometry for a TTS run.
struct TTSConfig {
    int order = 3;        // K_r
    double tau = 0.0;     // GeV^-1, = ln2 / Lambda
    int steps = 1;        // r
    double epsilon = 0.0; // informational
};

inline TTSConfig make_tts_config(const HamiltonianModel& model, int order, int steps,
                                 double epsilon = 0.0) {
    if (order < 1 || steps < 0) throw ConfigError("make_tts_config: order >= 1, steps >= 0");
    if (!(model.lambda_norm > 0.0)) throw ConfigError("make_tts_config: model has zero norm");
    TTSConfig c;
    c.order = order;
    c.tau = std::log(2.0) / model.lambda_norm;
    c.steps = steps;
    c.epsilon = epsilon;
    return c;
}

/// Register geometry: system bits low, then the K unary y0 bits, then the
/// K index registers y_1..y_K of ceil(log2 L) bits each.
struct AncillaLayout {
    int n_sys = 0;
    int order = 1;     // K
    int index_bits = 0;  // ceil(log2 L)

    int total_qubits() const { return n_sys + order + order * index_bits; }
    int y0_bit(int k) const { return n_sys + (k - 1); }  // k in 1..K
    uint64_t y0_mask(int k) const { return uint64_t{1} << y0_bit(k); }
    int yk_offset(int k) const { return n_sys + order + (k - 1) * index_bits; }
    uint64_t yk_mask(int k) const { return ((uint64_t{1} << index_bits) - 1) << yk_offset(k); }
    uint64_t ancilla_mask() const {
        return ((uint64_t{1} << total_qubits()) - 1) & ~((uint64_t{1} << n_sys) - 1);
    }
    uint64_t system_mask() const { return (uint64_t{1} << n_sys) - 1; }
};

inline AncillaLayout make_ancilla_layout(const HamiltonianModel& model, const TTSConfig& cfg) {
    AncillaLayout lay;
    lay.n_sys = model.n_qubits;
    lay.order = cfg.order;
    lay.index_bits = bits_for(static_cast<int>(model.total_terms()));
    return lay;
}

namespace tts_detail {

/// Concatenated |alpha| table over kinetic-then-interaction terms; signs are
/// absorbed into the selected unitaries.
inline std::vector<double> coefficient_table(const HamiltonianModel& m) {
    std::vector<double> alpha;
    alpha.reserve(m.total_terms());
    for (const auto& t : m.kinetic_terms) alpha.push_back(std::abs(t.coeff));
    for (const auto& t : m.interaction_terms) alpha.push_back(std::abs(t.coeff));
    return alpha;
}

/// System-register bit conversions for qft blocks (chars count from the left).
inline int block_bit_offset(const QftBlock& b, int n_sys) { return n_sys - b.offset - b.width; }

}  // namespace tts_detail

/// Preparation operator P = P_y0 x P_y1 x ... x P_yK: the unary R_y chain on
/// y0 and an exact amplitude load of sqrt(alpha_l / Lambda) on each index
/// register.  Coefficients must be positive (signs belong to the unitaries).
inline std::vector<GateOp> prepare_operator(const HamiltonianModel& model, const TTSConfig& cfg,
                                            const AncillaLayout& lay) {
    auto alpha = tts_detail::coefficient_table(model);
    for (double a : alpha)
        if (!(a > 0.0)) throw ConfigError("prepare_operator: expansion coefficients must be positive");
    TaylorWeights w = taylor_weights(cfg.order, model.lambda_norm * cfg.tau);

    std::vector<GateOp> seq;
    // y0 unary chain: first rotation uncontrolled, then each next qubit
    // controlled on its predecessor.
    for (int k = 1; k <= cfg.order; ++k) {
        GateOp g;
        g.kind = GateOp::Kind::RotateY;
        g.target = lay.y0_bit(k);
        g.theta = w.thetas[static_cast<size_t>(k - 1)];
        if (k > 1) {
            g.ctrl_mask = lay.y0_mask(k - 1);
            g.ctrl_val = lay.y0_mask(k - 1);
        }
        seq.push_back(g);
    }
    if (lay.index_bits > 0) {
        auto v = std::make_shared<std::vector<double>>(size_t{1} << lay.index_bits, 0.0);
        for (size_t l = 0; l < alpha.size(); ++l)
            (*v)[l] = std::sqrt(alpha[l] / model.lambda_norm);
        for (int k = 1; k <= cfg.order; ++k) {
            GateOp g;
            g.kind = GateOp::Kind::Householder;
            g.offset = lay.yk_offset(k);
            g.width = lay.index_bits;
            g.hvec = v;
            seq.push_back(g);
        }
    }
    return seq;
}

/// Selection operator S |k, l_1..l_k> |psi> = |k, l_1..l_k> V_j |psi> with
/// V_j = (-i)^k h~_{l_1} ... h~_{l_k}.  Slot K runs first so that h~_{l_k}
/// is applied to the state before h~_{l_{k-1}}.  Interaction unitaries are
/// conjugated by the shifted Fourier transform; because the transform is
/// uncontrolled it wraps the whole slot, and the inner F F^dag pairs between
/// interaction terms are already fused away.
inline std::vector<GateOp> select_operator(const HamiltonianModel& model, const TTSConfig& cfg,
                                           const AncillaLayout& lay) {
    const size_t l1 = model.l1(), l_total = model.total_terms();
    if (l_total == 0) return {};  // H = 0: S is the identity
    if (l_total > (size_t{1} << lay.index_bits))
        throw ConfigError("select_operator: index register too narrow");

    std::vector<GateOp> seq;
    auto push_term = [&](const PauliTerm& t, int k, uint64_t idx) {
        GateOp g;
        g.kind = GateOp::Kind::PauliString;
        g.masks = masks_of(t.ops);
        g.phase = t.coeff < 0 ? cplx{-1, 0} : cplx{1, 0};
        g.ctrl_mask = lay.y0_mask(k) | lay.yk_mask(k);
        g.ctrl_val = lay.y0_mask(k) | (idx << lay.yk_offset(k));
        seq.push_back(g);
    };

    for (int k = cfg.order; k >= 1; --k) {
        // the S^dag phase: one factor of (-i) per activated order
        GateOp ph;
        ph.kind = GateOp::Kind::Phase;
        ph.phase = cplx{0, -1};
        ph.ctrl_mask = lay.y0_mask(k);
        ph.ctrl_val = lay.y0_mask(k);
        seq.push_back(ph);

        for (size_t l = 0; l < l1; ++l) push_term(model.kinetic_terms[l], k, l);

        if (!model.interaction_terms.empty()) {
            for (const auto& b : model.qft_blocks) {
                GateOp f;
                f.kind = GateOp::Kind::ShiftedQft;
                f.offset = tts_detail::block_bit_offset(b, lay.n_sys);
                f.width = b.width;
                f.inverse = false;
                seq.push_back(f);
            }
            for (size_t l = 0; l < model.interaction_terms.size(); ++l)
                push_term(model.interaction_terms[l], k, l1 + l);
            for (auto it = model.qft_blocks.rbegin(); it != model.qft_blocks.rend(); ++it) {
                GateOp f;
                f.kind = GateOp::Kind::ShiftedQft;
                f.offset = tts_detail::block_bit_offset(*it, lay.n_sys);
                f.width = it->width;
                f.inverse = true;
                seq.push_back(f);
            }
        }
    }
    return seq;
}

/// The walk operator W = (P^dag x 1) S (P x 1), which block encodes
/// U_K(tau) / N_K on the ancilla-|0> subspace.
struct WalkOperator {
    std::vector<GateOp> prepare;
    std::vector<GateOp> select;

    void apply_to(StateVector& sv) const {
        apply_sequence(sv, prepare);
        apply_sequence(sv, select);
        apply_adjoint_sequence(sv, prepare);
    }
    void apply_adjoint_to(StateVector& sv) const {
        apply_sequence(sv, prepare);
        apply_adjoint_sequence(sv, select);
        apply_adjoint_sequence(sv, prepare);
    }
};

inline WalkOperator walk_operator(const HamiltonianModel& model, const TTSConfig& cfg,
                                  const AncillaLayout& lay) {
    return {prepare_operator(model, cfg, lay), select_operator(model, cfg, lay)};
}

struct OaaStepRecord {
    double success_probability = 0.0;
};

/// One OAA-amplified evolution step: Q W with Q = -W R W^dag R, then exact
/// postselection of the ancilla registers on |0>.
inline OaaStepRecord oaa_step(StateVector& sv, const WalkOperator& w, const AncillaLayout& lay) {
    const uint64_t anc = lay.ancilla_mask();
    w.apply_to(sv);
    apply_reflection(sv, anc);
    w.apply_adjoint_to(sv);
    apply_reflection(sv, anc);
    apply_phase(sv, cplx{-1, 0});
    w.apply_to(sv);
    OaaStepRecord rec;
    rec.success_probability = project_and_renormalize(sv, anc, 0);
    return rec;
}

/// Full r-step statevector evolution with deterministic postselection; the
/// ancillas come back to |0> exactly at the end of each step.  `hook`, when
/// set, sees the full register after every recorded step.
inline Trajectory tts_evolve(const HamiltonianModel& model, const TTSConfig& cfg,
                             uint64_t initial_code,
                             const std::function<void(int, const StateVector&)>& hook = {}) {
    AncillaLayout lay = make_ancilla_layout(model, cfg);
    WalkOperator w = walk_operator(model, cfg, lay);
    StateVector sv(lay.total_qubits());
    sv.set_basis_state(initial_code);  // ancillas |0>, system in the initial label

    const size_t sys_dim = size_t{1} << lay.n_sys;
    auto record = [&](int step, double success) {
        StepRecord rec;
        rec.step = step;
        rec.x_plus = step * cfg.tau;
        rec.ancilla_success = success;
        rec.probs.resize(sys_dim);
        for (size_t i = 0; i < sys_dim; ++i) rec.probs[i] = std::norm(sv[i]);
        return rec;
    };

    Trajectory traj;
    traj.steps.push_back(record(0, 1.0));
    if (hook) hook(0, sv);
    for (int step = 1; step <= cfg.steps; ++step) {
        OaaStepRecord rec = oaa_step(sv, w, lay);
        traj.steps.push_back(record(step, rec.success_probability));
        if (hook) hook(step, sv);
    }
    return traj;
}

}  // namespace lfsim
