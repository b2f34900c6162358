#pragma once

#include <cmath>
#include <vector>

#include "lfsim/hamiltonian.hpp"
#include "lfsim/statevector.hpp"
#include "lfsim/tts.hpp"

namespace lfsim {

struct TrotterConfig {
    double tau_prime = 0.0;  // GeV^-1
    int steps = 1;           // r'
    double epsilon = 0.0;
};

/// r' = ceil((Lambda x+)^2 / epsilon) steps suffice for first order.
inline int trotter_steps_for(double epsilon, double lambda, double x_plus) {
    if (!(epsilon > 0.0)) throw ConfigError("trotter_steps_for: epsilon must be positive");
    double lx = lambda * x_plus;
    return static_cast<int>(std::ceil(lx * lx / epsilon));
}

/// One first-order step: the kinetic string exponentials, then the
/// interaction exponentials inside the Fourier conjugation.  Each Pauli
/// exponential is exact, so the only error is the splitting error.
inline void trotter_step(StateVector& sv, const HamiltonianModel& model, double tau_prime) {
    if (sv.n_qubits() != model.n_qubits)
        throw DimensionError("trotter_step: state width does not match model");
    for (const auto& t : model.kinetic_terms)
        apply_pauli_exp(sv, tau_prime * t.coeff, masks_of(t.ops));
    if (model.interaction_terms.empty()) return;
    const int n = model.n_qubits;
    for (const auto& b : model.qft_blocks)
        apply_shifted_qft(sv, n - b.offset - b.width, b.width, false);
    for (const auto& t : model.interaction_terms)
        apply_pauli_exp(sv, tau_prime * t.coeff, masks_of(t.ops));
    for (auto it = model.qft_blocks.rbegin(); it != model.qft_blocks.rend(); ++it)
        apply_shifted_qft(sv, n - it->offset - it->width, it->width, true);
}

inline Trajectory trotter_evolve(const HamiltonianModel& model, const TrotterConfig& cfg,
                                 uint64_t initial_code) {
    if (!(cfg.tau_prime > 0.0) || cfg.steps < 0)
        throw ConfigError("trotter_evolve: tau_prime > 0 and steps >= 0 required");
    StateVector sv(model.n_qubits);
    sv.set_basis_state(initial_code);
    Trajectory traj;
    auto record = [&](int step) {
        StepRecord rec;
        rec.step = step;
        rec.x_plus = step * cfg.tau_prime;
        rec.probs.resize(sv.dim());
        for (size_t i = 0; i < sv.dim(); ++i) rec.probs[i] = std::norm(sv[i]);
        traj.steps.push_back(std::move(rec));
    };
    record(0);
    for (int step = 1; step <= cfg.steps; ++step) {
        trotter_step(sv, model, cfg.tau_prime);
        record(step);
    }
    return traj;
}

}  // namespace lfsim
