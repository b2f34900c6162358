#include <doctest.h>

#include <random>

#include "lfsim/reference.hpp"
#include "lfsim/tts.hpp"
#include "test_support.hpp"

using namespace lfsim;
using lfsim::testing::random_state;
using lfsim::testing::random_toy_model;
using lfsim::testing::to_dense;

namespace {

constexpr double kLn2 = 0.6931471805599453;

/// Block of W on the ancilla-|0> subspace, extracted column by column from
/// the gate-level circuit.
DenseOperator walk_block(const HamiltonianModel& m, const TTSConfig& cfg) {
    AncillaLayout lay = make_ancilla_layout(m, cfg);
    WalkOperator w = walk_operator(m, cfg, lay);
    const long dim = 1l << m.n_qubits;
    DenseOperator block(dim, dim);
    for (long col = 0; col < dim; ++col) {
        StateVector sv(lay.total_qubits());
        sv.set_basis_state(static_cast<uint64_t>(col));
        w.apply_to(sv);
        for (long row = 0; row < dim; ++row) block(row, col) = sv[static_cast<size_t>(row)];
    }
    return block;
}

/// Independent oracle: U_K / N_K by explicit enumeration of the multi-index
/// sum over (k, l_1..l_k), dense products throughout.
DenseOperator enumeration_block(const HamiltonianModel& m, int order, double tau) {
    const long dim = 1l << m.n_qubits;
    DenseOperator f = qft_matrix(m, false);
    std::vector<DenseOperator> h_tilde;
    std::vector<double> alpha;
    for (const auto& t : m.kinetic_terms) {
        h_tilde.push_back((t.coeff < 0 ? -1.0 : 1.0) * pauli_string_matrix(t.ops));
        alpha.push_back(std::abs(t.coeff));
    }
    for (const auto& t : m.interaction_terms) {
        h_tilde.push_back((t.coeff < 0 ? -1.0 : 1.0) *
                          DenseOperator(f.adjoint() * pauli_string_matrix(t.ops) * f));
        alpha.push_back(std::abs(t.coeff));
    }
    const size_t L = alpha.size();
    DenseOperator sum = DenseOperator::Identity(dim, dim);  // k = 0
    double n_k = 1.0;
    std::vector<size_t> idx;
    for (int k = 1; k <= order; ++k) {
        double k_fact = 1.0;
        for (int i = 2; i <= k; ++i) k_fact *= i;
        idx.assign(static_cast<size_t>(k), 0);
        while (true) {
            double eta = std::pow(tau, k) / k_fact;
            DenseOperator v = DenseOperator::Identity(dim, dim);
            for (size_t slot = 0; slot < idx.size(); ++slot) {
                eta *= alpha[idx[slot]];
                v = (v * h_tilde[idx[slot]]).eval();  // h_{l_1} ... h_{l_k}
            }
            cplx mi{0, -1};
            cplx phase = 1.0;
            for (int i = 0; i < k; ++i) phase *= mi;  // (-i)^k
            sum += eta * phase * v;
            n_k += eta;
            // advance the multi-index
            size_t slot = 0;
            while (slot < idx.size() && ++idx[slot] == L) {
                idx[slot] = 0;
                ++slot;
            }
            if (slot == idx.size()) break;
        }
    }
    return sum / n_k;
}

}  // namespace

TEST_CASE("normalization factor partial sums") {
    CHECK(normalization_factor(0, kLn2) == 1.0);
    CHECK(normalization_factor(60, kLn2) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(normalization_factor(3, kLn2) == doctest::Approx(1.9888778).epsilon(1e-7));
}

TEST_CASE("truncation order selection") {
    // single step, eps 0.02: bound 0.1110 at K=2, 0.019236 at K=3
    CHECK(truncation_order_for(0.02, 1.0, kLn2) == 3);
    CHECK(truncation_order_for(100.0, 1.0, kLn2) == 1);
    // demo run: Lambda = 0.110024069, x+ = 25 tau, total eps 0.01 -> K_r = 5
    double lambda = 0.110024069;
    CHECK(truncation_order_for(0.01, lambda, 25.0 * kLn2 / lambda) == 5);
}

TEST_CASE("rotation angles realize the Taylor weights") {
    TaylorWeights w = taylor_weights(3, kLn2);
    CHECK(w.n_k == doctest::Approx(1.9888778).epsilon(1e-7));
    CHECK(w.thetas[0] == doctest::Approx(1.565204).epsilon(1e-5));

    // statevector readout of the y0 marginal: P(k) = (L tau)^k / k! / N_K
    std::mt19937_64 rng(2);
    HamiltonianModel m = random_toy_model(1, 1, 1, false, rng);
    TTSConfig cfg = make_tts_config(m, 3, 1);
    AncillaLayout lay = make_ancilla_layout(m, cfg);
    auto prep = prepare_operator(m, cfg, lay);
    StateVector sv(lay.total_qubits());
    apply_sequence(sv, prep);
    double lt = m.lambda_norm * cfg.tau;
    CHECK(lt == doctest::Approx(kLn2).epsilon(1e-12));
    std::vector<double> unary(4, 0.0);  // P(k), k = number of leading ones
    auto probs = block_marginal(sv, lay.y0_bit(1), 3);
    for (size_t code = 0; code < probs.size(); ++code) {
        // unary states are 0b000, 0b001, 0b011, 0b111 (bit k-1 set for order k)
        int k = 0;
        while (k < 3 && (code >> k) & 1) ++k;
        bool valid_unary = (code == (uint64_t{1} << k) - 1);
        if (!valid_unary) {
            CHECK(probs[code] < 1e-24);
            continue;
        }
        unary[static_cast<size_t>(k)] = probs[code];
    }
    double fact = 1.0;
    for (int k = 0; k <= 3; ++k) {
        if (k > 0) fact *= k;
        CHECK(unary[static_cast<size_t>(k)] ==
              doctest::Approx(std::pow(lt, k) / fact / w.n_k).epsilon(1e-10));
    }
}

TEST_CASE("prepare readout reproduces eta_j / N_K on a two-term toy") {
    std::mt19937_64 rng(5);
    HamiltonianModel m = random_toy_model(1, 1, 1, false, rng);
    REQUIRE(m.total_terms() == 2);
    TTSConfig cfg = make_tts_config(m, 2, 1);
    AncillaLayout lay = make_ancilla_layout(m, cfg);
    StateVector sv(lay.total_qubits());
    apply_sequence(sv, prepare_operator(m, cfg, lay));

    std::vector<double> alpha;
    for (const auto& t : m.kinetic_terms) alpha.push_back(std::abs(t.coeff));
    for (const auto& t : m.interaction_terms) alpha.push_back(std::abs(t.coeff));
    double n_k = normalization_factor(2, m.lambda_norm * cfg.tau);

    // |<j|P|0>|^2 marginalized over registers beyond order k
    auto amp_sq = [&](int k, std::vector<int> ls) {
        double p = 0.0;
        for (size_t i = 0; i < sv.dim(); ++i) {
            uint64_t y0 = (i >> lay.y0_bit(1)) & ((1u << 2) - 1);
            uint64_t want_y0 = (uint64_t{1} << k) - 1;
            if (y0 != want_y0) continue;
            bool match = true;
            for (int slot = 0; slot < k; ++slot) {
                uint64_t l = (i >> lay.yk_offset(slot + 1)) & ((uint64_t{1} << lay.index_bits) - 1);
                if (l != static_cast<uint64_t>(ls[static_cast<size_t>(slot)])) match = false;
            }
            if (match) p += std::norm(sv[i]);
        }
        return p;
    };
    CHECK(amp_sq(0, {}) == doctest::Approx(1.0 / n_k).epsilon(1e-10));
    for (int l = 0; l < 2; ++l)
        CHECK(amp_sq(1, {l}) == doctest::Approx(cfg.tau * alpha[static_cast<size_t>(l)] / n_k).epsilon(1e-10));
    for (int l1 = 0; l1 < 2; ++l1)
        for (int l2 = 0; l2 < 2; ++l2)
            CHECK(amp_sq(2, {l1, l2}) ==
                  doctest::Approx(cfg.tau * cfg.tau / 2.0 * alpha[static_cast<size_t>(l1)] *
                                  alpha[static_cast<size_t>(l2)] / n_k)
                      .epsilon(1e-10));
}

TEST_CASE("negative coefficients are rejected by prepare, signs ride the unitaries") {
    HamiltonianModel m;
    m.n_qubits = 1;
    m.kinetic_terms = {{-0.5, "Z"}};
    m.lambda_norm = 0.5;
    TTSConfig cfg = make_tts_config(m, 1, 1);
    AncillaLayout lay = make_ancilla_layout(m, cfg);
    CHECK_NOTHROW(prepare_operator(m, cfg, lay));  // |alpha| table is positive
    // the selected unitary carries the sign
    auto sel = select_operator(m, cfg, lay);
    bool found_negative = false;
    for (const auto& g : sel)
        if (g.kind == GateOp::Kind::PauliString && g.phase == cplx{-1, 0}) found_negative = true;
    CHECK(found_negative);
}

TEST_CASE("selection leaves the system alone when all y0 bits are zero") {
    std::mt19937_64 rng(7);
    HamiltonianModel m = random_toy_model(2, 2, 2, true, rng);
    TTSConfig cfg = make_tts_config(m, 2, 1);
    AncillaLayout lay = make_ancilla_layout(m, cfg);
    auto sel = select_operator(m, cfg, lay);
    DenseVector in = random_state(m.n_qubits, rng);
    StateVector sv(lay.total_qubits());
    for (long i = 0; i < in.size(); ++i) sv[static_cast<size_t>(i)] = in(i);  // ancillas all zero
    apply_sequence(sv, sel);
    for (long i = 0; i < in.size(); ++i)
        CHECK(std::abs(sv[static_cast<size_t>(i)] - in(i)) < 1e-12);
}

TEST_CASE("single-branch selection applies (-i) X") {
    HamiltonianModel m;
    m.n_qubits = 1;
    m.interaction_terms = {{0.5, "X"}};
    m.lambda_norm = 0.5;
    TTSConfig cfg = make_tts_config(m, 1, 1);
    AncillaLayout lay = make_ancilla_layout(m, cfg);
    auto sel = select_operator(m, cfg, lay);
    // state |y0=1>|psi>, psi = |0>
    StateVector sv(lay.total_qubits());
    sv.set_basis_state(lay.y0_mask(1));
    apply_sequence(sv, sel);
    CHECK(std::abs(sv[lay.y0_mask(1) | 1] - cplx{0, -1}) < 1e-14);  // (-i) X |0> = -i |1>
}

TEST_CASE("walk block matches the enumeration oracle on a two-term toy") {
    std::mt19937_64 rng(11);
    HamiltonianModel m = random_toy_model(1, 1, 1, false, rng);
    TTSConfig cfg = make_tts_config(m, 2, 1);
    DenseOperator block = walk_block(m, cfg);
    DenseOperator oracle = enumeration_block(m, 2, cfg.tau);
    CHECK((block - oracle).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("walk block equals the Taylor sum over N_K for random toys") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 6; ++trial) {
        int n_sys = 1 + trial % 3;
        HamiltonianModel m = random_toy_model(n_sys, 2, 2, trial % 2 == 1, rng);
        int order = 1 + trial % 3;
        TTSConfig cfg = make_tts_config(m, order, 1);
        DenseOperator block = walk_block(m, cfg);
        DenseOperator taylor = taylor_unitary(dense_hamiltonian(m), order, cfg.tau) /
                               normalization_factor(order, m.lambda_norm * cfg.tau);
        CHECK((block - taylor).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("single-term model walks with zero-width index registers") {
    // L = 1: y_k registers cost no qubits and y0 alone carries the weights
    HamiltonianModel m;
    m.n_qubits = 1;
    m.interaction_terms = {{0.5, "X"}};
    m.lambda_norm = 0.5;
    TTSConfig cfg = make_tts_config(m, 3, 1);
    AncillaLayout lay = make_ancilla_layout(m, cfg);
    CHECK(lay.index_bits == 0);
    CHECK(lay.total_qubits() == 1 + 3);
    DenseOperator block = walk_block(m, cfg);
    DenseOperator taylor = taylor_unitary(dense_hamiltonian(m), 3, cfg.tau) /
                           normalization_factor(3, m.lambda_norm * cfg.tau);
    CHECK((block - taylor).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("one-qubit H = 0.5 X at K = 3 block encodes the Taylor polynomial") {
    HamiltonianModel m;
    m.n_qubits = 1;
    m.kinetic_terms = {};
    m.interaction_terms = {{0.5, "X"}};
    m.lambda_norm = 0.5;
    TTSConfig cfg = make_tts_config(m, 3, 1);
    CHECK(m.lambda_norm * cfg.tau == doctest::Approx(kLn2).epsilon(1e-14));
    DenseOperator block = walk_block(m, cfg);
    // hand-built H and its Taylor sum
    DenseOperator h(2, 2);
    h << 0, 0.5, 0.5, 0;
    DenseOperator sum = DenseOperator::Identity(2, 2);
    DenseOperator pow = DenseOperator::Identity(2, 2);
    double fact = 1.0;
    for (int k = 1; k <= 3; ++k) {
        fact *= k;
        pow = (pow * (cplx{0, -cfg.tau} * h)).eval();
        sum += pow / fact;
    }
    sum /= normalization_factor(3, kLn2);
    CHECK((block - sum).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("empty model walks to the identity block") {
    HamiltonianModel m;
    m.n_qubits = 1;
    TTSConfig cfg;
    cfg.order = 2;
    cfg.tau = 0.0;
    cfg.steps = 0;
    DenseOperator block = walk_block(m, cfg);
    CHECK((block - DenseOperator::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("oaa amplification equals the dense step matrix") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 5; ++trial) {
        HamiltonianModel m = random_toy_model(2, 2, 2, trial % 2 == 0, rng);
        TTSConfig cfg = make_tts_config(m, 3, 1);
        AncillaLayout lay = make_ancilla_layout(m, cfg);
        WalkOperator w = walk_operator(m, cfg, lay);
        TtsStepEmulator em(m, 3, cfg.tau);

        DenseVector psi = random_state(m.n_qubits, rng);
        StateVector sv(lay.total_qubits());
        for (long i = 0; i < psi.size(); ++i) sv[static_cast<size_t>(i)] = psi(i);
        OaaStepRecord rec = oaa_step(sv, w, lay);

        DenseVector want = psi;
        double p = em.step(want);
        CHECK(rec.success_probability == doctest::Approx(p).epsilon(1e-10));
        for (long i = 0; i < want.size(); ++i)
            CHECK(std::abs(sv[static_cast<size_t>(i)] - want(i)) < 1e-10);
    }
}

TEST_CASE("success amplitude is exactly one at N_K = 2") {
    // 3/N - 4/N^3 = 1 at N = 2
    double n = 2.0;
    CHECK(3.0 / n - 4.0 / (n * n * n) == doctest::Approx(1.0));
}

TEST_CASE("success probability at K=3 and Lambda tau = ln2") {
    double n = normalization_factor(3, kLn2);
    double amp = 3.0 / n - 4.0 / (n * n * n);
    CHECK(amp * amp == doctest::Approx(0.9999).epsilon(1e-3));
}

TEST_CASE("single-step error against the exact step obeys the tail bound") {
    std::mt19937_64 rng(19);
    double bound = 2.0 - normalization_factor(3, kLn2);  // sum_{k>3} (ln2)^k / k!
    CHECK(bound == doctest::Approx(0.0111222).epsilon(1e-4));
    for (int trial = 0; trial < 4; ++trial) {
        HamiltonianModel m = random_toy_model(2, 2, 2, trial % 2 == 0, rng);
        TTSConfig cfg = make_tts_config(m, 3, 1);
        TtsStepEmulator em(m, 3, cfg.tau);
        ExactEvolver ev(dense_hamiltonian(m));
        DenseVector psi = random_state(2, rng);
        DenseVector circuit = psi, exact = ev.evolve(psi, cfg.tau);
        em.step(circuit);
        CHECK((circuit - exact).norm() <= bound);
    }
}

TEST_CASE("near-unitarity of the truncated series at Lambda tau = ln2") {
    std::mt19937_64 rng(23);
    double nk = normalization_factor(3, kLn2);
    double bound = 2.0 * std::abs(nk - 2.0) + (nk - 2.0) * (nk - 2.0);
    for (int trial = 0; trial < 4; ++trial) {
        HamiltonianModel m = random_toy_model(2, 2, 2, false, rng);
        double tau = kLn2 / m.lambda_norm;
        DenseOperator u = taylor_unitary(dense_hamiltonian(m), 3, tau);
        DenseOperator dev = u * u.adjoint() - DenseOperator::Identity(4, 4);
        CHECK(spectral_norm(dev) <= bound + 1e-12);
    }
}

TEST_CASE("four-step toy evolution stays within the accumulated bound") {
    std::mt19937_64 rng(29);
    HamiltonianModel m = random_toy_model(1, 1, 1, false, rng);
    TTSConfig cfg = make_tts_config(m, 3, 4);
    Trajectory traj = tts_evolve(m, cfg, 0);
    ExactEvolver ev(dense_hamiltonian(m));
    DenseVector psi = DenseVector::Zero(2);
    psi(0) = 1.0;
    DenseVector exact = ev.evolve(psi, 4.0 * cfg.tau);
    double bound = 4.0 * (2.0 - normalization_factor(3, kLn2));
    // compare probability distributions (trajectory stores probabilities)
    const auto& last = traj.steps.back();
    double dist = 0.0;
    for (size_t i = 0; i < last.probs.size(); ++i)
        dist += std::abs(last.probs[i] - std::norm(exact(static_cast<long>(i))));
    CHECK(dist <= 2.0 * bound);  // total variation <= 2 ||delta psi||
    for (const auto& s : traj.steps)
        if (s.step > 0) CHECK(s.ancilla_success > 0.999);
}

TEST_CASE("demo schedule: tau Lambda = ln2, x+ = r tau near the printed values") {
    HamiltonianModel m = demo_fixture();
    TTSConfig cfg = make_tts_config(m, 3, 25);
    CHECK(cfg.tau * m.lambda_norm == doctest::Approx(kLn2).epsilon(1e-12));
    CHECK(cfg.tau == doctest::Approx(6.3).epsilon(1e-3));
    CHECK(25.0 * cfg.tau == doctest::Approx(157.5).epsilon(1e-4));
}

TEST_CASE("evolve with zero steps returns only the initial state") {
    std::mt19937_64 rng(31);
    HamiltonianModel m = random_toy_model(2, 1, 1, false, rng);
    TTSConfig cfg = make_tts_config(m, 2, 0);
    Trajectory traj = tts_evolve(m, cfg, 0b01);
    REQUIRE(traj.steps.size() == 1);
    CHECK(traj.steps[0].probs[0b01] == doctest::Approx(1.0));
}
