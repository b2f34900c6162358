#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <complex>
#include <vector>

#include "lfsim/errors.hpp"
#include "lfsim/hamiltonian.hpp"
#include "lfsim/observables.hpp"
#include "lfsim/statevector.hpp"

namespace lfsim {

using DenseOperator = Eigen::MatrixXcd;
using DenseVector = Eigen::VectorXcd;

/// Dense matrix of a Pauli string (ops[0] = most significant qubit).
inline DenseOperator pauli_string_matrix(const std::string& ops) {
    static const Eigen::Matrix2cd I = Eigen::Matrix2cd::Identity();
    Eigen::Matrix2cd X, Y, Z;
    X << 0, 1, 1, 0;
    Y << cplx(0, 0), cplx(0, -1), cplx(0, 1), cplx(0, 0);
    Z << 1, 0, 0, -1;
    DenseOperator m = DenseOperator::Identity(1, 1);
    for (char c : ops) {
        const Eigen::Matrix2cd* s = nullptr;
        switch (c) {
            case 'I': s = &I; break;
            case 'X': s = &X; break;
            case 'Y': s = &Y; break;
            case 'Z': s = &Z; break;
            default: throw EncodingError("pauli_string_matrix: invalid character");
        }
        // ops[0] is the most significant qubit, so it stays the left factor
        m = Eigen::kroneckerProduct(m, *s).eval();
    }
    return m;
}

inline DenseOperator sum_terms_matrix(const std::vector<PauliTerm>& terms, int n_qubits) {
    const long dim = 1l << n_qubits;
    DenseOperator h = DenseOperator::Zero(dim, dim);
    for (const auto& t : terms) h += t.coeff * pauli_string_matrix(t.ops);
    return h;
}

/// Full shifted-DFT matrix over the system register: the tensor product of
/// per-block transforms, identity on unmarked qubits.
inline DenseOperator qft_matrix(const HamiltonianModel& m, bool inverse = false) {
    const long dim = 1l << m.n_qubits;
    DenseOperator f = DenseOperator::Identity(1, 1);
    int covered = 0;
    for (const auto& b : m.qft_blocks) {
        if (b.offset != covered) {
            long pad = 1l << (b.offset - covered);
            f = Eigen::kroneckerProduct(f, DenseOperator::Identity(pad, pad)).eval();
            covered = b.offset;
        }
        auto blk = shifted_qft_matrix(b.width, inverse);
        const long bd = 1l << b.width;
        DenseOperator fb(bd, bd);
        for (long r = 0; r < bd; ++r)
            for (long c = 0; c < bd; ++c) fb(r, c) = (*blk)[static_cast<size_t>(r * bd + c)];
        f = Eigen::kroneckerProduct(f, fb).eval();
        covered += b.width;
    }
    if (f.rows() < dim) {
        long pad = dim / f.rows();
        f = Eigen::kroneckerProduct(f, DenseOperator::Identity(pad, pad)).eval();
    }
    return f;
}

/// H = sum kinetic + F^dag (sum interaction) F as an explicit matrix.
inline DenseOperator dense_hamiltonian(const HamiltonianModel& m) {
    DenseOperator h = sum_terms_matrix(m.kinetic_terms, m.n_qubits);
    if (!m.interaction_terms.empty()) {
        DenseOperator v = sum_terms_matrix(m.interaction_terms, m.n_qubits);
        DenseOperator f = qft_matrix(m, false);
        h += f.adjoint() * v * f;
    }
    return h;
}

/// e^{-i H t} via eigendecomposition; spectra can be reused across t.
class ExactEvolver {
  public:
    explicit ExactEvolver(const DenseOperator& h) {
        if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, h.cwiseAbs().maxCoeff()))
            throw DimensionError("ExactEvolver: Hamiltonian is not Hermitian");
        Eigen::SelfAdjointEigenSolver<DenseOperator> es(h);
        vecs_ = es.eigenvectors();
        vals_ = es.eigenvalues();
    }

    DenseOperator unitary(double t) const {
        DenseVector ph(vals_.size());
        for (long i = 0; i < vals_.size(); ++i) {
            double a = -vals_(i) * t;
            ph(i) = cplx(std::cos(a), std::sin(a));
        }
        return vecs_ * ph.asDiagonal() * vecs_.adjoint();
    }

    DenseVector evolve(const DenseVector& psi, double t) const { return unitary(t) * psi; }

    const Eigen::VectorXd& eigenvalues() const { return vals_; }

  private:
    DenseOperator vecs_;
    Eigen::VectorXd vals_;
};

inline DenseOperator exact_evolve_unitary(const DenseOperator& h, double t) {
    return ExactEvolver(h).unitary(t);
}

inline double spectral_norm(const DenseOperator& m) {
    Eigen::SelfAdjointEigenSolver<DenseOperator> es(DenseOperator(m.adjoint() * m));
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

/// Truncated Taylor sum U_K(tau) = sum_{k<=K} (-i tau H)^k / k!.
inline DenseOperator taylor_unitary(const DenseOperator& h, int order, double tau) {
    const long dim = h.rows();
    DenseOperator u = DenseOperator::Identity(dim, dim);
    DenseOperator pow = DenseOperator::Identity(dim, dim);
    const cplx step = cplx(0, -tau);
    for (int k = 1; k <= order; ++k) {
        pow = (step / static_cast<double>(k)) * (h * pow).eval();
        u += pow;
    }
    return u;
}

/// Exact dense emulation of one OAA-amplified TTS step.  With the block
/// A = U_K / N_K, the projected circuit output is (3A - 4 A A^dag A)|psi>;
/// this is what the gate-level path realizes, so the two agree to rounding.
/// (The scalar form (3/N - 4/N^3) U_K of the amplification identity holds up
/// to the truncation tail, which the error-bound tests cover.)
class TtsStepEmulator {
  public:
    TtsStepEmulator(const HamiltonianModel& model, int order, double tau) {
        DenseOperator h = dense_hamiltonian(model);
        double nk = 0.0, term = 1.0;
        for (int k = 0; k <= order; ++k) {
            if (k > 0) term *= model.lambda_norm * tau / k;
            nk += term;
        }
        DenseOperator a = taylor_unitary(h, order, tau) / nk;
        m_ = 3.0 * a - 4.0 * (a * a.adjoint() * a).eval();
        n_k_ = nk;
    }

    /// Applies one step; returns the success probability |M psi|^2.
    double step(DenseVector& psi) const {
        psi = (m_ * psi).eval();
        double p = psi.squaredNorm();
        if (p < 1e-12) throw ProjectionError("TtsStepEmulator: vanishing success probability");
        psi /= std::sqrt(p);
        return p;
    }

    const DenseOperator& step_matrix() const { return m_; }
    double normalization() const { return n_k_; }

  private:
    DenseOperator m_;
    double n_k_ = 0.0;
};

namespace ref_detail {

inline StepRecord record_of(const DenseVector& psi, int step, double x_plus, double success) {
    StepRecord rec;
    rec.step = step;
    rec.x_plus = x_plus;
    rec.ancilla_success = success;
    rec.probs.resize(static_cast<size_t>(psi.size()));
    for (long i = 0; i < psi.size(); ++i) rec.probs[static_cast<size_t>(i)] = std::norm(psi(i));
    return rec;
}

}  // namespace ref_detail

/// Exact reference trajectory on the TTS step grid.
inline Trajectory exact_trajectory(const HamiltonianModel& model, double tau, int steps,
                                   uint64_t initial_code) {
    ExactEvolver ev(dense_hamiltonian(model));
    DenseOperator u = ev.unitary(tau);
    DenseVector psi = DenseVector::Zero(1l << model.n_qubits);
    psi(static_cast<long>(initial_code)) = 1.0;
    Trajectory traj;
    traj.steps.push_back(ref_detail::record_of(psi, 0, 0.0, std::numeric_limits<double>::quiet_NaN()));
    for (int s = 1; s <= steps; ++s) {
        psi = (u * psi).eval();
        traj.steps.push_back(
            ref_detail::record_of(psi, s, s * tau, std::numeric_limits<double>::quiet_NaN()));
    }
    return traj;
}

/// Classical matrix emulation of the OAA-amplified TTS evolution; matches the
/// gate-level statevector path step by step.
inline Trajectory tts_matrix_emulation(const HamiltonianModel& model, int order, double tau,
                                       int steps, uint64_t initial_code) {
    if ((1l << model.n_qubits) > (1l << 12))
        throw DimensionError("tts_matrix_emulation: basis too large for dense emulation");
    TtsStepEmulator em(model, order, tau);
    DenseVector psi = DenseVector::Zero(1l << model.n_qubits);
    psi(static_cast<long>(initial_code)) = 1.0;
    Trajectory traj;
    traj.steps.push_back(ref_detail::record_of(psi, 0, 0.0, 1.0));
    for (int s = 1; s <= steps; ++s) {
        double p = em.step(psi);
        traj.steps.push_back(ref_detail::record_of(psi, s, s * tau, p));
    }
    return traj;
}

}  // namespace lfsim
