#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lfsim/errors.hpp"
#include "lfsim/lattice.hpp"
#include "lfsim/pauli.hpp"

namespace lfsim {

/// Dense complex statevector over n qubits.  Qubit j is bit j of the
/// amplitude index; register blocks render most-significant bit first, so the
/// basis string of index u is the binary expansion of u left to right.
class StateVector {
  public:
    explicit StateVector(int n_qubits) : n_(n_qubits), amps_(size_t{1} << n_qubits, cplx{0, 0}) {
        amps_[0] = 1.0;
    }

    int n_qubits() const { return n_; }
    size_t dim() const { return amps_.size(); }
    cplx& operator[](size_t i) { return amps_[i]; }
    const cplx& operator[](size_t i) const { return amps_[i]; }
    std::vector<cplx>& amps() { return amps_; }
    const std::vector<cplx>& amps() const { return amps_; }

    void set_basis_state(uint64_t index) {
        std::fill(amps_.begin(), amps_.end(), cplx{0, 0});
        amps_.at(index) = 1.0;
    }

    double norm_sq() const {
        double s = 0.0;
        for (const cplx& a : amps_) s += std::norm(a);
        return s;
    }

  private:
    int n_;
    std::vector<cplx> amps_;
};

namespace sv_detail {

constexpr size_t kParallelCutoff = size_t{1} << 16;

/// Enumerates all indices x with (x & ~free_mask) == fixed, ascending.
/// Classic submask walk: O(1) per step.
template <typename F>
inline void for_each_masked(uint64_t free_mask, uint64_t fixed, F&& f) {
    uint64_t s = 0;
    while (true) {
        f(s | fixed);
        if (s == free_mask) break;
        s = (s - free_mask) & free_mask;
    }
}

inline cplx pauli_phase(const PauliMasks& m, uint64_t x) {
    return (__builtin_popcountll(x & m.z_mask) & 1) ? -m.premult : m.premult;
}

}  // namespace sv_detail

inline void check_controls(const StateVector& sv, uint64_t ctrl_mask, uint64_t ctrl_val,
                           uint64_t target_mask) {
    if (ctrl_mask & target_mask)
        throw DimensionError("controls overlap targets");
    uint64_t full = (sv.dim() - 1);
    if ((ctrl_mask | target_mask | ctrl_val) & ~full)
        throw DimensionError("qubit index out of range");
    if (ctrl_val & ~ctrl_mask) throw DimensionError("control value outside control mask");
}

/// phase * (Pauli string), restricted to the subspace where the control bits
/// match; identity elsewhere.
inline void apply_pauli_string(StateVector& sv, const PauliMasks& m, cplx phase = {1, 0},
                               uint64_t ctrl_mask = 0, uint64_t ctrl_val = 0) {
    check_controls(sv, ctrl_mask, ctrl_val, m.x_mask | m.z_mask);
    auto& a = sv.amps();
    const uint64_t full = sv.dim() - 1;
    if (m.x_mask == 0) {
        // diagonal action
        if (ctrl_mask == 0) {
            const int64_t n = static_cast<int64_t>(sv.dim());
            cplx p0 = phase * m.premult, p1 = -p0;
            const uint64_t zm = m.z_mask;
#pragma omp parallel for schedule(static) if (sv.dim() >= sv_detail::kParallelCutoff)
            for (int64_t x = 0; x < n; ++x)
                a[static_cast<size_t>(x)] *= (__builtin_popcountll(static_cast<uint64_t>(x) & zm) & 1) ? p1 : p0;
        } else {
            sv_detail::for_each_masked(full & ~ctrl_mask, ctrl_val, [&](uint64_t x) {
                a[x] *= phase * sv_detail::pauli_phase(m, x);
            });
        }
        return;
    }
    const uint64_t pivot = m.x_mask & (~m.x_mask + 1);  // lowest flip bit
    if (ctrl_mask == 0) {
        const int64_t pairs = static_cast<int64_t>(sv.dim() >> 1);
        const uint64_t pmask = pivot - 1;
#pragma omp parallel for schedule(static) if (sv.dim() >= sv_detail::kParallelCutoff)
        for (int64_t h = 0; h < pairs; ++h) {
            uint64_t hh = static_cast<uint64_t>(h);
            uint64_t x = ((hh & ~pmask) << 1) | (hh & pmask);
            uint64_t y = x ^ m.x_mask;
            cplx ax = a[x], ay = a[y];
            a[y] = phase * sv_detail::pauli_phase(m, x) * ax;
            a[x] = phase * sv_detail::pauli_phase(m, y) * ay;
        }
    } else {
        sv_detail::for_each_masked(full & ~(ctrl_mask | pivot), ctrl_val, [&](uint64_t x) {
            uint64_t y = x ^ m.x_mask;
            cplx ax = a[x], ay = a[y];
            a[y] = phase * sv_detail::pauli_phase(m, x) * ax;
            a[x] = phase * sv_detail::pauli_phase(m, y) * ay;
        });
    }
}

inline void apply_pauli_string(StateVector& sv, const std::string& ops, cplx phase = {1, 0},
                               uint64_t ctrl_mask = 0, uint64_t ctrl_val = 0) {
    apply_pauli_string(sv, masks_of(ops), phase, ctrl_mask, ctrl_val);
}

/// exp(-i theta P) for a Pauli string P (strings are involutory, so the
/// exponential is cos(theta) 1 - i sin(theta) P, applied exactly).
inline void apply_pauli_exp(StateVector& sv, double theta, const PauliMasks& m) {
    auto& a = sv.amps();
    const double c = std::cos(theta), s = std::sin(theta);
    const cplx mis{0.0, -s};
    if (m.x_mask == 0) {
        cplx e0 = c + mis * m.premult, e1 = c - mis * m.premult;
        const uint64_t zm = m.z_mask;
        const int64_t n = static_cast<int64_t>(sv.dim());
#pragma omp parallel for schedule(static) if (sv.dim() >= sv_detail::kParallelCutoff)
        for (int64_t x = 0; x < n; ++x)
            a[static_cast<size_t>(x)] *= (__builtin_popcountll(static_cast<uint64_t>(x) & zm) & 1) ? e1 : e0;
        return;
    }
    const uint64_t pivot = m.x_mask & (~m.x_mask + 1);
    const uint64_t pmask = pivot - 1;
    const int64_t pairs = static_cast<int64_t>(sv.dim() >> 1);
#pragma omp parallel for schedule(static) if (sv.dim() >= sv_detail::kParallelCutoff)
    for (int64_t h = 0; h < pairs; ++h) {
        uint64_t hh = static_cast<uint64_t>(h);
        uint64_t x = ((hh & ~pmask) << 1) | (hh & pmask);
        uint64_t y = x ^ m.x_mask;
        cplx ax = a[x], ay = a[y];
        a[x] = c * ax + mis * sv_detail::pauli_phase(m, y) * ay;
        a[y] = c * ay + mis * sv_detail::pauli_phase(m, x) * ax;
    }
}

/// Dense unitary on a contiguous qubit block [offset, offset+width).
inline void apply_block_matrix(StateVector& sv, int offset, int width, const cplx* mat,
                               uint64_t ctrl_mask = 0, uint64_t ctrl_val = 0) {
    constexpr int kMaxBlockDim = 64;
    const int dim = 1 << width;
    if (dim > kMaxBlockDim) throw DimensionError("apply_block_matrix: block wider than 6 qubits");
    const uint64_t block_mask = static_cast<uint64_t>(dim - 1) << offset;
    check_controls(sv, ctrl_mask, ctrl_val, block_mask);
    auto& a = sv.amps();
    const uint64_t low_count = uint64_t{1} << offset;
    const int64_t high_count = static_cast<int64_t>(sv.dim() >> (offset + width));
    const bool par = sv.dim() >= sv_detail::kParallelCutoff;
    if (width == 2 && ctrl_mask == 0) {
        // unrolled 4x4 kernel for the transverse-register transforms
        const cplx m00 = mat[0], m01 = mat[1], m02 = mat[2], m03 = mat[3];
        const cplx m10 = mat[4], m11 = mat[5], m12 = mat[6], m13 = mat[7];
        const cplx m20 = mat[8], m21 = mat[9], m22 = mat[10], m23 = mat[11];
        const cplx m30 = mat[12], m31 = mat[13], m32 = mat[14], m33 = mat[15];
        const uint64_t s = low_count;
#pragma omp parallel for schedule(static) if (par)
        for (int64_t hi = 0; hi < high_count; ++hi) {
            const uint64_t base = static_cast<uint64_t>(hi) << (offset + 2);
            cplx* p0 = a.data() + base;
            cplx* p1 = p0 + s;
            cplx* p2 = p1 + s;
            cplx* p3 = p2 + s;
            for (uint64_t lo = 0; lo < s; ++lo) {
                const cplx a0 = p0[lo], a1 = p1[lo], a2 = p2[lo], a3 = p3[lo];
                p0[lo] = m00 * a0 + m01 * a1 + m02 * a2 + m03 * a3;
                p1[lo] = m10 * a0 + m11 * a1 + m12 * a2 + m13 * a3;
                p2[lo] = m20 * a0 + m21 * a1 + m22 * a2 + m23 * a3;
                p3[lo] = m30 * a0 + m31 * a1 + m32 * a2 + m33 * a3;
            }
        }
        return;
    }
#pragma omp parallel for schedule(static) if (par)
    for (int64_t hi = 0; hi < high_count; ++hi) {
        cplx in[kMaxBlockDim], out[kMaxBlockDim];
        uint64_t base_hi = static_cast<uint64_t>(hi) << (offset + width);
        for (uint64_t lo = 0; lo < low_count; ++lo) {
            uint64_t base = base_hi | lo;
            if (ctrl_mask && (base & ctrl_mask) != ctrl_val) continue;
            for (int b = 0; b < dim; ++b) in[b] = a[base | (static_cast<uint64_t>(b) << offset)];
            for (int r = 0; r < dim; ++r) {
                cplx acc = 0;
                const cplx* row = mat + static_cast<size_t>(r) * dim;
                for (int b = 0; b < dim; ++b) acc += row[b] * in[b];
                out[r] = acc;
            }
            for (int r = 0; r < dim; ++r) a[base | (static_cast<uint64_t>(r) << offset)] = out[r];
        }
    }
}

/// Householder reflection 1 - 2 w w^T / |w|^2 with w = v - e0, the canonical
/// real unitary completion that loads |0..0> -> sum_b v[b] |b> on a block.
inline void apply_householder_block(StateVector& sv, int offset, int width,
                                    std::span<const double> v) {
    const int dim = 1 << width;
    if (static_cast<int>(v.size()) != dim)
        throw DimensionError("apply_householder_block: vector/block size mismatch");
    std::vector<double> w(v.begin(), v.end());
    w[0] -= 1.0;
    double w2 = 0.0;
    for (double x : w) w2 += x * x;
    if (w2 < 1e-30) return;  // v == e0
    const double scale = 2.0 / w2;
    auto& a = sv.amps();
    const uint64_t low_count = uint64_t{1} << offset;
    const int64_t high_count = static_cast<int64_t>(sv.dim() >> (offset + width));
#pragma omp parallel for schedule(static) if (sv.dim() >= sv_detail::kParallelCutoff)
    for (int64_t hi = 0; hi < high_count; ++hi) {
        uint64_t base_hi = static_cast<uint64_t>(hi) << (offset + width);
        for (uint64_t lo = 0; lo < low_count; ++lo) {
            uint64_t base = base_hi | lo;
            cplx dot = 0;
            for (int b = 0; b < dim; ++b) dot += w[static_cast<size_t>(b)] * a[base | (static_cast<uint64_t>(b) << offset)];
            dot *= scale;
            for (int b = 0; b < dim; ++b) a[base | (static_cast<uint64_t>(b) << offset)] -= dot * w[static_cast<size_t>(b)];
        }
    }
}

/// R_y(theta) = exp(-i theta Y / 2) on one qubit, optionally controlled.
inline void apply_controlled_ry(StateVector& sv, int target, double theta,
                                uint64_t ctrl_mask = 0, uint64_t ctrl_val = 0) {
    const uint64_t tbit = uint64_t{1} << target;
    check_controls(sv, ctrl_mask, ctrl_val, tbit);
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    auto& a = sv.amps();
    const uint64_t full = sv.dim() - 1;
    if (ctrl_mask == 0) {
        const uint64_t pmask = tbit - 1;
        const int64_t pairs = static_cast<int64_t>(sv.dim() >> 1);
#pragma omp parallel for schedule(static) if (sv.dim() >= sv_detail::kParallelCutoff)
        for (int64_t h = 0; h < pairs; ++h) {
            uint64_t hh = static_cast<uint64_t>(h);
            uint64_t x = ((hh & ~pmask) << 1) | (hh & pmask);
            uint64_t y = x | tbit;
            cplx a0 = a[x], a1 = a[y];
            a[x] = c * a0 - s * a1;
            a[y] = s * a0 + c * a1;
        }
    } else if (sv.dim() >= sv_detail::kParallelCutoff) {
        const uint64_t pmask = tbit - 1;
        const int64_t pairs = static_cast<int64_t>(sv.dim() >> 1);
#pragma omp parallel for schedule(static)
        for (int64_t h = 0; h < pairs; ++h) {
            uint64_t hh = static_cast<uint64_t>(h);
            uint64_t x = ((hh & ~pmask) << 1) | (hh & pmask);
            if ((x & ctrl_mask) != ctrl_val) continue;
            uint64_t y = x | tbit;
            cplx a0 = a[x], a1 = a[y];
            a[x] = c * a0 - s * a1;
            a[y] = s * a0 + c * a1;
        }
    } else {
        sv_detail::for_each_masked(full & ~(ctrl_mask | tbit), ctrl_val, [&](uint64_t x) {
            uint64_t y = x | tbit;
            cplx a0 = a[x], a1 = a[y];
            a[x] = c * a0 - s * a1;
            a[y] = s * a0 + c * a1;
        });
    }
}

/// Multiplies matching amplitudes by a phase factor (ctrl_mask = 0: global).
inline void apply_phase(StateVector& sv, cplx phase, uint64_t ctrl_mask = 0, uint64_t ctrl_val = 0) {
    auto& a = sv.amps();
    if (ctrl_mask == 0) {
        const int64_t n = static_cast<int64_t>(sv.dim());
#pragma omp parallel for schedule(static) if (sv.dim() >= sv_detail::kParallelCutoff)
        for (int64_t x = 0; x < n; ++x) a[static_cast<size_t>(x)] *= phase;
        return;
    }
    check_controls(sv, ctrl_mask, ctrl_val, 0);
    if (sv.dim() >= sv_detail::kParallelCutoff) {
        const int64_t n = static_cast<int64_t>(sv.dim());
#pragma omp parallel for schedule(static)
        for (int64_t x = 0; x < n; ++x) {
            uint64_t u = static_cast<uint64_t>(x);
            if ((u & ctrl_mask) == ctrl_val) a[u] *= phase;
        }
        return;
    }
    sv_detail::for_each_masked((sv.dim() - 1) & ~ctrl_mask, ctrl_val, [&](uint64_t x) { a[x] *= phase; });
}

/// Reflection 1 - 2 (|0><0|)^block about the all-zero state of the masked
/// bits: negates amplitudes with (idx & block_mask) == 0.
inline void apply_reflection(StateVector& sv, uint64_t block_mask) {
    auto& a = sv.amps();
    sv_detail::for_each_masked((sv.dim() - 1) & ~block_mask, 0, [&](uint64_t x) { a[x] = -a[x]; });
}

/// Shifted discrete Fourier transform over a register of `width` bits holding
/// 2N = 2^width sites: entries exp(+i 2 pi q n / 2N) / sqrt(2N) with site
/// labels q, n = code - N running over [-N, N-1].  `inverse` conjugates.
inline std::shared_ptr<const std::vector<cplx>> shifted_qft_matrix(int width, bool inverse) {
    const int dim = 1 << width;
    const int n_half = dim / 2;
    auto mat = std::make_shared<std::vector<cplx>>(static_cast<size_t>(dim) * dim);
    const double sgn = inverse ? -1.0 : 1.0;
    const double norm = 1.0 / std::sqrt(static_cast<double>(dim));
    for (int u = 0; u < dim; ++u)
        for (int v = 0; v < dim; ++v) {
            double ph = sgn * 2.0 * kPi * (u - n_half) * (v - n_half) / dim;
            (*mat)[static_cast<size_t>(u) * dim + v] = cplx(std::cos(ph) * norm, std::sin(ph) * norm);
        }
    return mat;
}

inline void apply_shifted_qft(StateVector& sv, int offset, int width, bool inverse) {
    if (offset < 0 || width < 1 || offset + width > sv.n_qubits())
        throw DimensionError("apply_shifted_qft: block out of range");
    auto mat = shifted_qft_matrix(width, inverse);
    apply_block_matrix(sv, offset, width, mat->data());
}

/// Marginal probabilities of a contiguous block.
inline std::vector<double> block_marginal(const StateVector& sv, int offset, int width) {
    std::vector<double> probs(size_t{1} << width, 0.0);
    const uint64_t mask = ((uint64_t{1} << width) - 1) << offset;
    for (size_t i = 0; i < sv.dim(); ++i)
        probs[(i & mask) >> offset] += std::norm(sv[i]);
    return probs;
}

/// Multinomial sampling of a block measurement; counts indexed by block code.
/// Deterministic for a given engine state.
inline std::vector<uint64_t> measure_block(const StateVector& sv, int offset, int width,
                                           uint64_t shots, std::mt19937_64& rng) {
    if (shots < 1) throw ConfigError("measure_block: shots must be >= 1");
    std::vector<double> probs = block_marginal(sv, offset, width);
    std::vector<double> cdf(probs.size());
    double acc = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        cdf[i] = acc;
    }
    const double total = acc;
    std::vector<uint64_t> counts(probs.size(), 0);
    for (uint64_t s = 0; s < shots; ++s) {
        double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53 * total;
        size_t lo = 0, hi = cdf.size() - 1;
        while (lo < hi) {
            size_t mid = (lo + hi) / 2;
            if (cdf[mid] <= u) lo = mid + 1; else hi = mid;
        }
        ++counts[lo];
    }
    return counts;
}

/// Projects onto the subspace where the masked bits equal `val`; returns the
/// pre-projection probability mass and renormalizes the remainder.
inline double project_and_renormalize(StateVector& sv, uint64_t mask, uint64_t val) {
    auto& a = sv.amps();
    double prob = 0.0;
    sv_detail::for_each_masked((sv.dim() - 1) & ~mask, val, [&](uint64_t x) { prob += std::norm(a[x]); });
    if (prob < 1e-12)
        throw ProjectionError("project_and_renormalize: zero probability mass");
    const double inv = 1.0 / std::sqrt(prob);
    const int64_t n = static_cast<int64_t>(sv.dim());
#pragma omp parallel for schedule(static) if (sv.dim() >= sv_detail::kParallelCutoff)
    for (int64_t x = 0; x < n; ++x) {
        uint64_t u = static_cast<uint64_t>(x);
        a[u] = ((u & mask) == val) ? a[u] * inv : cplx{0, 0};
    }
    return prob;
}

/// Statevector over the system register with amplitude one on the encoded
/// basis label.
inline StateVector init_basis_state(const EncodingLayout& lay, const BasisLabel& label) {
    StateVector sv(lay.total_bits());
    sv.set_basis_state(encode_index(label, lay));
    return sv;
}

inline void dump_statevector_csv(const StateVector& sv, const std::string& path) {
    std::ofstream f(path);
    f << "index,re,im\n";
    char buf[96];
    for (size_t i = 0; i < sv.dim(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.12g,%.12g", i, sv[i].real(), sv[i].imag());
        f << buf << '\n';
    }
}

// ---------------------------------------------------------------------------
// Gate sequences

/// One primitive in a gate sequence.  Controls are given as (mask, value)
/// over the full register; targets and controls must be disjoint.
struct GateOp {
    enum class Kind { PauliString, RotateY, Phase, BlockUnitary, Householder, ShiftedQft, Reflection };
    Kind kind = Kind::Phase;
    uint64_t ctrl_mask = 0, ctrl_val = 0;
    // PauliString
    PauliMasks masks;
    cplx phase{1, 0};  // also the Phase factor
    // RotateY
    int target = 0;
    double theta = 0.0;
    // BlockUnitary / Householder / ShiftedQft
    int offset = 0, width = 0;
    std::shared_ptr<const std::vector<cplx>> matrix;
    std::shared_ptr<const std::vector<double>> hvec;
    bool inverse = false;
    // Reflection
    uint64_t block_mask = 0;
};

inline void apply(StateVector& sv, const GateOp& g) {
    switch (g.kind) {
        case GateOp::Kind::PauliString:
            apply_pauli_string(sv, g.masks, g.phase, g.ctrl_mask, g.ctrl_val);
            break;
        case GateOp::Kind::RotateY:
            apply_controlled_ry(sv, g.target, g.theta, g.ctrl_mask, g.ctrl_val);
            break;
        case GateOp::Kind::Phase:
            apply_phase(sv, g.phase, g.ctrl_mask, g.ctrl_val);
            break;
        case GateOp::Kind::BlockUnitary:
            apply_block_matrix(sv, g.offset, g.width, g.matrix->data(), g.ctrl_mask, g.ctrl_val);
            break;
        case GateOp::Kind::Householder:
            apply_householder_block(sv, g.offset, g.width, *g.hvec);
            break;
        case GateOp::Kind::ShiftedQft:
            apply_shifted_qft(sv, g.offset, g.width, g.inverse);
            break;
        case GateOp::Kind::Reflection:
            apply_reflection(sv, g.block_mask);
            break;
    }
}

inline GateOp adjoint(const GateOp& g) {
    GateOp out = g;
    switch (g.kind) {
        case GateOp::Kind::PauliString:
            out.phase = std::conj(g.phase);  // strings themselves are Hermitian
            break;
        case GateOp::Kind::RotateY:
            out.theta = -g.theta;
            break;
        case GateOp::Kind::Phase:
            out.phase = std::conj(g.phase);
            break;
        case GateOp::Kind::BlockUnitary: {
            const int dim = 1 << g.width;
            auto m = std::make_shared<std::vector<cplx>>(static_cast<size_t>(dim) * dim);
            for (int r = 0; r < dim; ++r)
                for (int c = 0; c < dim; ++c)
                    (*m)[static_cast<size_t>(r) * dim + c] =
                        std::conj((*g.matrix)[static_cast<size_t>(c) * dim + r]);
            out.matrix = std::move(m);
            break;
        }
        case GateOp::Kind::Householder:
            break;  // real reflection, self-adjoint
        case GateOp::Kind::ShiftedQft:
            out.inverse = !g.inverse;
            break;
        case GateOp::Kind::Reflection:
            break;  // self-adjoint
    }
    return out;
}

inline void apply_sequence(StateVector& sv, std::span<const GateOp> seq) {
    for (const auto& g : seq) apply(sv, g);
}

inline void apply_adjoint_sequence(StateVector& sv, std::span<const GateOp> seq) {
    for (auto it = seq.rbegin(); it != seq.rend(); ++it) apply(sv, adjoint(*it));
}

}  // namespace lfsim
