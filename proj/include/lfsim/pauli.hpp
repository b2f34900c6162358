#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lfsim/errors.hpp"

namespace lfsim {

using cplx = std::complex<double>;

/// One term of a linear combination of unitaries: coeff * (tensor product of
/// Paulis).  ops[0] acts on the most significant qubit of the register, i.e.
/// the leftmost character of a rendered basis string.
struct PauliTerm {
    double coeff = 0.0;  // GeV
    std::string ops;     // over {I, X, Y, Z}

    int width() const { return static_cast<int>(ops.size()); }
};

/// Bit-mask form of a Pauli string for fast statevector application.
/// Qubit j of the register is bit j of an amplitude index (LSB = qubit 0),
/// so ops[c] maps to bit (width-1-c).
///   P|x> = premult * (-1)^popcount(x & z_mask) |x ^ x_mask>
/// with premult = i^{#Y}.
struct PauliMasks {
    uint64_t x_mask = 0;  // X and Y positions (flips)
    uint64_t z_mask = 0;  // Z and Y positions (phases)
    cplx premult{1.0, 0.0};
};

inline PauliMasks masks_of(const std::string& ops) {
    PauliMasks m;
    int n = static_cast<int>(ops.size());
    int y_count = 0;
    for (int c = 0; c < n; ++c) {
        uint64_t bit = 1ull << (n - 1 - c);
        switch (ops[static_cast<size_t>(c)]) {
            case 'I': break;
            case 'X': m.x_mask |= bit; break;
            case 'Y': m.x_mask |= bit; m.z_mask |= bit; ++y_count; break;
            case 'Z': m.z_mask |= bit; break;
            default: throw EncodingError("masks_of: invalid Pauli character");
        }
    }
    static const cplx i_pow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    m.premult = i_pow[y_count % 4];
    return m;
}

inline bool is_diagonal_string(const std::string& ops) {
    for (char c : ops)
        if (c != 'I' && c != 'Z') return false;
    return true;
}

/// Decomposes a real diagonal over n qubits into I/Z Pauli strings via the
/// Walsh-Hadamard transform: kappa_s = 2^-n sum_u d(u) (-1)^popcount(u & s).
/// Element u of `diag` is the basis state whose rendered bitstring is the
/// binary expansion of u. Terms with |kappa| <= prune_rel * max|kappa| are
/// dropped; output is ordered lexicographically in the string (I < Z), which
/// is ascending in the Z-mask read MSB-first.
inline std::vector<PauliTerm> pauli_decompose(std::span<const double> diag,
                                              double prune_rel = 1e-12) {
    size_t len = diag.size();
    if (len == 0 || (len & (len - 1)) != 0)
        throw DimensionError("pauli_decompose: length must be a power of two");
    int n = 0;
    while ((size_t{1} << n) < len) ++n;

    std::vector<double> kappa(diag.begin(), diag.end());
    // in-place fast Walsh-Hadamard butterfly
    for (size_t h = 1; h < len; h <<= 1) {
        for (size_t i = 0; i < len; i += 2 * h) {
            for (size_t j = i; j < i + h; ++j) {
                double a = kappa[j], b = kappa[j + h];
                kappa[j] = a + b;
                kappa[j + h] = a - b;
            }
        }
    }
    double scale = 1.0 / static_cast<double>(len);
    double max_abs = 0.0;
    for (double& k : kappa) {
        k *= scale;
        max_abs = std::max(max_abs, std::abs(k));
    }
    double cut = prune_rel * max_abs;

    std::vector<PauliTerm> terms;
    for (size_t s = 0; s < len; ++s) {
        if (std::abs(kappa[s]) <= cut) continue;
        std::string ops(static_cast<size_t>(n), 'I');
        for (int c = 0; c < n; ++c)
            if ((s >> (n - 1 - c)) & 1u) ops[static_cast<size_t>(c)] = 'Z';
        terms.push_back({kappa[s], std::move(ops)});
    }
    return terms;
}

/// Reconstructs diagonal entry u from I/Z terms (test oracle helper).
inline double diagonal_entry(std::span<const PauliTerm> terms, uint64_t u, int n) {
    double v = 0.0;
    for (const auto& t : terms) {
        PauliMasks m = masks_of(t.ops);
        (void)n;
        v += t.coeff * ((__builtin_popcountll(u & m.z_mask) & 1) ? -1.0 : 1.0);
    }
    return v;
}

}  // namespace lfsim
