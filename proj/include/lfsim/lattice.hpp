#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "lfsim/errors.hpp"

namespace lfsim {

inline constexpr double kPi = 3.14159265358979323846;

enum class Color : int { Red = 0, Green = 1, Blue = 2 };

inline const char* color_name(Color c) {
    switch (c) {
        case Color::Red: return "Red";
        case Color::Green: return "Green";
        case Color::Blue: return "Blue";
    }
    return "?";
}

struct LatticeConfig {
    int n_perp = 1;        // sites per half transverse axis (2*n_perp sites per axis)
    double l_perp = 1.0;   // transverse half-extent, GeV^-1
    int n_par = 1;         // longitudinal modes
    double l_par = 1.0;    // longitudinal half-extent, GeV^-1
    std::optional<double> fixed_p_plus;    // GeV; set when the p+ register is frozen
    std::optional<double> fixed_helicity;  // +-1/2; set when the helicity register is frozen
};

/// Transverse/longitudinal lattice geometry with derived spacings and cutoffs.
struct LatticeSpec {
    int n_perp = 1;
    double l_perp = 1.0;
    double a_r_perp = 1.0;  // l_perp / n_perp
    double a_p_perp = 1.0;  // pi / l_perp
    int n_par = 1;
    double l_par = 1.0;
    double a_p_par = 1.0;   // pi / l_par
    double lambda_uv = 1.0; // pi * n_perp / l_perp
    double lambda_ir = 1.0; // pi / l_perp
    std::optional<double> fixed_p_plus;
    std::optional<double> fixed_helicity;

    int sites_per_axis() const { return 2 * n_perp; }
};

inline LatticeSpec build_lattice(const LatticeConfig& cfg) {
    if (cfg.n_perp < 1 || cfg.n_par < 1)
        throw ConfigError("build_lattice: site counts must be positive");
    if (!(cfg.l_perp > 0.0) || !(cfg.l_par > 0.0))
        throw ConfigError("build_lattice: lattice extents must be positive");
    LatticeSpec s;
    s.n_perp = cfg.n_perp;
    s.l_perp = cfg.l_perp;
    s.a_r_perp = cfg.l_perp / cfg.n_perp;
    s.a_p_perp = kPi / cfg.l_perp;
    s.n_par = cfg.n_par;
    s.l_par = cfg.l_par;
    s.a_p_par = kPi / cfg.l_par;
    s.lambda_uv = kPi * cfg.n_perp / cfg.l_perp;
    s.lambda_ir = kPi / cfg.l_perp;
    s.fixed_p_plus = cfg.fixed_p_plus;
    s.fixed_helicity = cfg.fixed_helicity;
    return s;
}

inline double site_to_momentum(int q, const LatticeSpec& spec) {
    if (q < -spec.n_perp || q > spec.n_perp - 1)
        throw EncodingError("site_to_momentum: site out of bounds");
    return q * spec.a_p_perp;
}

inline double site_to_coordinate(int n, const LatticeSpec& spec) {
    if (n < -spec.n_perp || n > spec.n_perp - 1)
        throw EncodingError("site_to_coordinate: site out of bounds");
    return n * spec.a_r_perp;
}

/// One retained basis state |p+, p1, p2, lambda, c> in lattice-site labels.
struct BasisLabel {
    double q_plus = 0.5;    // positive half-integer site
    int q1 = 0;
    int q2 = 0;
    double helicity = 0.5;  // +-1/2
    Color color = Color::Red;
};

/// Register layout: blocks in order [p+][p1][p2][helicity][color], rendered
/// most-significant bit first.  Fixed degrees of freedom omit their block.
struct EncodingLayout {
    int n_perp = 1;
    int n_par = 1;
    int p_plus_bits = 0;   // ceil(log2 n_par), 0 when omitted
    int trans_bits = 1;    // ceil(log2 2*n_perp), per transverse axis
    int helicity_bits = 1; // 0 when omitted
    static constexpr int color_bits = 2;
    bool p_plus_omitted = false;
    bool helicity_omitted = false;

    int total_bits() const { return p_plus_bits + 2 * trans_bits + helicity_bits + color_bits; }

    // char offsets within the rendered string
    int p_plus_at() const { return 0; }
    int p1_at() const { return p_plus_bits; }
    int p2_at() const { return p_plus_bits + trans_bits; }
    int helicity_at() const { return p_plus_bits + 2 * trans_bits; }
    int color_at() const { return p_plus_bits + 2 * trans_bits + helicity_bits; }
};

inline int bits_for(int count) {
    int b = 0;
    while ((1 << b) < count) ++b;
    return b;
}

inline EncodingLayout make_layout(const LatticeSpec& spec) {
    EncodingLayout lay;
    lay.n_perp = spec.n_perp;
    lay.n_par = spec.n_par;
    lay.trans_bits = bits_for(2 * spec.n_perp);
    lay.p_plus_omitted = spec.fixed_p_plus.has_value();
    lay.helicity_omitted = spec.fixed_helicity.has_value();
    lay.p_plus_bits = lay.p_plus_omitted ? 0 : bits_for(spec.n_par);
    lay.helicity_bits = lay.helicity_omitted ? 0 : 1;
    return lay;
}

inline int qubit_count(const LatticeSpec& spec, const EncodingLayout& lay) {
    (void)spec;
    return lay.total_bits();
}

namespace detail {

inline void render_bits(std::string& out, uint64_t value, int bits) {
    for (int i = bits - 1; i >= 0; --i) out.push_back(((value >> i) & 1u) ? '1' : '0');
}

inline uint64_t parse_bits(const std::string& s, int at, int bits) {
    uint64_t v = 0;
    for (int i = 0; i < bits; ++i) {
        char c = s[static_cast<size_t>(at + i)];
        if (c != '0' && c != '1') throw EncodingError("decode_basis: non-binary character");
        v = (v << 1) | static_cast<uint64_t>(c - '0');
    }
    return v;
}

inline int q_plus_index(double q_plus) {
    // q+ in {1/2, 3/2, ...}; stored zero-based as ceil(q+) - 1
    double idx = q_plus - 0.5;
    int i = static_cast<int>(std::lround(idx));
    if (std::abs(idx - i) > 1e-9) throw EncodingError("encode_basis: q_plus is not a half-integer");
    return i;
}

}  // namespace detail

inline void validate_label(const BasisLabel& label, const EncodingLayout& lay) {
    if (label.q1 < -lay.n_perp || label.q1 > lay.n_perp - 1 ||
        label.q2 < -lay.n_perp || label.q2 > lay.n_perp - 1)
        throw EncodingError("encode_basis: transverse site out of bounds");
    int qp = detail::q_plus_index(label.q_plus);
    if (qp < 0 || qp >= lay.n_par)
        throw EncodingError("encode_basis: longitudinal site out of bounds");
    if (std::abs(std::abs(label.helicity) - 0.5) > 1e-9)
        throw EncodingError("encode_basis: helicity must be +-1/2");
}

/// Label -> integer register code.  The rendered string read left to right is
/// the binary expansion of this code, most-significant bit first.
inline uint64_t encode_index(const BasisLabel& label, const EncodingLayout& lay) {
    validate_label(label, lay);
    uint64_t idx = 0;
    if (!lay.p_plus_omitted) {
        idx = static_cast<uint64_t>(detail::q_plus_index(label.q_plus));
    }
    idx = (idx << lay.trans_bits) | static_cast<uint64_t>(label.q1 + lay.n_perp);
    idx = (idx << lay.trans_bits) | static_cast<uint64_t>(label.q2 + lay.n_perp);
    if (!lay.helicity_omitted) {
        idx = (idx << 1) | (label.helicity > 0 ? 1u : 0u);
    }
    idx = (idx << 2) | static_cast<uint64_t>(static_cast<int>(label.color));
    return idx;
}

inline std::string encode_basis(const BasisLabel& label, const EncodingLayout& lay) {
    std::string out;
    out.reserve(static_cast<size_t>(lay.total_bits()));
    detail::render_bits(out, encode_index(label, lay), lay.total_bits());
    return out;
}

/// Inverse of encode_index.  The reserved color code 11 is rejected.
inline BasisLabel decode_index(uint64_t idx, const EncodingLayout& lay, const LatticeSpec* spec = nullptr) {
    BasisLabel label;
    uint64_t color = idx & 3u;
    if (color == 3u) throw EncodingError("decode_basis: color code 11 (Null) is unused");
    label.color = static_cast<Color>(static_cast<int>(color));
    idx >>= 2;
    if (!lay.helicity_omitted) {
        label.helicity = (idx & 1u) ? 0.5 : -0.5;
        idx >>= 1;
    } else {
        label.helicity = spec && spec->fixed_helicity ? *spec->fixed_helicity : 0.5;
    }
    uint64_t u2 = idx & ((1u << lay.trans_bits) - 1u);
    idx >>= lay.trans_bits;
    uint64_t u1 = idx & ((1u << lay.trans_bits) - 1u);
    idx >>= lay.trans_bits;
    if (static_cast<int>(u1) >= 2 * lay.n_perp || static_cast<int>(u2) >= 2 * lay.n_perp)
        throw EncodingError("decode_basis: transverse code out of range");
    label.q1 = static_cast<int>(u1) - lay.n_perp;
    label.q2 = static_cast<int>(u2) - lay.n_perp;
    if (!lay.p_plus_omitted) {
        if (static_cast<int>(idx) >= lay.n_par)
            throw EncodingError("decode_basis: longitudinal code out of range");
        label.q_plus = static_cast<double>(idx) + 0.5;
    } else {
        label.q_plus = 0.5;
    }
    return label;
}

inline BasisLabel decode_basis(const std::string& bits, const EncodingLayout& lay,
                               const LatticeSpec* spec = nullptr) {
    if (static_cast<int>(bits.size()) != lay.total_bits())
        throw EncodingError("decode_basis: bit count does not match layout");
    return decode_index(detail::parse_bits(bits, 0, lay.total_bits()), lay, spec);
}

}  // namespace lfsim
