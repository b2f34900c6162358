#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lfsim/cgc_field.hpp"
#include "lfsim/lattice.hpp"
#include "lfsim/pauli.hpp"

namespace lfsim {

/// SU(3) generator embedded in the two-qubit color block (the 11 row and
/// column are zero).  Index 0 is the 4x4 identity, matching the fixture's
/// T^0 acting on kinetic terms; 1..8 are the Gell-Mann matrices over two.
struct ColorGenerator {
    int index = 0;
    std::array<std::array<cplx, 4>, 4> matrix{};
};

inline ColorGenerator color_generator(int a) {
    if (a < 0 || a > 8) throw ConfigError("color_generator: index must be in 0..8");
    ColorGenerator t;
    t.index = a;
    auto& m = t.matrix;
    const cplx i{0.0, 1.0};
    switch (a) {
        case 0:
            m[0][0] = m[1][1] = m[2][2] = m[3][3] = 1.0;
            break;
        case 1: m[0][1] = m[1][0] = 0.5; break;
        case 2: m[0][1] = -0.5 * i; m[1][0] = 0.5 * i; break;
        case 3: m[0][0] = 0.5; m[1][1] = -0.5; break;
        case 4: m[0][2] = m[2][0] = 0.5; break;
        case 5: m[0][2] = -0.5 * i; m[2][0] = 0.5 * i; break;
        case 6: m[1][2] = m[2][1] = 0.5; break;
        case 7: m[1][2] = -0.5 * i; m[2][1] = 0.5 * i; break;
        case 8: {
            double s = 0.5 / std::sqrt(3.0);
            m[0][0] = s; m[1][1] = s; m[2][2] = -2.0 * s;
            break;
        }
    }
    return t;
}

/// Two-qubit Pauli expansion of a color generator: coeff(s1 s2) = Tr(T sigma)/4.
inline std::vector<PauliTerm> color_pauli_terms(const ColorGenerator& t, double prune = 1e-14) {
    static const std::array<std::array<std::array<cplx, 2>, 2>, 4> sigma = {{
        {{{cplx{1, 0}, cplx{0, 0}}, {cplx{0, 0}, cplx{1, 0}}}},    // I
        {{{cplx{0, 0}, cplx{1, 0}}, {cplx{1, 0}, cplx{0, 0}}}},    // X
        {{{cplx{0, 0}, cplx{0, -1}}, {cplx{0, 1}, cplx{0, 0}}}},   // Y
        {{{cplx{1, 0}, cplx{0, 0}}, {cplx{0, 0}, cplx{-1, 0}}}},   // Z
    }};
    static const char names[4] = {'I', 'X', 'Y', 'Z'};
    std::vector<PauliTerm> out;
    for (int s1 = 0; s1 < 4; ++s1)
        for (int s2 = 0; s2 < 4; ++s2) {
            cplx tr = 0;
            for (int r = 0; r < 4; ++r)
                for (int c = 0; c < 4; ++c) {
                    // (sigma1 x sigma2)[c][r], row index c = 2*c1 + c0
                    cplx e = sigma[static_cast<size_t>(s1)][c >> 1][r >> 1] *
                             sigma[static_cast<size_t>(s2)][c & 1][r & 1];
                    tr += t.matrix[static_cast<size_t>(r)][static_cast<size_t>(c)] * e;
                }
            double coeff = tr.real() / 4.0;
            if (std::abs(coeff) > prune)
                out.push_back({coeff, std::string{names[s1], names[s2]}});
        }
    return out;
}

struct QftBlock {
    int offset = 0;  // char offset from the left of the rendered string
    int width = 1;
    bool operator==(const QftBlock&) const = default;
};

/// H = P^-/2 in LCU form: momentum-diagonal kinetic strings plus
/// coordinate-diagonal interaction strings, the latter understood as
/// conjugated by the shifted Fourier transform on the marked blocks.
struct HamiltonianModel {
    int n_qubits = 0;
    std::vector<PauliTerm> kinetic_terms;      // I/Z strings only
    std::vector<PauliTerm> interaction_terms;  // conjugated by F on qft_blocks
    std::vector<QftBlock> qft_blocks;
    double lambda_norm = 0.0;  // GeV

    size_t l1() const { return kinetic_terms.size(); }
    size_t l2() const { return interaction_terms.size(); }
    size_t total_terms() const { return l1() + l2(); }
};

inline double l1_norm(const HamiltonianModel& m) {
    double s = 0.0;
    for (const auto& t : m.kinetic_terms) s += std::abs(t.coeff);
    for (const auto& t : m.interaction_terms) s += std::abs(t.coeff);
    return s;
}

/// Diagonal of P^-_QCD over the non-color system blocks [p+][p1][p2][lambda]:
/// entry = (m^2 + p_perp^2)/p+.  Register codes that map to no retained basis
/// state (padding of non-power-of-two block sizes) carry zeros.
inline std::vector<double> build_kinetic(const LatticeSpec& spec, double m_quark,
                                         double p_plus, const EncodingLayout& lay) {
    if (lay.p_plus_omitted && !(p_plus > 0.0))
        throw ConfigError("build_kinetic: p_plus must be positive");
    int bits = lay.p_plus_bits + 2 * lay.trans_bits + lay.helicity_bits;
    std::vector<double> diag(size_t{1} << bits, 0.0);
    int trans_codes = 1 << lay.trans_bits;
    int hel_codes = 1 << lay.helicity_bits;
    int pp_codes = 1 << lay.p_plus_bits;
    double m2 = m_quark * m_quark;
    for (int qp = 0; qp < pp_codes; ++qp) {
        if (!lay.p_plus_omitted && qp >= spec.n_par) continue;
        double pp = lay.p_plus_omitted ? p_plus : (qp + 0.5) * spec.a_p_par;
        if (!(pp > 0.0)) throw ConfigError("build_kinetic: longitudinal momentum must be positive");
        for (int u1 = 0; u1 < trans_codes; ++u1) {
            if (u1 >= 2 * spec.n_perp) continue;
            double p1 = (u1 - spec.n_perp) * spec.a_p_perp;
            for (int u2 = 0; u2 < trans_codes; ++u2) {
                if (u2 >= 2 * spec.n_perp) continue;
                double p2 = (u2 - spec.n_perp) * spec.a_p_perp;
                double val = (m2 + p1 * p1 + p2 * p2) / pp;
                for (int h = 0; h < hel_codes; ++h) {
                    size_t idx = ((((static_cast<size_t>(qp) << lay.trans_bits) | u1)
                                   << lay.trans_bits | u2)
                                  << lay.helicity_bits) | static_cast<size_t>(h);
                    diag[idx] = val;
                }
            }
        }
    }
    return diag;
}

/// Kinetic LCU terms at the P^- level: decomposition of the diagonal, tensored
/// with T^0 (identity on the color block).
inline std::vector<PauliTerm> kinetic_terms_of(const std::vector<double>& diag,
                                               const EncodingLayout& lay) {
    if (diag.size() != size_t{1} << (lay.total_bits() - EncodingLayout::color_bits))
        throw DimensionError("kinetic_terms_of: diagonal does not match the layout");
    auto terms = pauli_decompose(diag);
    for (auto& t : terms) t.ops += "II";
    return terms;
}

/// Interaction LCU terms at the P^- level: sum_a g A^-_a(x_perp) T^a, diagonal
/// in the transverse coordinate blocks, identity on p+ and helicity.  The
/// eikonal vertex normalization relating A^- to the quark current is taken as
/// the bare g A^-_a T^a; the demo fixture carries its own printed couplings.
inline std::vector<PauliTerm> build_interaction(const ColorField& field, const LatticeSpec& spec,
                                                double g, const EncodingLayout& lay) {
    if (field.grid != spec.sites_per_axis())
        throw DimensionError("build_interaction: field grid does not match lattice");
    int trans_codes = 1 << lay.trans_bits;
    if (trans_codes != field.grid)
        throw DimensionError("build_interaction: grid must fill the transverse register");
    std::vector<PauliTerm> out;
    std::string pp_pad(static_cast<size_t>(lay.p_plus_bits), 'I');
    std::string hel_pad(static_cast<size_t>(lay.helicity_bits), 'I');
    std::vector<double> diag(static_cast<size_t>(trans_codes) * trans_codes);
    for (int a = 1; a <= 8; ++a) {
        for (int u1 = 0; u1 < trans_codes; ++u1)
            for (int u2 = 0; u2 < trans_codes; ++u2)
                diag[static_cast<size_t>(u1) * trans_codes + u2] = g * field.at(a - 1, u1, u2);
        auto trans_terms = pauli_decompose(diag);
        if (trans_terms.empty()) continue;
        auto color_terms = color_pauli_terms(color_generator(a));
        for (const auto& tt : trans_terms)
            for (const auto& ct : color_terms)
                out.push_back({tt.coeff * ct.coeff, pp_pad + tt.ops + hel_pad + ct.ops});
    }
    return out;
}

namespace detail {

inline void sort_merge(std::vector<PauliTerm>& terms) {
    std::map<std::string, double> acc;
    for (const auto& t : terms) acc[t.ops] += t.coeff;
    terms.clear();
    double max_abs = 0.0;
    for (const auto& [ops, c] : acc) max_abs = std::max(max_abs, std::abs(c));
    for (const auto& [ops, c] : acc)
        if (std::abs(c) > 1e-12 * max_abs) terms.push_back({c, ops});
}

}  // namespace detail

/// Assembles H = P^-/2: halves every coefficient, orders terms
/// lexicographically (kinetic before interaction), merges duplicates, and
/// computes the L1 norm.
inline HamiltonianModel assemble(std::vector<PauliTerm> kinetic, std::vector<PauliTerm> interaction,
                                 const EncodingLayout& lay) {
    int width = lay.total_bits();
    for (const auto& t : kinetic) {
        if (t.width() != width) throw DimensionError("assemble: kinetic term width mismatch");
        if (!is_diagonal_string(t.ops))
            throw DimensionError("assemble: kinetic terms must be I/Z strings");
    }
    for (const auto& t : interaction)
        if (t.width() != width) throw DimensionError("assemble: interaction term width mismatch");

    HamiltonianModel m;
    m.n_qubits = width;
    m.kinetic_terms = std::move(kinetic);
    m.interaction_terms = std::move(interaction);
    for (auto& t : m.kinetic_terms) t.coeff *= 0.5;
    for (auto& t : m.interaction_terms) t.coeff *= 0.5;
    detail::sort_merge(m.kinetic_terms);
    detail::sort_merge(m.interaction_terms);
    m.qft_blocks = {{lay.p1_at(), lay.trans_bits}, {lay.p2_at(), lay.trans_bits}};
    m.lambda_norm = l1_norm(m);
    return m;
}

// ---------------------------------------------------------------------------
// Demo fixture: the printed model Hamiltonian, in units of 1e-3 GeV.
// Strings cover [p1(2) p2(2)]; p+ and helicity registers are omitted.

inline constexpr std::array<std::pair<double, const char*>, 7> kFixtureKinetic = {{
    {1.39383, "IIII"}, {0.232226, "IIIZ"}, {0.464452, "IIZI"}, {0.464452, "IIZZ"},
    {0.232226, "IZII"}, {0.464452, "ZIII"}, {0.464452, "ZZII"},
}};

inline constexpr std::array<std::pair<double, const char*>, 16> kFixtureW1 = {{
    {346.525, "IIII"},   {-0.709063, "IIIZ"}, {-2.73394, "IIZI"},  {-6.04144, "IIZZ"},
    {3.56781, "IZII"},   {-1.50894, "IZIZ"},  {-1.98356, "IZZI"},  {-0.209813, "IZZZ"},
    {10.7856, "ZIII"},   {1.18556, "ZIIZ"},   {-4.93806, "ZIZI"},  {8.65394, "ZIZZ"},
    {-28.8128, "ZZII"},  {2.46544, "ZZIZ"},   {-8.74144, "ZZZI"},  {-3.80169, "ZZZZ"},
}};

/// Demo lattice: N_perp = 2, L_perp = 5 GeV^-1, single p+ mode at 850 GeV,
/// helicity fixed to +1/2.
inline LatticeSpec fixture_lattice() {
    LatticeConfig cfg;
    cfg.n_perp = 2;
    cfg.l_perp = 5.0;
    cfg.n_par = 1;
    cfg.l_par = 1.0;
    cfg.fixed_p_plus = 850.0;
    cfg.fixed_helicity = 0.5;
    return build_lattice(cfg);
}

/// The model Hamiltonian with the printed kinetic and W^{1-} coefficients and
/// color factors T^0, T^1, assembled as H = P^-/2.
inline HamiltonianModel demo_fixture() {
    EncodingLayout lay = make_layout(fixture_lattice());
    std::vector<PauliTerm> kin, inter;
    for (const auto& [c, s] : kFixtureKinetic) kin.push_back({c * 1e-3, std::string(s) + "II"});
    for (const auto& [c, s] : kFixtureW1) {
        inter.push_back({c * 1e-3 / 4.0, std::string(s) + "IX"});
        inter.push_back({c * 1e-3 / 4.0, std::string(s) + "ZX"});
    }
    return assemble(std::move(kin), std::move(inter), lay);
}

// ---------------------------------------------------------------------------

struct ResourceEstimate {
    int n_sys = 0;
    int ancilla = 0;
    int total = 0;
    std::string gate_cost;  // asymptotic expression with symbolic Lambda*x+ and eps
};

inline ResourceEstimate resource_estimate(const HamiltonianModel& m, int k_r, int r) {
    if (m.total_terms() == 0) throw ConfigError("resource_estimate: empty model");
    if (k_r < 1 || r < 1) throw ConfigError("resource_estimate: K_r and r must be >= 1");
    ResourceEstimate e;
    size_t L = m.total_terms();
    int nl = bits_for(static_cast<int>(L));
    e.n_sys = m.n_qubits;
    e.ancilla = k_r + k_r * nl;
    e.total = e.ancilla + e.n_sys;
    double logl = std::log2(static_cast<double>(L));
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "O( %.4g * Lx * log(Lx/eps)/loglog(Lx/eps) + %d * Lx ), Lx = Lambda*x+ = r*ln2",
                  static_cast<double>(L) * (e.n_sys + logl), e.n_sys * e.n_sys);
    e.gate_cost = buf;
    return e;
}

// ---------------------------------------------------------------------------
// JSON export/import: { terms: [{coeff, string}], l1, qft_blocks, lambda,
// units: "GeV" }.  Terms are stored kinetic-first, matching the model order.

inline nlohmann::json model_to_json(const HamiltonianModel& m) {
    nlohmann::json j;
    j["units"] = "GeV";
    j["n_qubits"] = m.n_qubits;
    j["lambda"] = m.lambda_norm;
    j["l1"] = m.l1();
    j["qft_blocks"] = nlohmann::json::array();
    for (const auto& b : m.qft_blocks) j["qft_blocks"].push_back({{"offset", b.offset}, {"width", b.width}});
    j["terms"] = nlohmann::json::array();
    for (const auto& t : m.kinetic_terms) j["terms"].push_back({{"coeff", t.coeff}, {"string", t.ops}});
    for (const auto& t : m.interaction_terms) j["terms"].push_back({{"coeff", t.coeff}, {"string", t.ops}});
    return j;
}

inline HamiltonianModel model_from_json(const nlohmann::json& j) {
    HamiltonianModel m;
    m.n_qubits = j.at("n_qubits").get<int>();
    size_t l1 = j.at("l1").get<size_t>();
    size_t pos = 0;
    for (const auto& jt : j.at("terms")) {
        PauliTerm t{jt.at("coeff").get<double>(), jt.at("string").get<std::string>()};
        if (t.width() != m.n_qubits) throw DimensionError("model_from_json: term width mismatch");
        (pos++ < l1 ? m.kinetic_terms : m.interaction_terms).push_back(std::move(t));
    }
    for (const auto& jb : j.at("qft_blocks"))
        m.qft_blocks.push_back({jb.at("offset").get<int>(), jb.at("width").get<int>()});
    m.lambda_norm = l1_norm(m);
    double lam = j.at("lambda").get<double>();
    if (std::abs(lam - m.lambda_norm) > 1e-9 * std::max(1.0, std::abs(lam)))
        throw ConfigError("model_from_json: stored lambda is inconsistent with terms");
    return m;
}

}  // namespace lfsim
