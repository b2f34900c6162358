#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <random>
#include <vector>

#include "lfsim/errors.hpp"
#include "lfsim/lattice.hpp"
#include "lfsim/pauli.hpp"

namespace lfsim {

/// McLerran-Venugopalan model parameters.
struct FieldParams {
    double g = 1.0;        // coupling
    double g2mu = 0.0;     // color charge density parameter g^2 mu, GeV^{3/2}
    double m_g = 0.1;      // gluon mass regulator, GeV
    double l_eta = 1.0;    // medium extent along x+, GeV^-1
    int n_eta = 1;         // number of x+ slices
    double m_quark = 0.0;  // GeV (carried for downstream convenience)
    uint64_t seed = 0;
};

inline void validate(const FieldParams& p) {
    if (!(p.g2mu >= 0.0) || !(p.m_g >= 0.0) || !(p.l_eta > 0.0) || p.n_eta < 1)
        throw ConfigError("FieldParams: g2mu, m_g >= 0; l_eta > 0; n_eta >= 1 required");
}

/// Sampled charge densities rho_a, indexed [color a=0..7][slice][n1][n2].
struct ChargeDensity {
    static constexpr int n_colors = 8;
    int n_eta = 1;
    int grid = 2;  // sites per axis (= 2 n_perp)
    std::vector<double> rho;

    double& at(int a, int s, int n1, int n2) {
        return rho[static_cast<size_t>(((a * n_eta + s) * grid + n1) * grid + n2)];
    }
    double at(int a, int s, int n1, int n2) const {
        return rho[static_cast<size_t>(((a * n_eta + s) * grid + n1) * grid + n2)];
    }
};

/// A single-slice or x+-averaged field A^-_a on the transverse lattice.
struct ColorField {
    static constexpr int n_colors = 8;
    int grid = 2;
    std::vector<double> a_minus;  // [a][n1][n2], GeV

    double& at(int a, int n1, int n2) {
        return a_minus[static_cast<size_t>((a * grid + n1) * grid + n2)];
    }
    double at(int a, int n1, int n2) const {
        return a_minus[static_cast<size_t>((a * grid + n1) * grid + n2)];
    }
};

/// Deterministic standard Gaussian (Box-Muller on the raw engine stream, so
/// identical seeds give bit-identical draws on every platform).
class GaussianStream {
  public:
    explicit GaussianStream(uint64_t seed) : eng_(seed) {}

    double operator()() {
        if (have_) {
            have_ = false;
            return spare_;
        }
        double u1 = uniform_open();
        double u2 = uniform_open();
        double r = std::sqrt(-2.0 * std::log(u1));
        double c = std::cos(2.0 * kPi * u2), s = std::sin(2.0 * kPi * u2);
        spare_ = r * s;
        have_ = true;
        return r * c;
    }

  private:
    double uniform_open() {
        // (0,1]: avoids log(0)
        return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
    }
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_ = false;
};

/// Per-site, per-slice variance reproducing the discretized correlator
/// <rho_a rho_b> = g^2 mu^2 delta_ab delta^2(x-y) delta(x+-y+) with the delta
/// functions replaced by 1/(a_r^2) and 1/(L_eta/N_eta).
inline double charge_site_variance(const FieldParams& p, const LatticeSpec& spec) {
    double g2mu2 = p.g2mu * p.g2mu / (p.g * p.g);  // = g^2 mu^2
    return g2mu2 * p.n_eta / (p.l_eta * spec.a_r_perp * spec.a_r_perp);
}

inline ChargeDensity sample_charge_density(const FieldParams& p, const LatticeSpec& spec,
                                           GaussianStream& rng) {
    validate(p);
    ChargeDensity rho;
    rho.n_eta = p.n_eta;
    rho.grid = spec.sites_per_axis();
    rho.rho.resize(static_cast<size_t>(ChargeDensity::n_colors) * p.n_eta * rho.grid * rho.grid);
    double sigma = std::sqrt(charge_site_variance(p, spec));
    for (double& v : rho.rho) v = sigma * rng();
    return rho;
}

namespace detail {

/// Shifted 2D DFT over sites n, modes q in [-N, N-1]: unitary per axis with
/// kernel exp(-i 2 pi q n / (2N)) / sqrt(2N) in the forward direction.
inline std::vector<cplx> shifted_dft_2d(const std::vector<cplx>& in, int grid, bool inverse) {
    int n_half = grid / 2;
    double s = inverse ? 1.0 : -1.0;
    std::vector<cplx> kernel(static_cast<size_t>(grid) * grid);
    double norm = 1.0 / std::sqrt(static_cast<double>(grid));
    for (int a = 0; a < grid; ++a)
        for (int b = 0; b < grid; ++b) {
            double ph = s * 2.0 * kPi * (a - n_half) * (b - n_half) / grid;
            kernel[static_cast<size_t>(a) * grid + b] = cplx(std::cos(ph), std::sin(ph)) * norm;
        }
    std::vector<cplx> tmp(in.size()), out(in.size());
    // axis 1
    for (int q = 0; q < grid; ++q)
        for (int n2 = 0; n2 < grid; ++n2) {
            cplx acc = 0;
            for (int n1 = 0; n1 < grid; ++n1)
                acc += kernel[static_cast<size_t>(q) * grid + n1] * in[static_cast<size_t>(n1) * grid + n2];
            tmp[static_cast<size_t>(q) * grid + n2] = acc;
        }
    // axis 2
    for (int q1 = 0; q1 < grid; ++q1)
        for (int q = 0; q < grid; ++q) {
            cplx acc = 0;
            for (int n2 = 0; n2 < grid; ++n2)
                acc += kernel[static_cast<size_t>(q) * grid + n2] * tmp[static_cast<size_t>(q1) * grid + n2];
            out[static_cast<size_t>(q1) * grid + q] = acc;
        }
    return out;
}

}  // namespace detail

/// Solves (m_g^2 - lap_perp) A = rho spectrally, slice by slice and color by
/// color: A-hat(q) = rho-hat(q) / (m_g^2 + k^2), modes with |k| > Lambda_UV
/// zeroed.  The Laplacian is the lattice momentum map, so the forward operator
/// applied to the result recovers the UV-filtered rho exactly.
inline std::vector<ColorField> solve_poisson(const ChargeDensity& rho, const FieldParams& p,
                                             const LatticeSpec& spec) {
    if (rho.grid != spec.sites_per_axis())
        throw DimensionError("solve_poisson: charge grid does not match lattice");
    int grid = rho.grid;
    int n_half = spec.n_perp;
    double ap2 = spec.a_p_perp * spec.a_p_perp;
    std::vector<ColorField> slices(static_cast<size_t>(rho.n_eta));
    for (auto& f : slices) {
        f.grid = grid;
        f.a_minus.assign(static_cast<size_t>(ColorField::n_colors) * grid * grid, 0.0);
    }
    std::vector<cplx> buf(static_cast<size_t>(grid) * grid);
    for (int a = 0; a < ChargeDensity::n_colors; ++a) {
        for (int s = 0; s < rho.n_eta; ++s) {
            for (int n1 = 0; n1 < grid; ++n1)
                for (int n2 = 0; n2 < grid; ++n2)
                    buf[static_cast<size_t>(n1) * grid + n2] = rho.at(a, s, n1, n2);
            auto hat = detail::shifted_dft_2d(buf, grid, false);
            for (int u1 = 0; u1 < grid; ++u1)
                for (int u2 = 0; u2 < grid; ++u2) {
                    int q1 = u1 - n_half, q2 = u2 - n_half;
                    long qq = static_cast<long>(q1) * q1 + static_cast<long>(q2) * q2;
                    cplx& h = hat[static_cast<size_t>(u1) * grid + u2];
                    if (qq > static_cast<long>(n_half) * n_half) {
                        h = 0.0;  // |k| > Lambda_UV
                        continue;
                    }
                    double denom = p.m_g * p.m_g + ap2 * static_cast<double>(qq);
                    if (denom <= 0.0) {
                        if (std::abs(h) > 1e-14)
                            throw SingularModeError("solve_poisson: m_g = 0 with nonzero zero mode");
                        h = 0.0;
                        continue;
                    }
                    h /= denom;
                }
            auto field = detail::shifted_dft_2d(hat, grid, true);
            for (int n1 = 0; n1 < grid; ++n1)
                for (int n2 = 0; n2 < grid; ++n2)
                    slices[static_cast<size_t>(s)].at(a, n1, n2) = field[static_cast<size_t>(n1) * grid + n2].real();
        }
    }
    return slices;
}

/// x+-average of the per-slice fields: the effective LF-time-independent field.
inline ColorField accumulate_field(const std::vector<ColorField>& slices, const FieldParams& p) {
    if (slices.empty()) throw ConfigError("accumulate_field: no slices");
    if (static_cast<int>(slices.size()) != p.n_eta)
        throw DimensionError("accumulate_field: slice count does not match n_eta");
    ColorField out = slices.front();
    for (size_t s = 1; s < slices.size(); ++s) {
        if (slices[s].grid != out.grid) throw DimensionError("accumulate_field: grid mismatch");
        for (size_t i = 0; i < out.a_minus.size(); ++i) out.a_minus[i] += slices[s].a_minus[i];
    }
    double inv = 1.0 / static_cast<double>(slices.size());
    for (double& v : out.a_minus) v *= inv;
    return out;
}

/// Q_s^2 = (g^2 mu)^2 L_eta / (2 pi^2).
inline double saturation_scale(const FieldParams& p) {
    return p.g2mu * p.g2mu * p.l_eta / (2.0 * kPi * kPi);
}

inline void dump_charge_csv(const ChargeDensity& rho, const std::string& path) {
    std::ofstream f(path);
    f << "a,slice,n1,n2,value\n";
    char buf[64];
    for (int a = 0; a < ChargeDensity::n_colors; ++a)
        for (int s = 0; s < rho.n_eta; ++s)
            for (int n1 = 0; n1 < rho.grid; ++n1)
                for (int n2 = 0; n2 < rho.grid; ++n2) {
                    std::snprintf(buf, sizeof buf, "%.12g", rho.at(a, s, n1, n2));
                    f << a + 1 << ',' << s << ',' << n1 - rho.grid / 2 << ','
                      << n2 - rho.grid / 2 << ',' << buf << '\n';
                }
}

inline void dump_field_csv(const ColorField& field, const std::string& path) {
    std::ofstream f(path);
    f << "a,slice,n1,n2,value\n";
    char buf[64];
    for (int a = 0; a < ColorField::n_colors; ++a)
        for (int n1 = 0; n1 < field.grid; ++n1)
            for (int n2 = 0; n2 < field.grid; ++n2) {
                std::snprintf(buf, sizeof buf, "%.12g", field.at(a, n1, n2));
                f << a + 1 << ",0," << n1 - field.grid / 2 << ',' << n2 - field.grid / 2
                  << ',' << buf << '\n';
            }
}

}  // namespace lfsim
