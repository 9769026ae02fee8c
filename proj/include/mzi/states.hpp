#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>

#include "mzi/errors.hpp"

namespace mzi {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

enum class ModeKind { Vacuum, Coherent, SqueezedVacuum, SqueezedCoherent, Fock };

// One input port. Phases are kept unreduced.
struct ModeSpec {
    ModeKind kind = ModeKind::Vacuum;
    double amplitude_mag = 0.0;
    double amplitude_phase = 0.0;
    double squeeze_mag = 0.0;
    double squeeze_phase = 0.0;
    int fock_n = 0;

    static ModeSpec vacuum() { return {}; }
    static ModeSpec coherent(double mag, double phase = 0.0) {
        return {ModeKind::Coherent, mag, phase, 0.0, 0.0, 0};
    }
    static ModeSpec squeezed_vacuum(double r, double phase = 0.0) {
        return {ModeKind::SqueezedVacuum, 0.0, 0.0, r, phase, 0};
    }
    static ModeSpec squeezed_coherent(double mag, double phase, double r, double sq_phase) {
        return {ModeKind::SqueezedCoherent, mag, phase, r, sq_phase, 0};
    }
    static ModeSpec fock(int n) { return {ModeKind::Fock, 0.0, 0.0, 0.0, 0.0, n}; }

    bool has_amplitude() const {
        return kind == ModeKind::Coherent || kind == ModeKind::SqueezedCoherent;
    }
    bool has_squeeze() const {
        return kind == ModeKind::SqueezedVacuum || kind == ModeKind::SqueezedCoherent;
    }

    friend bool operator==(const ModeSpec&, const ModeSpec&) = default;
};

// Product state; port 1 conventionally carries the strong coherent drive.
struct InputState {
    ModeSpec port0;
    ModeSpec port1;
    friend bool operator==(const InputState&, const InputState&) = default;
};

struct FieldMoments {
    cplx mean_a0, mean_a1;
    cplx var_a0, var_a1;       // <a^2> - <a>^2
    double cov_n0 = 0, cov_n1 = 0;  // <a^dag a> - |<a>|^2
    cplx cov_a0_a1, cov_a0_a1dag;
};

struct SchwingerMoments {
    double mean_jx = 0, mean_jy = 0, mean_jz = 0, mean_n = 0;
    double var_jx = 0, var_jy = 0, var_jz = 0, var_n = 0;
    double symcov_xy = 0, symcov_xz = 0, symcov_yz = 0;
    double cov_jx_n = 0, cov_jy_n = 0, cov_jz_n = 0;
};

enum class PmcId { CohSqzVac, SqzCohSqzVac, PMC1, PMC2, PMC3 };

inline std::string_view to_string(ModeKind k) {
    switch (k) {
        case ModeKind::Vacuum: return "Vacuum";
        case ModeKind::Coherent: return "Coherent";
        case ModeKind::SqueezedVacuum: return "SqueezedVacuum";
        case ModeKind::SqueezedCoherent: return "SqueezedCoherent";
        case ModeKind::Fock: return "Fock";
    }
    return "?";
}

inline std::string_view to_string(PmcId p) {
    switch (p) {
        case PmcId::CohSqzVac: return "CohSqzVac";
        case PmcId::SqzCohSqzVac: return "SqzCohSqzVac";
        case PmcId::PMC1: return "PMC1";
        case PmcId::PMC2: return "PMC2";
        case PmcId::PMC3: return "PMC3";
    }
    return "?";
}

// Returns an empty string when valid, else a description of the first violation.
inline std::string mode_violation(const ModeSpec& m) {
    if (!std::isfinite(m.amplitude_mag) || !std::isfinite(m.amplitude_phase) ||
        !std::isfinite(m.squeeze_mag) || !std::isfinite(m.squeeze_phase))
        return "non-finite field";
    if (m.amplitude_mag < 0) return "amplitude_mag must be >= 0";
    if (m.squeeze_mag < 0) return "squeeze_mag must be >= 0";
    if (m.fock_n < 0) return "fock_n must be >= 0";
    if (!m.has_amplitude() && (m.amplitude_mag != 0 || m.amplitude_phase != 0))
        return "amplitude fields must be zero for " + std::string(to_string(m.kind));
    if (!m.has_squeeze() && (m.squeeze_mag != 0 || m.squeeze_phase != 0))
        return "squeeze fields must be zero for " + std::string(to_string(m.kind));
    if (m.kind != ModeKind::Fock && m.fock_n != 0)
        return "fock_n must be zero for " + std::string(to_string(m.kind));
    return {};
}

inline void validate(const InputState& s) {
    if (auto v = mode_violation(s.port0); !v.empty()) throw std::invalid_argument("port0: " + v);
    if (auto v = mode_violation(s.port1); !v.empty()) throw std::invalid_argument("port1: " + v);
}

namespace detail {

// Single-mode normally ordered data for the product-state engine:
// mu = <a>, v = <a^2> - mu^2, c = <a^dag a> - |mu|^2, vn = Var(a^dag a),
// g = <a^dag a a> - <a^dag a> mu.
struct ModeMoments {
    cplx mu;
    cplx v;
    double c = 0;
    double vn = 0;
    cplx g;
    double n() const { return std::norm(mu) + c; }
};

inline ModeMoments mode_moments(const ModeSpec& m) {
    ModeMoments out;
    if (m.kind == ModeKind::Fock) {
        out.c = m.fock_n;
        return out;
    }
    if (m.has_amplitude()) out.mu = std::polar(m.amplitude_mag, m.amplitude_phase);
    if (m.has_squeeze()) {
        const double r = m.squeeze_mag;
        out.v = -std::polar(std::sinh(r) * std::cosh(r), m.squeeze_phase);
        out.c = std::sinh(r) * std::sinh(r);
    }
    const double a2 = std::norm(out.mu);
    out.vn = a2 * (2 * out.c + 1) + 2 * std::real(std::conj(out.mu * out.mu) * out.v) +
             out.c * out.c + out.c + std::norm(out.v);
    out.g = std::conj(out.mu) * out.v + out.mu * out.c;
    return out;
}

}  // namespace detail

inline FieldMoments field_moments(const InputState& s) {
    validate(s);
    const auto m0 = detail::mode_moments(s.port0);
    const auto m1 = detail::mode_moments(s.port1);
    FieldMoments f;
    f.mean_a0 = m0.mu;
    f.mean_a1 = m1.mu;
    f.var_a0 = m0.v;
    f.var_a1 = m1.v;
    f.cov_n0 = m0.c;
    f.cov_n1 = m1.c;
    return f;
}

// Closed forms for any product of the supported single-mode states. Written in
// connected (cumulant) form so that structurally vanishing entries come out as
// exact zeros.
inline SchwingerMoments schwinger_moments(const InputState& s) {
    validate(s);
    const auto a = detail::mode_moments(s.port0);
    const auto b = detail::mode_moments(s.port1);
    const cplx X = std::conj(a.mu) * b.mu;  // <a0^dag a1>
    const double n0 = a.n(), n1 = b.n();

    SchwingerMoments m;
    m.mean_jx = X.real();
    m.mean_jy = X.imag();
    m.mean_jz = 0.5 * (n0 - n1);
    m.mean_n = n0 + n1;

    const cplx P = std::conj(a.v) * b.mu * b.mu + std::conj(a.mu * a.mu) * b.v + std::conj(a.v) * b.v;
    const double Q = a.c * std::norm(b.mu) + std::norm(a.mu) * b.c + a.c * b.c;
    m.var_jx = 0.25 * (2 * P.real() + 2 * Q + n0 + n1);
    m.var_jy = 0.25 * (-2 * P.real() + 2 * Q + n0 + n1);
    m.var_jz = 0.25 * (a.vn + b.vn);
    m.var_n = a.vn + b.vn;

    m.symcov_xy = 0.5 * P.imag();
    const cplx W = std::conj(a.g) * b.mu - std::conj(a.mu) * b.g;
    m.symcov_xz = 0.5 * W.real();
    m.symcov_yz = 0.5 * W.imag();

    const cplx C = std::conj(a.g) * b.mu + std::conj(a.mu) * b.g + X;
    m.cov_jx_n = C.real();
    m.cov_jy_n = C.imag();
    m.cov_jz_n = 0.5 * (a.vn - b.vn);
    return m;
}

inline double mean_total_photons(const InputState& s) {
    validate(s);
    return detail::mode_moments(s.port0).n() + detail::mode_moments(s.port1).n();
}

// Overwrites input phases so the chosen matching condition holds, keeping the
// port-1 coherent phase as the anchor.
inline InputState apply_pmc(const InputState& s, PmcId pmc) {
    validate(s);
    InputState out = s;
    const ModeSpec& p1 = s.port1;
    const ModeSpec& p0 = s.port0;
    auto need = [&](bool ok, const char* what) {
        if (!ok) throw IncompatiblePmc(std::string(to_string(pmc)) + " requires " + what);
    };
    const double ta = p1.amplitude_phase;
    switch (pmc) {
        case PmcId::CohSqzVac:
            need(p1.kind == ModeKind::Coherent && p0.kind == ModeKind::SqueezedVacuum,
                 "port1 Coherent and port0 SqueezedVacuum");
            out.port0.squeeze_phase = 2 * ta;
            break;
        case PmcId::SqzCohSqzVac:
            need(p1.kind == ModeKind::SqueezedCoherent && p0.kind == ModeKind::SqueezedVacuum,
                 "port1 SqueezedCoherent and port0 SqueezedVacuum");
            out.port0.squeeze_phase = 2 * ta;
            out.port1.squeeze_phase = 2 * ta + kPi;
            break;
        case PmcId::PMC1:
        case PmcId::PMC2:
        case PmcId::PMC3:
            need(p1.kind == ModeKind::SqueezedCoherent && p0.kind == ModeKind::SqueezedCoherent,
                 "SqueezedCoherent on both ports");
            out.port0.squeeze_phase = 2 * ta;
            out.port1.squeeze_phase = pmc == PmcId::PMC2 ? 2 * ta : 2 * ta + kPi;
            out.port0.amplitude_phase = pmc == PmcId::PMC3 ? ta - kPi / 2 : ta;
            break;
    }
    return out;
}

}  // namespace mzi
