#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "mzi/states.hpp"

namespace mzi {

// Beam-splitter mixing angles. T = cos(theta/2), R = i sin(theta/2).
struct BsAngles {
    double theta = kPi / 2;
    double theta_prime = kPi / 2;
};

enum class PhaseConvention { NoExternalReference, ExternalReference };

struct PhaseConfig {
    PhaseConvention convention = PhaseConvention::NoExternalReference;
    double phi = 0.0;
    double phi_local = 0.0;  // homodyne only
};

struct KCoefficients {
    double kx = 0, ky = 0, kz = 0;
};

struct ACoefficients {
    cplx a40, a41, a50, a51;
};

// Intensity transmittance tau = T^2 <-> mixing angle.
inline double tau_to_theta(double tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("transmittance out of [0,1]");
    return 2.0 * std::acos(std::sqrt(tau));
}
inline double theta_to_tau(double theta) {
    const double c = std::cos(theta / 2);
    return c * c;
}

inline void validate(const BsAngles& a) {
    if (!(a.theta >= 0 && a.theta <= kPi)) throw std::invalid_argument("theta out of [0, pi]");
    if (!(a.theta_prime >= 0 && a.theta_prime <= kPi))
        throw std::invalid_argument("theta_prime out of [0, pi]");
}

// a4 = a40 a0 + a41 a1 and a5 = a50 a0 + a51 a1 for phase shifts phi1 (upper
// arm, mode 2) and phi2 (lower arm, mode 3).
inline ACoefficients a_coefficients(const BsAngles& ang, double phi1, double phi2) {
    validate(ang);
    const cplx I(0, 1);
    const double T = std::cos(ang.theta / 2);
    const cplx R = I * std::sin(ang.theta / 2);
    const double Tp = std::cos(ang.theta_prime / 2);
    const cplx Rp = I * std::sin(ang.theta_prime / 2);
    const cplx e1 = std::polar(1.0, -phi1);
    const cplx e2 = std::polar(1.0, -phi2);
    ACoefficients a;
    a.a40 = Tp * T * e1 + Rp * R * e2;
    a.a41 = Tp * R * e1 + Rp * T * e2;
    a.a50 = Rp * T * e1 + Tp * R * e2;
    a.a51 = Rp * R * e1 + Tp * T * e2;
    return a;
}

inline KCoefficients k_coefficients(const BsAngles& ang, double phi) {
    validate(ang);
    const double st = std::sin(ang.theta), ct = std::cos(ang.theta);
    const double sp = std::sin(ang.theta_prime), cp = std::cos(ang.theta_prime);
    return {sp * std::sin(phi), -(st * cp + ct * sp * std::cos(phi)),
            ct * cp - st * sp * std::cos(phi)};
}

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

inline Vec3 mean_vector(const SchwingerMoments& m) { return {m.mean_jx, m.mean_jy, m.mean_jz}; }
inline Vec3 cov_n_vector(const SchwingerMoments& m) { return {m.cov_jx_n, m.cov_jy_n, m.cov_jz_n}; }

// Symmetrized covariance matrix of (Jx, Jy, Jz).
inline Mat3 covariance_matrix(const SchwingerMoments& m) {
    return {{{m.var_jx, m.symcov_xy, m.symcov_xz},
             {m.symcov_xy, m.var_jy, m.symcov_yz},
             {m.symcov_xz, m.symcov_yz, m.var_jz}}};
}

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

inline double quad(const Vec3& u, const Mat3& S, const Vec3& v) {
    double acc = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) acc += u[i] * S[i][j] * v[j];
    return acc;
}

// Moments of the Schwinger triple behind the first beam splitter. The rotation
// is about x: Jy' = cos(t) Jy + sin(t) Jz, Jz' = cos(t) Jz - sin(t) Jy, so that
// Jz' = (n2 - n3)/2.
inline SchwingerMoments internal_mode_moments(const SchwingerMoments& m, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    const Mat3 R = {{{1, 0, 0}, {0, c, s}, {0, -s, c}}};
    const Mat3 S = covariance_matrix(m);
    const Vec3 mu = mean_vector(m), cn = cov_n_vector(m);

    Mat3 RS{}, out{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) RS[i][j] += R[i][k] * S[k][j];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) out[i][j] += RS[i][k] * R[j][k];
    Vec3 mu2{}, cn2{};
    for (int i = 0; i < 3; ++i) {
        mu2[i] = dot(R[i], mu);
        cn2[i] = dot(R[i], cn);
    }

    SchwingerMoments r = m;
    r.mean_jx = mu2[0];
    r.mean_jy = mu2[1];
    r.mean_jz = mu2[2];
    r.var_jx = out[0][0];
    r.var_jy = out[1][1];
    r.var_jz = out[2][2];
    r.symcov_xy = 0.5 * (out[0][1] + out[1][0]);
    r.symcov_xz = 0.5 * (out[0][2] + out[2][0]);
    r.symcov_yz = 0.5 * (out[1][2] + out[2][1]);
    r.cov_jx_n = cn2[0];
    r.cov_jy_n = cn2[1];
    r.cov_jz_n = cn2[2];
    return r;
}

}  // namespace mzi
