#pragma once

#include <algorithm>
#include <cmath>
#include <string_view>

#include "mzi/mzi_core.hpp"

namespace mzi {

enum class Scheme { DifferenceIntensity, SingleModeIntensity, BalancedHomodyne };

inline std::string_view to_string(Scheme s) {
    switch (s) {
        case Scheme::DifferenceIntensity: return "DifferenceIntensity";
        case Scheme::SingleModeIntensity: return "SingleModeIntensity";
        case Scheme::BalancedHomodyne: return "BalancedHomodyne";
    }
    return "?";
}

struct SensitivityBreakdown {
    double variance = 0;
    double derivative = 0;
    double delta_phi = 0;
};

// Delta phi = sqrt(a + b cos^2 + c sin 2phi + d cos + e sin) / |f cos + g sin|.
struct SensitivityCoefficients {
    double a = 0, b = 0, c = 0, d = 0, e = 0, f = 0, g = 0;
};

namespace detail {

inline SensitivityBreakdown finish(double variance, double derivative, const char* what) {
    if (std::abs(derivative) < 1e-30 * std::max(1.0, std::sqrt(std::max(variance, 0.0))) ||
        !std::isfinite(derivative))
        throw ZeroDerivative(what);
    return {variance, derivative, std::sqrt(std::max(variance, 0.0)) / std::abs(derivative)};
}

// d<K.J>/dphi / sin(theta'); shared by both intensity schemes.
inline double signal(const SchwingerMoments& m, double theta, double phi) {
    return m.mean_jx * std::cos(phi) +
           (std::cos(theta) * m.mean_jy + std::sin(theta) * m.mean_jz) * std::sin(phi);
}

}  // namespace detail

// Output n4 - n5 = 2 K.J.
inline SensitivityBreakdown sensitivity_difference(const SchwingerMoments& m, const BsAngles& ang,
                                                   double phi) {
    const auto K = k_coefficients(ang, phi);
    const Vec3 k{K.kx, K.ky, K.kz};
    const double var = 4 * quad(k, covariance_matrix(m), k);
    const double der = 2 * std::sin(ang.theta_prime) * detail::signal(m, ang.theta, phi);
    return detail::finish(var, der, "difference-intensity signal vanishes");
}

// <n4> = N/2 + K.J.
inline double mean_n4(const SchwingerMoments& m, const BsAngles& ang, double phi) {
    const auto K = k_coefficients(ang, phi);
    return 0.5 * m.mean_n + dot({K.kx, K.ky, K.kz}, mean_vector(m));
}

inline SensitivityBreakdown sensitivity_single(const SchwingerMoments& m, const BsAngles& ang,
                                               double phi) {
    const auto K = k_coefficients(ang, phi);
    const Vec3 k{K.kx, K.ky, K.kz};
    const double var = 0.25 * m.var_n + quad(k, covariance_matrix(m), k) + dot(k, cov_n_vector(m));
    const double der = std::sin(ang.theta_prime) * detail::signal(m, ang.theta, phi);
    return detail::finish(var, der, "single-mode intensity signal vanishes");
}

inline double extinction_rate(const SchwingerMoments& m, const BsAngles& ang, double phi) {
    if (!(m.mean_n > 0)) throw EmptyInput("mean photon number is zero");
    return mean_n4(m, ang, phi) / m.mean_n;
}

namespace detail {

// Homodyne pieces as functions of the BS2 pair (cos(theta'/2), sin(theta'/2)).
// The constant 1/4 is written as (cp^2 + sp^2)/4 so the variance is a quadratic
// form in (cp, sp).
struct HomodyneParts {
    double variance;
    double derivative;
};

inline HomodyneParts homodyne_parts(const FieldMoments& fm, double theta, double cp, double sp,
                                    double phi, double phi_local) {
    const cplx I(0, 1);
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    const cplx e = std::polar(1.0, -phi);
    const cplx A40 = c * cp - s * sp * e;
    const cplx A41 = I * (c * sp * e + s * cp);
    const cplx eps = std::polar(1.0, -2 * phi_local);
    const double cov = std::norm(A40) * fm.cov_n0 + std::norm(A41) * fm.cov_n1 +
                       2 * std::real(A40 * std::conj(A41) * fm.cov_a0_a1dag);
    const cplx va = A40 * A40 * fm.var_a0 + A41 * A41 * fm.var_a1 + 2.0 * A40 * A41 * fm.cov_a0_a1;
    const double var = 0.25 * (cp * cp + sp * sp) + 0.5 * (cov + std::real(eps * va));
    const cplx dA40 = I * s * sp * e;
    const cplx dA41 = c * sp * e;
    const double der =
        std::real(std::polar(1.0, -phi_local) * (dA40 * fm.mean_a0 + dA41 * fm.mean_a1));
    return {var, der};
}

}  // namespace detail

// Quadrature X = (a4 e^{-i phiL} + h.c.)/2 with phi1 = 0, phi2 = phi.
inline SensitivityBreakdown sensitivity_homodyne(const FieldMoments& fm, const BsAngles& ang,
                                                 double phi, double phi_local) {
    validate(ang);
    const auto p = detail::homodyne_parts(fm, ang.theta, std::cos(ang.theta_prime / 2),
                                          std::sin(ang.theta_prime / 2), phi, phi_local);
    return detail::finish(p.variance, p.derivative, "homodyne signal vanishes");
}

inline SensitivityBreakdown sensitivity_homodyne(const FieldMoments& fm, const BsAngles& ang,
                                                 const PhaseConfig& ph) {
    if (ph.convention != PhaseConvention::ExternalReference)
        throw WrongConvention("homodyne detection needs an external phase reference");
    return sensitivity_homodyne(fm, ang, ph.phi, ph.phi_local);
}

inline double sensitivity_from_coefficients(const SensitivityCoefficients& k, double phi) {
    const double c = std::cos(phi), s = std::sin(phi);
    const double num = k.a + k.b * c * c + k.c * std::sin(2 * phi) + k.d * c + k.e * s;
    const double den = k.f * c + k.g * s;
    return detail::finish(num, den, "coefficient form denominator vanishes").delta_phi;
}

// Coefficients for the intensity schemes. K = k0 + k1 cos(phi) + k2 sin(phi)
// expands K.Sigma.K into the trigonometric form.
inline SensitivityCoefficients generic_coefficients(Scheme scheme, const SchwingerMoments& m,
                                                    const BsAngles& ang) {
    if (scheme == Scheme::BalancedHomodyne)
        throw std::invalid_argument("homodyne coefficients need FieldMoments");
    validate(ang);
    const double st = std::sin(ang.theta), ct = std::cos(ang.theta);
    const double sp = std::sin(ang.theta_prime), cp = std::cos(ang.theta_prime);
    const Vec3 k0{0, -st * cp, ct * cp};
    const Vec3 k1{0, -ct * sp, -st * sp};
    const Vec3 k2{sp, 0, 0};
    const Mat3 S = covariance_matrix(m);
    SensitivityCoefficients r;
    r.a = quad(k0, S, k0) + quad(k2, S, k2);
    r.b = quad(k1, S, k1) - quad(k2, S, k2);
    r.c = quad(k1, S, k2);
    r.d = 2 * quad(k0, S, k1);
    r.e = 2 * quad(k0, S, k2);
    if (scheme == Scheme::SingleModeIntensity) {
        const Vec3 cn = cov_n_vector(m);
        r.a += 0.25 * m.var_n + dot(k0, cn);
        r.d += dot(k1, cn);
        r.e += dot(k2, cn);
    }
    r.f = sp * m.mean_jx;
    r.g = sp * (ct * m.mean_jy + st * m.mean_jz);
    return r;
}

// Homodyne coefficients. With z = e^{-i phi}, A40 = p0 + p1 z and
// A41 = q0 + q1 z; the variance is h0 + Re(h1 z) + Re(h2 z^2).
inline SensitivityCoefficients generic_coefficients(const FieldMoments& fm, const BsAngles& ang,
                                                    double phi_local) {
    validate(ang);
    const cplx I(0, 1);
    const double c = std::cos(ang.theta / 2), s = std::sin(ang.theta / 2);
    const double cp = std::cos(ang.theta_prime / 2), sp = std::sin(ang.theta_prime / 2);
    const cplx p0 = c * cp, p1 = -s * sp;
    const cplx q0 = I * s * cp, q1 = I * c * sp;
    const cplx eps = std::polar(1.0, -2 * phi_local);

    // |A40|^2 c0 + |A41|^2 c1
    double h0 = 0.25 + 0.5 * ((std::norm(p0) + std::norm(p1)) * fm.cov_n0 +
                              (std::norm(q0) + std::norm(q1)) * fm.cov_n1);
    cplx h1 = (2.0 * std::conj(p0) * p1 * fm.cov_n0 + 2.0 * std::conj(q0) * q1 * fm.cov_n1) * 0.5;
    cplx h2 = 0;
    // 2 Re(A40 conj(A41) kappa)
    {
        const cplx k = fm.cov_a0_a1dag;
        h0 += std::real((p0 * std::conj(q0) + p1 * std::conj(q1)) * k);
        // p1 conj(q0) z + p0 conj(q1) conj(z)
        h1 += p1 * std::conj(q0) * k + std::conj(p0 * std::conj(q1) * k);
    }
    // Re(eps (A40^2 v0 + A41^2 v1 + 2 A40 A41 lambda))
    {
        const cplx w0 = eps * (p0 * p0 * fm.var_a0 + q0 * q0 * fm.var_a1 + 2.0 * p0 * q0 * fm.cov_a0_a1);
        const cplx w1 = eps * (2.0 * p0 * p1 * fm.var_a0 + 2.0 * q0 * q1 * fm.var_a1 +
                               2.0 * (p0 * q1 + p1 * q0) * fm.cov_a0_a1);
        const cplx w2 = eps * (p1 * p1 * fm.var_a0 + q1 * q1 * fm.var_a1 + 2.0 * p1 * q1 * fm.cov_a0_a1);
        h0 += 0.5 * w0.real();
        h1 += 0.5 * w1;
        h2 += 0.5 * w2;
    }
    SensitivityCoefficients r;
    r.a = h0 - h2.real();
    r.b = 2 * h2.real();
    r.c = h2.imag();
    r.d = h1.real();
    r.e = h1.imag();
    const cplx mder = -I * std::polar(1.0, -phi_local) * (p1 * fm.mean_a0 + q1 * fm.mean_a1);
    r.f = mder.real();
    r.g = mder.imag();
    return r;
}

}  // namespace mzi
