#pragma once

// Brute-force two-mode truncated Fock simulator. Beam splitters act block by
// block on fixed total photon number, using a cached eigendecomposition of Jx.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "mzi/detection.hpp"

namespace mzi {

struct OracleConfig {
    double tail_tolerance = 1e-10;
    // Bound on dim0 * dim1 of the input tensor.
    long max_joint_dimension = 65536;
    // Bound on the per-mode cutoff.
    int max_mode_dimension = 256;
    double fd_step = 1e-5;
};

struct TruncatedState {
    int dim0 = 1, dim1 = 1;
    int max_total = 0;  // largest total photon number with support
    std::vector<cplx> amplitudes;  // row-major, index k * dim1 + l

    cplx at(int k, int l) const {
        return (k >= 0 && l >= 0 && k < dim0 && l < dim1) ? amplitudes[k * dim1 + l] : cplx{};
    }
    double norm() const {
        double s = 0;
        for (const auto& a : amplitudes) s += std::norm(a);
        return s;
    }
};

enum class Observable { A0, A1, N0, N1, Jx, Jy, Jz, N, Nd };

namespace detail {

inline std::vector<cplx> mode_amplitudes(const ModeSpec& m, const OracleConfig& cfg) {
    if (m.kind == ModeKind::Vacuum) return {cplx(1)};
    if (m.kind == ModeKind::Fock) {
        if (m.fock_n + 1 > cfg.max_mode_dimension)
            throw CutoffExceeded("Fock number beyond mode budget");
        std::vector<cplx> v(m.fock_n + 1);
        v[m.fock_n] = 1;
        return v;
    }
    const cplx alpha = m.has_amplitude() ? std::polar(m.amplitude_mag, m.amplitude_phase) : cplx{};
    const double z = m.has_squeeze() ? m.squeeze_mag : 0.0;
    const cplx es = std::polar(1.0, m.has_squeeze() ? m.squeeze_phase : 0.0);
    const double ch = std::cosh(z), sh = std::sinh(z);
    const cplx gamma = alpha * ch + std::conj(alpha) * es * sh;

    std::vector<cplx> v;
    v.push_back(std::exp(-0.5 * std::norm(alpha) - 0.5 * std::conj(alpha * alpha) * es * std::tanh(z)) /
                std::sqrt(ch));
    double norm = std::norm(v[0]);
    const double tol = cfg.tail_tolerance;
    for (int n = 0;; ++n) {
        const double w = std::pow(n + 1.0, 4);
        const double last = std::norm(v[n]) + (n > 0 ? std::norm(v[n - 1]) : 0.0);
        if (1.0 - norm <= tol && w * last <= tol) break;
        if (n + 2 > cfg.max_mode_dimension)
            throw CutoffExceeded("per-mode cutoff exceeds " + std::to_string(cfg.max_mode_dimension));
        cplx next = gamma * v[n];
        if (n > 0) next -= es * sh * std::sqrt(static_cast<double>(n)) * v[n - 1];
        next /= ch * std::sqrt(n + 1.0);
        v.push_back(next);
        norm += std::norm(next);
    }
    return v;
}

struct JxBlock {
    Eigen::MatrixXd vectors;
    Eigen::VectorXd values;
};

// Eigendecomposition of Jx on the block of total photon number N, basis
// |k, N-k>, k = 0..N.
inline std::shared_ptr<const JxBlock> jx_block(int N) {
    static std::mutex mu;
    static std::map<int, std::shared_ptr<const JxBlock>> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        if (auto it = cache.find(N); it != cache.end()) return it->second;
    }
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N + 1, N + 1);
    for (int k = 0; k < N; ++k) {
        const double v = 0.5 * std::sqrt(static_cast<double>(k + 1) * (N - k));
        M(k + 1, k) = v;
        M(k, k + 1) = v;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    auto blk = std::make_shared<JxBlock>(JxBlock{es.eigenvectors(), es.eigenvalues()});
    std::lock_guard<std::mutex> lock(mu);
    return cache.emplace(N, std::move(blk)).first->second;
}

// Copy into a zero-padded grid so that one raising operator stays in range.
inline TruncatedState padded(const TruncatedState& s, int pad) {
    TruncatedState p;
    p.dim0 = s.dim0 + pad;
    p.dim1 = s.dim1 + pad;
    p.max_total = s.max_total;
    p.amplitudes.assign(static_cast<size_t>(p.dim0) * p.dim1, cplx{});
    for (int k = 0; k < s.dim0; ++k)
        for (int l = 0; l < s.dim1; ++l) p.amplitudes[k * p.dim1 + l] = s.amplitudes[k * s.dim1 + l];
    return p;
}

inline cplx inner(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    cplx s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

// a0^dag a1 and its adjoint on a padded state.
inline std::vector<cplx> apply_x(const TruncatedState& p, bool adjoint) {
    std::vector<cplx> out(p.amplitudes.size());
    for (int k = 0; k < p.dim0; ++k)
        for (int l = 0; l < p.dim1; ++l) {
            const cplx a = p.amplitudes[k * p.dim1 + l];
            if (a == cplx{}) continue;
            if (!adjoint && l > 0 && k + 1 < p.dim0)
                out[(k + 1) * p.dim1 + (l - 1)] += std::sqrt(double(k + 1) * l) * a;
            if (adjoint && k > 0 && l + 1 < p.dim1)
                out[(k - 1) * p.dim1 + (l + 1)] += std::sqrt(double(k) * (l + 1)) * a;
        }
    return out;
}

}  // namespace detail

inline TruncatedState build_state(const InputState& s, const OracleConfig& cfg = {}) {
    validate(s);
    if (!(cfg.tail_tolerance > 0 && cfg.tail_tolerance <= 1e-6))
        throw std::invalid_argument("tail_tolerance must lie in (0, 1e-6]");
    const auto v0 = detail::mode_amplitudes(s.port0, cfg);
    const auto v1 = detail::mode_amplitudes(s.port1, cfg);
    if (static_cast<long>(v0.size()) * static_cast<long>(v1.size()) > cfg.max_joint_dimension)
        throw CutoffExceeded("joint dimension " + std::to_string(v0.size() * v1.size()) +
                             " exceeds budget");
    TruncatedState t;
    t.dim0 = static_cast<int>(v0.size());
    t.dim1 = static_cast<int>(v1.size());
    t.max_total = t.dim0 + t.dim1 - 2;
    t.amplitudes.resize(v0.size() * v1.size());
    for (int k = 0; k < t.dim0; ++k)
        for (int l = 0; l < t.dim1; ++l) t.amplitudes[k * t.dim1 + l] = v0[k] * v1[l];
    const double nrm = std::sqrt(t.norm());
    for (auto& a : t.amplitudes) a /= nrm;
    return t;
}

// exp(i angle Jx): |1,0> -> cos(angle/2)|1,0> + i sin(angle/2)|0,1>.
inline TruncatedState evolve_bs(const TruncatedState& s, double angle) {
    TruncatedState out;
    const int Nmax = std::min(s.max_total, s.dim0 + s.dim1 - 2);
    out.dim0 = out.dim1 = Nmax + 1;
    out.max_total = Nmax;
    out.amplitudes.assign(static_cast<size_t>(out.dim0) * out.dim1, cplx{});
    for (int N = 0; N <= Nmax; ++N) {
        const auto blk = detail::jx_block(N);
        Eigen::VectorXcd x(N + 1);
        bool any = false;
        for (int k = 0; k <= N; ++k) {
            x(k) = s.at(k, N - k);
            any = any || x(k) != cplx{};
        }
        if (!any) continue;
        Eigen::VectorXcd y = blk->vectors.transpose().cast<cplx>() * x;
        for (int j = 0; j <= N; ++j) y(j) *= std::polar(1.0, angle * blk->values(j));
        x = blk->vectors.cast<cplx>() * y;
        for (int k = 0; k <= N; ++k) out.amplitudes[k * out.dim1 + (N - k)] = x(k);
    }
    return out;
}

inline TruncatedState apply_phases(const TruncatedState& s, double phi1, double phi2) {
    TruncatedState out = s;
    for (int k = 0; k < s.dim0; ++k)
        for (int l = 0; l < s.dim1; ++l) out.amplitudes[k * s.dim1 + l] *= std::polar(1.0, -(phi1 * k + phi2 * l));
    return out;
}

inline TruncatedState evolve_mzi(const TruncatedState& s, const BsAngles& ang, double phi1, double phi2) {
    return evolve_bs(apply_phases(evolve_bs(s, ang.theta), phi1, phi2), ang.theta_prime);
}

inline cplx expectation(const TruncatedState& s, Observable o) {
    double acc = 0;
    auto diag = [&](auto f) {
        for (int k = 0; k < s.dim0; ++k)
            for (int l = 0; l < s.dim1; ++l) acc += f(k, l) * std::norm(s.amplitudes[k * s.dim1 + l]);
        return cplx(acc);
    };
    switch (o) {
        case Observable::N0: return diag([](int k, int) { return double(k); });
        case Observable::N1: return diag([](int, int l) { return double(l); });
        case Observable::Jz: return diag([](int k, int l) { return 0.5 * (k - l); });
        case Observable::N: return diag([](int k, int l) { return double(k + l); });
        case Observable::Nd: return diag([](int k, int l) { return double(k - l); });
        case Observable::A0: {
            cplx r = 0;
            for (int k = 1; k < s.dim0; ++k)
                for (int l = 0; l < s.dim1; ++l)
                    r += std::conj(s.at(k - 1, l)) * std::sqrt(double(k)) * s.at(k, l);
            return r;
        }
        case Observable::A1: {
            cplx r = 0;
            for (int k = 0; k < s.dim0; ++k)
                for (int l = 1; l < s.dim1; ++l)
                    r += std::conj(s.at(k, l - 1)) * std::sqrt(double(l)) * s.at(k, l);
            return r;
        }
        case Observable::Jx:
        case Observable::Jy: {
            const auto p = detail::padded(s, 1);
            const cplx x = detail::inner(p.amplitudes, detail::apply_x(p, false));
            return o == Observable::Jx ? cplx(x.real()) : cplx(x.imag());
        }
    }
    return {};
}

// Every Schwinger moment computed numerically from operator actions.
inline SchwingerMoments oracle_schwinger_moments(const TruncatedState& s) {
    const auto p = detail::padded(s, 1);
    const auto& psi = p.amplitudes;
    const auto X = detail::apply_x(p, false);
    const auto Xd = detail::apply_x(p, true);
    const size_t n = psi.size();
    std::vector<cplx> jx(n), jy(n), jz(n), nn(n);
    const cplx I(0, 1);
    for (int k = 0; k < p.dim0; ++k)
        for (int l = 0; l < p.dim1; ++l) {
            const size_t i = static_cast<size_t>(k) * p.dim1 + l;
            jx[i] = 0.5 * (X[i] + Xd[i]);
            jy[i] = -0.5 * I * (X[i] - Xd[i]);
            jz[i] = 0.5 * (k - l) * psi[i];
            nn[i] = double(k + l) * psi[i];
        }
    auto ev = [&](const std::vector<cplx>& a) { return detail::inner(psi, a).real(); };
    auto sym = [&](const std::vector<cplx>& a, const std::vector<cplx>& b) {
        return detail::inner(a, b).real();
    };
    SchwingerMoments m;
    m.mean_jx = ev(jx);
    m.mean_jy = ev(jy);
    m.mean_jz = ev(jz);
    m.mean_n = ev(nn);
    m.var_jx = sym(jx, jx) - m.mean_jx * m.mean_jx;
    m.var_jy = sym(jy, jy) - m.mean_jy * m.mean_jy;
    m.var_jz = sym(jz, jz) - m.mean_jz * m.mean_jz;
    m.var_n = sym(nn, nn) - m.mean_n * m.mean_n;
    m.symcov_xy = sym(jx, jy) - m.mean_jx * m.mean_jy;
    m.symcov_xz = sym(jx, jz) - m.mean_jx * m.mean_jz;
    m.symcov_yz = sym(jy, jz) - m.mean_jy * m.mean_jz;
    m.cov_jx_n = sym(jx, nn) - m.mean_jx * m.mean_n;
    m.cov_jy_n = sym(jy, nn) - m.mean_jy * m.mean_n;
    m.cov_jz_n = sym(jz, nn) - m.mean_jz * m.mean_n;
    return m;
}

// Field moments of one slot: <a>, <a^2>, <a^dag a>.
struct OracleModeMoments {
    cplx a, a2;
    double n = 0;
};

inline OracleModeMoments oracle_mode_moments(const TruncatedState& s, int slot) {
    OracleModeMoments r;
    for (int k = 0; k < s.dim0; ++k)
        for (int l = 0; l < s.dim1; ++l) {
            const cplx v = s.at(k, l);
            if (v == cplx{}) continue;
            const int q = slot == 0 ? k : l;
            r.n += q * std::norm(v);
            const cplx lo1 = slot == 0 ? s.at(k - 1, l) : s.at(k, l - 1);
            const cplx lo2 = slot == 0 ? s.at(k - 2, l) : s.at(k, l - 2);
            r.a += std::conj(lo1) * std::sqrt(double(q)) * v;
            r.a2 += std::conj(lo2) * std::sqrt(double(q) * (q - 1)) * v;
        }
    return r;
}

inline FieldMoments oracle_field_moments(const TruncatedState& s) {
    const auto m0 = oracle_mode_moments(s, 0), m1 = oracle_mode_moments(s, 1);
    FieldMoments f;
    f.mean_a0 = m0.a;
    f.mean_a1 = m1.a;
    f.var_a0 = m0.a2 - m0.a * m0.a;
    f.var_a1 = m1.a2 - m1.a * m1.a;
    f.cov_n0 = m0.n - std::norm(m0.a);
    f.cov_n1 = m1.n - std::norm(m1.a);
    cplx a0a1 = 0, a0a1d = 0;
    for (int k = 1; k < s.dim0; ++k)
        for (int l = 0; l < s.dim1; ++l) {
            const cplx v = s.at(k, l);
            // a0 a1 |k,l> and a0 a1^dag |k,l>
            a0a1 += std::conj(s.at(k - 1, l - 1)) * std::sqrt(double(k) * l) * v;
            a0a1d += std::conj(s.at(k - 1, l + 1)) * std::sqrt(double(k) * (l + 1)) * v;
        }
    f.cov_a0_a1 = a0a1 - m0.a * m1.a;
    f.cov_a0_a1dag = a0a1d - m0.a * std::conj(m1.a);
    return f;
}

namespace detail {

struct ObsStats {
    double mean = 0, var = 0;
};

inline ObsStats output_stats(const TruncatedState& out, Scheme scheme, double phi_local) {
    if (scheme == Scheme::BalancedHomodyne) {
        const auto m = oracle_mode_moments(out, 0);
        const cplx e = std::polar(1.0, -phi_local);
        const double mean = std::real(e * m.a);
        const double second = 0.25 * (2 * std::real(e * e * m.a2) + 2 * m.n + 1);
        return {mean, second - mean * mean};
    }
    double s1 = 0, s2 = 0;
    for (int k = 0; k < out.dim0; ++k)
        for (int l = 0; l < out.dim1; ++l) {
            const double p = std::norm(out.at(k, l));
            const double o = scheme == Scheme::DifferenceIntensity ? double(k - l) : double(k);
            s1 += o * p;
            s2 += o * o * p;
        }
    return {s1, s2 - s1 * s1};
}

}  // namespace detail

// Numeric error propagation: variance at phi, central-difference slope with a
// half-step Richardson cross-check.
inline SensitivityBreakdown oracle_breakdown(const InputState& s, const BsAngles& ang,
                                             const PhaseConfig& ph, Scheme scheme,
                                             const OracleConfig& cfg = {}) {
    if (scheme == Scheme::BalancedHomodyne && ph.convention != PhaseConvention::ExternalReference)
        throw WrongConvention("homodyne detection needs an external phase reference");
    const auto inner_state = evolve_bs(build_state(s, cfg), ang.theta);
    auto stats = [&](double phi) {
        return detail::output_stats(evolve_bs(apply_phases(inner_state, 0.0, phi), ang.theta_prime),
                                    scheme, ph.phi_local);
    };
    const double h = cfg.fd_step;
    const auto c = stats(ph.phi);
    const double d1 = (stats(ph.phi + h).mean - stats(ph.phi - h).mean) / (2 * h);
    const double d2 = (stats(ph.phi + h / 2).mean - stats(ph.phi - h / 2).mean) / h;
    const double der = (4 * d2 - d1) / 3;
    const double scale = std::max(1.0, std::sqrt(std::max(c.var, 0.0)));
    if (std::abs(der) < 1e-8 * scale) throw ZeroDerivative("oracle slope vanishes");
    if (std::abs(d1 - d2) > 1e-5 * std::abs(der))
        throw OracleUnreliable("finite-difference slope not converged");
    return {c.var, der, std::sqrt(std::max(c.var, 0.0)) / std::abs(der)};
}

inline double oracle_sensitivity(const InputState& s, const BsAngles& ang, const PhaseConfig& ph,
                                 Scheme scheme, const OracleConfig& cfg = {}) {
    return oracle_breakdown(s, ang, ph, scheme, cfg).delta_phi;
}

// 4 Var(n3) behind the first beam splitter.
inline double oracle_qfi_single(const InputState& s, double theta, const OracleConfig& cfg = {}) {
    const auto t = evolve_bs(build_state(s, cfg), theta);
    double m1 = 0, m2 = 0;
    for (int k = 0; k < t.dim0; ++k)
        for (int l = 0; l < t.dim1; ++l) {
            const double p = std::norm(t.at(k, l));
            m1 += l * p;
            m2 += double(l) * l * p;
        }
    return 4 * (m2 - m1 * m1);
}

}  // namespace mzi
