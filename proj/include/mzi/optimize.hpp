#pragma once

#include <unsupported/Eigen/Polynomials>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "mzi/detection.hpp"
#include "mzi/qfi.hpp"

namespace mzi {

enum class Reference { None, External };

struct QuarticSolution {
    std::vector<double> real_roots;
    std::vector<double> candidates_phi;  // angles tried (phi, or theta' for the BS2 quartic)
    double chosen = 0;
    double residual = 0;  // worst normalized residual over real_roots
    bool fallback = false;
    bool singular = false;  // chosen sits on a removable 0/0 point (dark fringe)
};

struct Bs2Choice {
    double theta_prime = kPi / 2;
    bool degenerate = false;
};

struct OptimizationReport {
    double theta_opt = 0;
    double theta_prime_opt = 0;
    double phi_opt = 0;
    double phi_local_opt = 0;
    double delta_phi_opt = 0;
    bool hessian_verified = false;
    bool degenerate = false;
    bool grid_fallback = false;
    int iterations = 0;
};

struct JointOptions {
    std::optional<double> theta;        // fix BS1 instead of maximizing the QFI
    std::optional<double> theta_prime;  // fix BS2
    std::optional<double> phi_local;    // homodyne local-oscillator phase
    bool scan_phi_local = false;
    int max_iterations = 100;
    double tolerance = 1e-10;
};

inline double wrap_2pi(double x) {
    double y = std::fmod(x, 2 * kPi);
    if (y < 0) y += 2 * kPi;
    if (y >= 2 * kPi) y = 0;
    return y;
}

// ---------------------------------------------------------------- 1-D / 2-D

template <class F>
double golden_min(F&& f, double a, double b, double tol = 1e-12) {
    const double g = 0.5 * (std::sqrt(5.0) - 1);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    while (std::abs(b - a) > tol * (1 + std::abs(a) + std::abs(b))) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return fc < fd ? c : d;
}

// Scan then golden refinement on the best bracket.
template <class F>
double scan_min(F&& f, double a, double b, int n = 2001) {
    double best = a, fbest = std::numeric_limits<double>::infinity();
    int ib = 0;
    for (int i = 0; i < n; ++i) {
        const double x = a + (b - a) * i / (n - 1);
        const double v = f(x);
        if (v < fbest) {
            fbest = v;
            best = x;
            ib = i;
        }
    }
    const double h = (b - a) / (n - 1);
    const double lo = std::max(a, a + (ib - 1) * h), hi = std::min(b, a + (ib + 1) * h);
    const double x = golden_min(f, lo, hi);
    return f(x) <= fbest ? x : best;
}

struct Point2 {
    double x = 0, y = 0, f = 0;
};

// Newton polish with central-difference derivatives; only accepts steps that
// lower f.
template <class F>
Point2 newton_polish_2d(F&& f, Point2 p, double xlo, double xhi, int iters = 30) {
    for (int it = 0; it < iters; ++it) {
        const double h = 1e-4;
        const double fxp = f(p.x + h, p.y), fxm = f(p.x - h, p.y);
        const double fyp = f(p.x, p.y + h), fym = f(p.x, p.y - h);
        const double gx = (fxp - fxm) / (2 * h), gy = (fyp - fym) / (2 * h);
        const double hxx = (fxp - 2 * p.f + fxm) / (h * h), hyy = (fyp - 2 * p.f + fym) / (h * h);
        const double hxy = (f(p.x + h, p.y + h) - f(p.x + h, p.y - h) - f(p.x - h, p.y + h) +
                            f(p.x - h, p.y - h)) / (4 * h * h);
        const double det = hxx * hyy - hxy * hxy;
        if (!(hxx > 0 && det > 0)) break;
        double dx = -(hyy * gx - hxy * gy) / det, dy = -(hxx * gy - hxy * gx) / det;
        bool moved = false;
        for (int k = 0; k < 20; ++k) {
            const double nx = std::clamp(p.x + dx, xlo, xhi), ny = p.y + dy;
            const double nf = f(nx, ny);
            if (nf <= p.f) {
                moved = std::abs(nx - p.x) + std::abs(ny - p.y) > 0;
                p = {nx, ny, nf};
                break;
            }
            dx /= 2;
            dy /= 2;
        }
        if (!moved || std::abs(dx) + std::abs(dy) < 1e-13) break;
    }
    return p;
}

// Nelder-Mead on a 2-D function, x clamped to [xlo, xhi].
template <class F>
Point2 nelder_mead_2d(F&& f, Point2 p, double step, double xlo, double xhi, int iters = 2000) {
    auto ev = [&](double x, double y) { return Point2{std::clamp(x, xlo, xhi), y, f(std::clamp(x, xlo, xhi), y)}; };
    std::array<Point2, 3> s = {ev(p.x, p.y), ev(p.x + step, p.y), ev(p.x, p.y + step)};
    for (int it = 0; it < iters; ++it) {
        std::sort(s.begin(), s.end(), [](auto& a, auto& b) { return a.f < b.f; });
        if (std::abs(s[2].f - s[0].f) <= 1e-16 * std::abs(s[0].f) &&
            std::abs(s[2].x - s[0].x) + std::abs(s[2].y - s[0].y) < 1e-12)
            break;
        const double cx = 0.5 * (s[0].x + s[1].x), cy = 0.5 * (s[0].y + s[1].y);
        const Point2 r = ev(2 * cx - s[2].x, 2 * cy - s[2].y);
        if (r.f < s[0].f) {
            const Point2 e = ev(3 * cx - 2 * s[2].x, 3 * cy - 2 * s[2].y);
            s[2] = e.f < r.f ? e : r;
        } else if (r.f < s[1].f) {
            s[2] = r;
        } else {
            const Point2 c = ev(0.5 * (cx + s[2].x), 0.5 * (cy + s[2].y));
            if (c.f < s[2].f) {
                s[2] = c;
            } else {
                for (int i = 1; i < 3; ++i) s[i] = ev(0.5 * (s[0].x + s[i].x), 0.5 * (s[0].y + s[i].y));
            }
        }
    }
    std::sort(s.begin(), s.end(), [](auto& a, auto& b) { return a.f < b.f; });
    return s[0];
}

// Dense grid over [xlo, xhi] x [ylo, yhi) followed by simplex and Newton
// refinement of the best cell. Non-finite values count as +inf.
template <class F>
Point2 grid_minimize_2d(F&& f, double xlo, double xhi, double ylo, double yhi, int nx = 201, int ny = 201) {
    auto g = [&](double x, double y) {
        const double v = f(x, y);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };
    Point2 best{xlo, ylo, std::numeric_limits<double>::infinity()};
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            const double x = xlo + (xhi - xlo) * i / (nx - 1);
            const double y = ylo + (yhi - ylo) * j / ny;
            const double v = g(x, y);
            if (v < best.f) best = {x, y, v};
        }
    const double step = std::min((xhi - xlo) / (nx - 1), (yhi - ylo) / ny);
    best = nelder_mead_2d(g, best, step, xlo, xhi);
    return newton_polish_2d(g, best, xlo, xhi);
}

// ---------------------------------------------------------------- quartic

// Normalized residual |p(t)| / sum |c_k| |t|^k; coefficients low to high.
inline double poly_residual(const std::vector<double>& c, double t) {
    double p = 0, s = 0, tk = 1;
    for (double ck : c) {
        p += ck * tk;
        s += std::abs(ck * tk);
        tk *= t;
    }
    return s > 0 ? std::abs(p) / s : 0.0;
}

// Real roots of sum c_k t^k via the companion matrix, Newton-polished.
inline std::vector<double> real_poly_roots(std::vector<double> c, double* worst_residual = nullptr) {
    double mx = 0;
    for (double x : c) mx = std::max(mx, std::abs(x));
    if (worst_residual) *worst_residual = 0;
    if (mx == 0) return {};
    while (!c.empty() && std::abs(c.back()) <= 1e-14 * mx) c.pop_back();
    std::vector<double> roots;
    if (c.size() <= 1) return roots;
    if (c.size() == 2) {
        roots.push_back(-c[0] / c[1]);
    } else {
        Eigen::VectorXd coeffs(c.size());
        for (size_t i = 0; i < c.size(); ++i) coeffs(i) = c[i] / mx;
        Eigen::PolynomialSolver<double, Eigen::Dynamic> solver(coeffs);
        for (int i = 0; i < solver.roots().size(); ++i) {
            const auto z = solver.roots()(i);
            if (std::abs(z.imag()) < 1e-9 * (1 + std::abs(z.real()))) roots.push_back(z.real());
        }
    }
    for (double& t : roots) {
        for (int it = 0; it < 3; ++it) {
            double p = 0, dp = 0;
            for (size_t k = c.size(); k-- > 0;) {
                dp = dp * t + p;
                p = p * t + c[k];
            }
            if (dp == 0) break;
            const double nt = t - p / dp;
            if (poly_residual(c, nt) <= poly_residual(c, t)) t = nt;
        }
        if (worst_residual) *worst_residual = std::max(*worst_residual, poly_residual(c, t));
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

// Quartic in t = tan(phi/2) whose roots are the stationary points of the
// coefficient form; low to high.
inline std::vector<double> working_point_quartic(const SensitivityCoefficients& k) {
    const double A = k.a, B = k.b, C = k.c, D = k.d, E = k.e, F = k.f, G = k.g;
    const double p = 4 * (A * F - C * G), q = 2 * (D * F - E * G);
    return {-2 * (A + B) * G + 2 * C * F - 2 * D * G + E * F, p + q, 6 * E * F, p - q,
            2 * (A + B) * G - 2 * C * F - 2 * D * G + E * F};
}

namespace detail {

// Coefficient form at x, continued through a removable 0/0 point such as the
// dark fringe of a classical input. There the numerator has a double zero, so
// the limit is sqrt(num''/2) / |den'|. +inf at a genuine pole.
inline double coefficient_value(const SensitivityCoefficients& k, double x, bool* singular = nullptr) {
    if (singular) *singular = false;
    const double c = std::cos(x), s = std::sin(x);
    const double num = k.a + k.b * c * c + k.c * std::sin(2 * x) + k.d * c + k.e * s;
    const double den = k.f * c + k.g * s;
    const double dscale = std::hypot(k.f, k.g);
    const double nscale = std::abs(k.a) + std::abs(k.b) + std::abs(k.c) + std::abs(k.d) + std::abs(k.e);
    if (std::abs(den) > 1e-9 * dscale) return std::sqrt(std::max(num, 0.0)) / std::abs(den);
    const double inf = std::numeric_limits<double>::infinity();
    if (num > 1e-9 * nscale) return inf;
    const double num2 = -2 * k.b * std::cos(2 * x) - 4 * k.c * std::sin(2 * x) - k.d * c - k.e * s;
    const double dden = -k.f * s + k.g * c;
    if (dden == 0) return inf;
    if (singular) *singular = true;
    return std::sqrt(std::max(num2, 0.0) / 2) / std::abs(dden);
}

// Smallest value wins; near-ties (1e-12 relative) go to the smaller angle.
inline bool better(double v, double x, double best_v, double best_x) {
    if (!std::isfinite(best_v)) return std::isfinite(v);
    if (v < best_v * (1 - 1e-12)) return true;
    return v <= best_v * (1 + 1e-12) && x < best_x;
}

}  // namespace detail

inline QuarticSolution optimal_working_point(const SensitivityCoefficients& k, bool force_quartic = false) {
    const double scale = std::max({std::abs(k.a), std::abs(k.b), std::abs(k.c), std::abs(k.d),
                                   std::abs(k.e), std::abs(k.f), std::abs(k.g)});
    auto zero = [&](double x) { return std::abs(x) <= 1e-12 * scale; };
    if (scale == 0 || (zero(k.f) && zero(k.g)))
        throw ZeroDerivativeEverywhere("F and G vanish");

    QuarticSolution sol;
    std::vector<double> cand = {0, kPi / 2, kPi, 3 * kPi / 2};
    const bool ce0 = zero(k.c) && zero(k.e);
    bool closed = !force_quartic;
    if (closed && ce0 && zero(k.f) && zero(k.d)) {
        // pi/2 + k pi, already listed
    } else if (closed && ce0 && zero(k.g)) {
        // k pi, already listed
    } else if (closed && ce0 && zero(k.f) && (k.a + k.b - k.d) != 0 &&
               (k.a + k.b + k.d) / (k.a + k.b - k.d) > 0) {
        const double t = std::pow((k.a + k.b + k.d) / (k.a + k.b - k.d), 0.25);
        sol.real_roots = {-t, t};
        cand.push_back(2 * std::atan(t));
        cand.push_back(2 * std::atan(-t));
    } else if (closed && zero(k.c) && zero(k.d) && zero(k.e) && !zero(k.f) && !zero(k.a)) {
        const double p = std::atan((k.a + k.b) * k.g / (k.a * k.f));
        cand.push_back(p);
        cand.push_back(p + kPi);
    } else {
        const auto q = working_point_quartic(k);
        sol.real_roots = real_poly_roots(q, &sol.residual);
        for (double t : sol.real_roots) cand.push_back(2 * std::atan(t));
    }
    double best_v = std::numeric_limits<double>::infinity(), best_x = 0;
    for (double& x : cand) {
        x = wrap_2pi(x);
        bool sing = false;
        const double v = detail::coefficient_value(k, x, &sing);
        if (detail::better(v, x, best_v, best_x)) {
            best_v = v;
            best_x = x;
            sol.singular = sing;
        }
    }
    if (!std::isfinite(best_v)) throw ZeroDerivativeEverywhere("no candidate with a signal");
    sol.candidates_phi = std::move(cand);
    sol.chosen = best_x;
    return sol;
}

// ---------------------------------------------------------------- BS1

inline QfiKind qfi_kind(Reference r) { return r == Reference::External ? QfiKind::SingleI : QfiKind::TwoParam; }

namespace detail {

inline double qfi_slope(const SchwingerMoments& m, double theta, QfiKind which) {
    const double c = std::cos(theta), s = std::sin(theta);
    const double dvz = std::sin(2 * theta) * (m.var_jy - m.var_jz) - 2 * std::cos(2 * theta) * m.symcov_yz;
    const double czn = c * m.cov_jz_n - s * m.cov_jy_n;
    const double dczn = -s * m.cov_jz_n - c * m.cov_jy_n;
    if (which == QfiKind::SingleI) return 4 * dvz - 4 * dczn;
    if (m.var_n == 0) return 4 * dvz;
    return 4 * dvz - 8 * czn * dczn / m.var_n;
}

}  // namespace detail

// Maximizes the relevant QFI over theta in [0, pi]: 2001-point scan, golden
// refinement, then bisection on the analytic slope.
inline double optimize_bs1(const SchwingerMoments& m, QfiKind which) {
    const int n = 2001;
    std::vector<double> f(n);
    double fmax = -std::numeric_limits<double>::infinity(), fmin = -fmax;
    int ib = 0;
    for (int i = 0; i < n; ++i) {
        f[i] = qfi_value(m, kPi * i / (n - 1), which);
        if (f[i] > fmax) {
            fmax = f[i];
            ib = i;
        }
        fmin = std::min(fmin, f[i]);
    }
    if (!(fmax > 0) || fmax - fmin < 1e-12 * std::abs(fmax)) throw FlatObjective("QFI is flat in theta");
    const double h = kPi / (n - 1);
    const double lo = std::max(0.0, (ib - 1) * h), hi = std::min(kPi, (ib + 1) * h);
    double x = golden_min([&](double t) { return -qfi_value(m, t, which); }, lo, hi);
    // Slope polish: bracket a sign change of dF/dtheta around x.
    auto slope = [&](double t) { return detail::qfi_slope(m, t, which); };
    double a = std::max(0.0, x - h), b = std::min(kPi, x + h);
    double sa = slope(a), sb = slope(b);
    if (sa > 0 && sb < 0) {
        for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
            const double mid = 0.5 * (a + b);
            (slope(mid) > 0 ? a : b) = mid;
        }
        const double y = 0.5 * (a + b);
        if (qfi_value(m, y, which) >= qfi_value(m, x, which) * (1 - 1e-14)) x = y;
    } else if (ib == 0 || ib == n - 1) {
        x = ib == 0 ? 0.0 : kPi;
    }
    return x;
}

inline double optimize_bs1(const InputState& s, Reference ref) {
    return optimize_bs1(schwinger_moments(s), qfi_kind(ref));
}

// ---------------------------------------------------------------- BS2

// Difference detection: K = cos(t') u + sin(t') v, minimizing
// K.S.K / sin^2(t') gives cot(t') = -u.S.v / u.S.u.
inline Bs2Choice optimize_bs2_difference(const SchwingerMoments& m, double theta, double phi) {
    const Vec3 u{0, -std::sin(theta), std::cos(theta)};
    const Vec3 v{std::sin(phi), -std::cos(theta) * std::cos(phi), -std::sin(theta) * std::cos(phi)};
    const Mat3 S = covariance_matrix(m);
    const double uu = quad(u, S, u), uv = quad(u, S, v);
    const double scale = std::max({m.var_jx, m.var_jy, m.var_jz, 1e-300});
    if (std::abs(uu) <= 1e-14 * scale && std::abs(uv) <= 1e-14 * scale) {
        auto f = [&](double tp) {
            try {
                return sensitivity_difference(m, {theta, tp}, phi).delta_phi;
            } catch (const ZeroDerivative&) {
                return std::numeric_limits<double>::infinity();
            }
        };
        return {scan_min(f, 0.0, kPi), true};
    }
    const double tp = std::atan2(uu, -uv);
    return {tp, tp <= 0 || tp >= kPi};
}

// Single-mode detection: stationarity of Var(n4)/sin^2(t') in t = tan(t'/2).
inline QuarticSolution optimize_bs2_single(const SchwingerMoments& m, double theta, double phi) {
    const Vec3 u{0, -std::sin(theta), std::cos(theta)};
    const Vec3 v{std::sin(phi), -std::cos(theta) * std::cos(phi), -std::sin(theta) * std::cos(phi)};
    const Mat3 S = covariance_matrix(m);
    const Vec3 cn = cov_n_vector(m);
    const double S0 = 0.25 * m.var_n + quad(u, S, u), S1 = 2 * quad(u, S, v);
    const double S2 = dot(u, cn), S3 = dot(v, cn);
    const std::vector<double> q = {S0 + S2, S1 + S3, 0.0, S1 - S3, S2 - S0};

    QuarticSolution sol;
    auto f = [&](double tp) {
        try {
            return sensitivity_single(m, {theta, tp}, phi).delta_phi;
        } catch (const ZeroDerivative&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    sol.real_roots = real_poly_roots(q, &sol.residual);
    double best_v = std::numeric_limits<double>::infinity();
    for (double t : sol.real_roots) {
        if (!(t > 0)) continue;
        const double tp = 2 * std::atan(t);
        sol.candidates_phi.push_back(tp);
        const double val = f(tp);
        if (detail::better(val, tp, best_v, sol.chosen)) {
            best_v = val;
            sol.chosen = tp;
        }
    }
    if (!std::isfinite(best_v)) {
        sol.fallback = true;
        sol.chosen = scan_min(f, 0.0, kPi);
    }
    return sol;
}

namespace detail {

struct HomodyneForm {
    double m11, m12, m22, d0;
};

// Var(X) = [c', s'] M [c', s']^T and dX/dphi = s' d0.
inline HomodyneForm homodyne_form(const FieldMoments& fm, double theta, double phi, double phi_local) {
    const auto p10 = homodyne_parts(fm, theta, 1, 0, phi, phi_local);
    const auto p01 = homodyne_parts(fm, theta, 0, 1, phi, phi_local);
    const double r = std::sqrt(0.5);
    const auto p11 = homodyne_parts(fm, theta, r, r, phi, phi_local);
    return {p10.variance, p11.variance - 0.5 * (p10.variance + p01.variance), p01.variance, p01.derivative};
}

}  // namespace detail

// Homodyne: minimizing (M11 x^2 + 2 M12 x + M22) over x = cot(t'/2) >= 0.
inline Bs2Choice optimize_bs2_homodyne(const FieldMoments& fm, double theta, double phi, double phi_local) {
    const auto h = detail::homodyne_form(fm, theta, phi, phi_local);
    if (!(h.m11 > 0) || h.d0 == 0) {
        auto f = [&](double tp) {
            try {
                return sensitivity_homodyne(fm, {theta, tp}, phi, phi_local).delta_phi;
            } catch (const ZeroDerivative&) {
                return std::numeric_limits<double>::infinity();
            }
        };
        return {scan_min(f, 0.0, kPi), true};
    }
    const double half = std::atan2(h.m11, -h.m12);
    if (half >= kPi / 2) return {kPi, true};
    return {2 * half, false};
}

// ---------------------------------------------------------------- joint

inline double default_local_oscillator(const InputState& s) {
    const bool p0 = s.port0.has_amplitude(), p1 = s.port1.has_amplitude();
    if (p0 && (!p1 || s.port0.amplitude_mag > s.port1.amplitude_mag)) return s.port0.amplitude_phase;
    return p1 ? s.port1.amplitude_phase : 0.0;
}

// Scheme sensitivity at a point; throws ZeroDerivative like the direct formulas.
inline double scheme_delta_phi(Scheme scheme, const SchwingerMoments& m, const FieldMoments& fm,
                               const BsAngles& ang, double phi, double phi_local) {
    switch (scheme) {
        case Scheme::DifferenceIntensity: return sensitivity_difference(m, ang, phi).delta_phi;
        case Scheme::SingleModeIntensity: return sensitivity_single(m, ang, phi).delta_phi;
        case Scheme::BalancedHomodyne: return sensitivity_homodyne(fm, ang, phi, phi_local).delta_phi;
    }
    return 0;
}

inline SensitivityCoefficients scheme_coefficients(Scheme scheme, const SchwingerMoments& m,
                                                   const FieldMoments& fm, const BsAngles& ang,
                                                   double phi_local) {
    return scheme == Scheme::BalancedHomodyne ? generic_coefficients(fm, ang, phi_local)
                                              : generic_coefficients(scheme, m, ang);
}

inline Bs2Choice bs2_step(Scheme scheme, const SchwingerMoments& m, const FieldMoments& fm, double theta,
                          double phi, double phi_local) {
    switch (scheme) {
        case Scheme::DifferenceIntensity: return optimize_bs2_difference(m, theta, phi);
        case Scheme::SingleModeIntensity: {
            const auto q = optimize_bs2_single(m, theta, phi);
            return {q.chosen, q.fallback};
        }
        case Scheme::BalancedHomodyne: return optimize_bs2_homodyne(fm, theta, phi, phi_local);
    }
    return {};
}

namespace detail {

inline double angle_gap(double a, double b) {
    const double d = std::abs(wrap_2pi(a) - wrap_2pi(b));
    return std::min(d, 2 * kPi - d);
}

inline OptimizationReport joint_at(const InputState& s, Scheme scheme, double theta, double phi_local,
                                   const JointOptions& opt) {
    const auto m = schwinger_moments(s);
    const auto fm = field_moments(s);
    OptimizationReport r;
    r.theta_opt = theta;
    r.phi_local_opt = phi_local;
    auto dphi = [&](double tp, double phi) {
        try {
            return scheme_delta_phi(scheme, m, fm, {theta, std::clamp(tp, 0.0, kPi)}, phi, phi_local);
        } catch (const ZeroDerivative&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    auto wp = [&](double tp) {
        return optimal_working_point(scheme_coefficients(scheme, m, fm, {theta, tp}, phi_local)).chosen;
    };

    double tp = opt.theta_prime.value_or(kPi / 2);
    double phi = wp(tp);
    bool converged = opt.theta_prime.has_value();
    bool bs2_degenerate = false;
    if (!converged) {
        for (int it = 0; it < opt.max_iterations; ++it) {
            r.iterations = it + 1;
            const auto step = bs2_step(scheme, m, fm, theta, phi, phi_local);
            bs2_degenerate = step.degenerate;
            const double nphi = wp(step.theta_prime);
            const double dtp = std::abs(step.theta_prime - tp), dph = angle_gap(nphi, phi);
            tp = step.theta_prime;
            phi = nphi;
            if (dtp < opt.tolerance && dph < opt.tolerance) {
                converged = true;
                break;
            }
        }
    }
    if (!converged) {
        r.grid_fallback = true;
        const auto g = grid_minimize_2d(dphi, 0.0, kPi, 0.0, 2 * kPi);
        tp = g.x;
        phi = wrap_2pi(g.y);
        // A last closed-form pass from the grid point.
        const auto step = bs2_step(scheme, m, fm, theta, phi, phi_local);
        const double nphi = wp(step.theta_prime);
        if (dphi(step.theta_prime, nphi) <= dphi(tp, phi)) {
            tp = step.theta_prime;
            phi = nphi;
            bs2_degenerate = step.degenerate;
        }
    }
    r.theta_prime_opt = tp;
    r.phi_opt = wrap_2pi(phi);
    bool at_limit = false;
    const double limit = detail::coefficient_value(scheme_coefficients(scheme, m, fm, {theta, tp}, phi_local),
                                                   r.phi_opt, &at_limit);
    r.delta_phi_opt = at_limit ? limit : scheme_delta_phi(scheme, m, fm, {theta, tp}, r.phi_opt, phi_local);
    if (!std::isfinite(r.delta_phi_opt)) throw ZeroDerivative("no signal at the optimum");

    // Second-order test by central differences.
    const double h = 1e-5, f0 = r.delta_phi_opt;
    const double fpp = dphi(tp, r.phi_opt + h), fpm = dphi(tp, r.phi_opt - h);
    const double hpp = (fpp - 2 * f0 + fpm) / (h * h);
    const bool interior = tp - h > 0 && tp + h < kPi;
    if (opt.theta_prime.has_value() || !interior) {
        r.hessian_verified = hpp > 0;
    } else {
        const double ftp = dphi(tp + h, r.phi_opt), ftm = dphi(tp - h, r.phi_opt);
        const double htt = (ftp - 2 * f0 + ftm) / (h * h);
        const double htp = (dphi(tp + h, r.phi_opt + h) - dphi(tp + h, r.phi_opt - h) -
                            dphi(tp - h, r.phi_opt + h) + dphi(tp - h, r.phi_opt - h)) / (4 * h * h);
        r.hessian_verified = htt > 0 && hpp > 0 && htt * hpp - htp * htp > 0;
    }
    auto edge = [](double a) { return a <= 1e-9 || a >= kPi - 1e-9; };
    r.degenerate = edge(theta) || edge(tp) || bs2_degenerate || at_limit;
    return r;
}

}  // namespace detail

// BS1 from the QFI, then alternating closed-form BS2 and working-point steps.
inline OptimizationReport joint_optimize(const InputState& s, Scheme scheme, Reference ref,
                                         const JointOptions& opt = {}) {
    if (scheme == Scheme::BalancedHomodyne && ref != Reference::External)
        throw WrongConvention("homodyne detection needs an external phase reference");
    const double theta = opt.theta.value_or(0.0);
    const double th = opt.theta ? theta : optimize_bs1(s, ref);
    if (scheme != Scheme::BalancedHomodyne || !opt.scan_phi_local || opt.phi_local)
        return detail::joint_at(s, scheme, th, opt.phi_local.value_or(default_local_oscillator(s)), opt);

    auto cost = [&](double pl) {
        try {
            return detail::joint_at(s, scheme, th, pl, opt).delta_phi_opt;
        } catch (const Error&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    const double pl = scan_min(cost, 0.0, kPi, 181);
    return detail::joint_at(s, scheme, th, pl, opt);
}

}  // namespace mzi
