#pragma once

// Numerical checks shared by the optimizer tests and the acceptance binary.

#include <cmath>
#include <limits>
#include <vector>

#include "mzi/optimize.hpp"

namespace mzi::testing {

struct Objective {
    Scheme scheme;
    SchwingerMoments m;
    FieldMoments fm;
    double theta;
    double phi_local;

    Objective(Scheme s, const InputState& in, double th, double pl)
        : scheme(s), m(schwinger_moments(in)), fm(field_moments(in)), theta(th), phi_local(pl) {}

    double operator()(double tp, double phi) const {
        if (!(tp > 0 && tp < kPi)) return std::numeric_limits<double>::infinity();
        try {
            return scheme_delta_phi(scheme, m, fm, {theta, tp}, phi, phi_local);
        } catch (const ZeroDerivative&) {
            return std::numeric_limits<double>::infinity();
        }
    }
};

// Largest central-difference partial derivative relative to the value.
inline double relative_gradient(const Objective& f, double tp, double phi, bool with_tp = true) {
    const double h = 1e-5, v = f(tp, phi);
    const double gp = (f(tp, phi + h) - f(tp, phi - h)) / (2 * h);
    const double gt = with_tp ? (f(tp + h, phi) - f(tp - h, phi)) / (2 * h) : 0.0;
    return std::max(std::abs(gp), std::abs(gt)) / v;
}

// Every global minimizer found by a 201x201 grid with per-basin refinement;
// nothing about the closed forms is used.
inline std::vector<Point2> blind_minima(const Objective& f, int n = 201) {
    std::vector<double> g(n * n);
    auto tp_at = [&](int i) { return kPi * i / (n - 1); };
    auto ph_at = [&](int j) { return 2 * kPi * j / n; };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g[i * n + j] = f(tp_at(i), ph_at(j));
    double best = std::numeric_limits<double>::infinity();
    for (double v : g) best = std::min(best, v);
    std::vector<Point2> out;
    for (int i = 1; i + 1 < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double v = g[i * n + j];
            if (!(v <= best * 1.5)) continue;
            bool local = true;
            for (int di = -1; di <= 1 && local; ++di)
                for (int dj = -1; dj <= 1; ++dj)
                    if ((di || dj) && g[(i + di) * n + (j + dj + n) % n] < v) local = false;
            if (!local) continue;
            auto p = nelder_mead_2d(f, {tp_at(i), ph_at(j), v}, kPi / (n - 1), 0.0, kPi);
            p = newton_polish_2d(f, p, 0.0, kPi);
            p.y = wrap_2pi(p.y);
            out.push_back(p);
        }
    double top = std::numeric_limits<double>::infinity();
    for (auto& p : out) top = std::min(top, p.f);
    std::vector<Point2> keep;
    for (auto& p : out) {
        if (p.f > top * (1 + 1e-9)) continue;
        bool dup = false;
        for (auto& q : keep)
            if (std::abs(q.x - p.x) < 1e-5 && detail::angle_gap(q.y, p.y) < 1e-5) dup = true;
        if (!dup) keep.push_back(p);
    }
    return keep;
}

struct BlindMatch {
    double location_gap = std::numeric_limits<double>::infinity();
    double value_gap = std::numeric_limits<double>::infinity();
};

inline BlindMatch compare_blind(const Objective& f, double tp, double phi) {
    BlindMatch r;
    const double v = f(tp, phi);
    for (const auto& p : blind_minima(f)) {
        const double loc = std::max(std::abs(p.x - tp), detail::angle_gap(p.y, phi));
        if (loc < r.location_gap) {
            r.location_gap = loc;
            r.value_gap = std::abs(p.f - v) / v;
        }
    }
    return r;
}

}  // namespace mzi::testing
