#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "mzi/mzi_core.hpp"

namespace mzi {

struct FisherMatrix {
    double f_ss = 0, f_sd = 0, f_dd = 0;
};

struct QfiReport {
    double f_2p = 0;
    double f_i = 0;
    double f_ii = 0;
    double qcrb_2p = 0;
    double qcrb_i = 0;
};

enum class QfiKind { TwoParam, SingleI };

// Generators are the internal photon numbers: f_ss = Var(N),
// f_dd = Var(n2 - n3) = 4 Var(Jz'), f_sd = Cov(N, n2 - n3).
inline FisherMatrix fisher_matrix(const SchwingerMoments& m, double theta) {
    const auto r = internal_mode_moments(m, theta);
    return {m.var_n, 2 * r.cov_jz_n, 4 * r.var_jz};
}

inline FisherMatrix fisher_matrix(const InputState& s, double theta) {
    return fisher_matrix(schwinger_moments(s), theta);
}

inline double crb(double f) {
    return f > 0 ? 1.0 / std::sqrt(f) : std::numeric_limits<double>::infinity();
}

inline QfiReport qfi_report(const FisherMatrix& fm) {
    QfiReport q;
    if (fm.f_ss == 0) {
        if (fm.f_sd != 0) throw DegenerateFisher("f_ss = 0 with nonzero f_sd");
        q.f_2p = fm.f_dd;
    } else {
        q.f_2p = fm.f_dd - fm.f_sd * fm.f_sd / fm.f_ss;
    }
    q.f_i = fm.f_ss + fm.f_dd - 2 * fm.f_sd;
    q.f_ii = fm.f_dd;
    q.qcrb_2p = crb(q.f_2p);
    q.qcrb_i = crb(q.f_i);
    return q;
}

inline double qfi_value(const SchwingerMoments& m, double theta, QfiKind which) {
    const auto q = qfi_report(fisher_matrix(m, theta));
    return which == QfiKind::TwoParam ? q.f_2p : q.f_i;
}

// Samples (tau, F) on a uniform tau grid over [0, 1].
inline std::vector<std::pair<double, double>> qfi_vs_theta(const InputState& s, QfiKind which,
                                                           int grid) {
    if (grid < 2) throw std::invalid_argument("grid must be >= 2");
    const auto m = schwinger_moments(s);
    std::vector<std::pair<double, double>> out;
    out.reserve(grid);
    for (int i = 0; i < grid; ++i) {
        const double tau = static_cast<double>(i) / (grid - 1);
        out.emplace_back(tau, qfi_value(m, tau_to_theta(tau), which));
    }
    return out;
}

}  // namespace mzi
