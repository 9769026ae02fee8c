// Optimal splitters and working point for a coherent beam plus squeezed vacuum,
// under each detection scheme.
//
//   best_settings [alpha] [r]

#include <cstdio>
#include <cstdlib>

#include "mzi/optimize.hpp"

using namespace mzi;

int main(int argc, char** argv) {
    const double alpha = argc > 1 ? std::atof(argv[1]) : 100.0;
    const double r = argc > 2 ? std::atof(argv[2]) : 1.2;
    const InputState in = apply_pmc({ModeSpec::squeezed_vacuum(r), ModeSpec::coherent(alpha)}, PmcId::CohSqzVac);

    std::printf("%-20s %8s %8s %10s %12s %12s\n", "scheme", "tau", "tau'", "phi/pi", "dphi", "qcrb");
    for (Scheme sc : {Scheme::DifferenceIntensity, Scheme::SingleModeIntensity, Scheme::BalancedHomodyne}) {
        const Reference ref = sc == Scheme::BalancedHomodyne ? Reference::External : Reference::None;
        try {
            const auto o = joint_optimize(in, sc, ref);
            const auto q = qfi_report(fisher_matrix(in, o.theta_opt));
            std::printf("%-20s %8.5f %8.5f %10.6f %12.5e %12.5e%s\n", std::string(to_string(sc)).c_str(),
                        theta_to_tau(o.theta_opt), theta_to_tau(o.theta_prime_opt), o.phi_opt / kPi,
                        o.delta_phi_opt, ref == Reference::External ? q.qcrb_i : q.qcrb_2p,
                        o.degenerate ? "  (degenerate)" : "");
        } catch (const Error& e) {
            std::printf("%-20s %s\n", std::string(to_string(sc)).c_str(), e.what());
        }
    }
    return 0;
}
