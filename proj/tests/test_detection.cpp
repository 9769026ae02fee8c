#include <gtest/gtest.h>

#include <random>

#include "mzi/detection.hpp"
#include "mzi/fock_oracle.hpp"
#include "mzi/qfi.hpp"
#include "test_util.hpp"

using namespace mzi;
using mzi::testing::close_rel;

namespace {

InputState fig_state() {
    return apply_pmc({ModeSpec::squeezed_vacuum(1.2), ModeSpec::coherent(100.0)}, PmcId::CohSqzVac);
}

PhaseConfig ext(double phi, double phi_local) {
    return {PhaseConvention::ExternalReference, phi, phi_local};
}

}  // namespace

TEST(Difference, BalancedQuarterWaveIsLocalMinimum) {
    const auto m = schwinger_moments(fig_state());
    const BsAngles ang{kPi / 2, kPi / 2};
    const double d0 = sensitivity_difference(m, ang, kPi / 2).delta_phi;
    EXPECT_LT(d0, sensitivity_difference(m, ang, kPi / 2 + 1e-3).delta_phi);
    EXPECT_LT(d0, sensitivity_difference(m, ang, kPi / 2 - 1e-3).delta_phi);
    const double bound = qfi_report(fisher_matrix(m, kPi / 2)).qcrb_2p;
    EXPECT_GE(d0, bound * (1 - 1e-9));
    EXPECT_LT(d0, bound * 1.05);
}

TEST(Difference, VacuumHasNoSignal) {
    const auto m = schwinger_moments({ModeSpec::vacuum(), ModeSpec::vacuum()});
    EXPECT_THROW(sensitivity_difference(m, {kPi / 2, kPi / 2}, 0.3), ZeroDerivative);
}

TEST(Difference, MatchesOracleCoherentFock) {
    const InputState s{ModeSpec::fock(1), ModeSpec::coherent(2.0)};
    const BsAngles ang{kPi / 2, kPi / 2};
    const auto a = sensitivity_difference(schwinger_moments(s), ang, kPi / 2);
    const auto o = oracle_breakdown(s, ang, {PhaseConvention::NoExternalReference, kPi / 2, 0},
                                    Scheme::DifferenceIntensity);
    EXPECT_TRUE(close_rel(a.variance, o.variance, 1e-8));
    EXPECT_TRUE(close_rel(std::abs(a.derivative), std::abs(o.derivative), 1e-6));
    EXPECT_TRUE(close_rel(a.delta_phi, o.delta_phi, 1e-6));
}

TEST(Single, MinimumNearClosedFormWorkingPoint) {
    const auto m = schwinger_moments(fig_state());
    const BsAngles ang{kPi / 2, kPi / 2};
    const double phi = 2 * std::atan(std::sqrt(std::sqrt(2.0) * 100 / std::sinh(2.4)));
    EXPECT_NEAR(phi / kPi, 0.876, 5e-4);
    const double d0 = sensitivity_single(m, ang, phi).delta_phi;
    EXPECT_LT(d0, sensitivity_single(m, ang, phi + 1e-4).delta_phi);
    EXPECT_LT(d0, sensitivity_single(m, ang, phi - 1e-4).delta_phi);
}

TEST(Single, ClosedSecondSplitterKillsSignal) {
    const auto m = schwinger_moments(fig_state());
    EXPECT_THROW(sensitivity_single(m, {kPi / 2, 0.0}, 1.0), ZeroDerivative);
}

TEST(Single, MatchesOracle) {
    const InputState s{ModeSpec::squeezed_vacuum(0.5), ModeSpec::coherent(2.0)};
    const BsAngles ang{kPi / 2, kPi / 3};
    const auto a = sensitivity_single(schwinger_moments(s), ang, 2.0);
    const auto o = oracle_breakdown(s, ang, {PhaseConvention::NoExternalReference, 2.0, 0},
                                    Scheme::SingleModeIntensity);
    EXPECT_TRUE(close_rel(a.delta_phi, o.delta_phi, 1e-6));
    EXPECT_TRUE(close_rel(mean_n4(schwinger_moments(s), ang, 2.0),
                          expectation(evolve_mzi(build_state(s), ang, 0, 2.0), Observable::N0).real(), 1e-9));
}

TEST(Extinction, DarkFringeOfCoherentBeam) {
    const auto m = schwinger_moments({ModeSpec::vacuum(), ModeSpec::coherent(3.0)});
    // Port-1 light leaves through port 4 fully at phi = pi and not at all at phi = 0.
    EXPECT_NEAR(extinction_rate(m, {kPi / 2, kPi / 2}, 0.0), 1.0, 1e-15);
    EXPECT_NEAR(extinction_rate(m, {kPi / 2, kPi / 2}, kPi), 0.0, 1e-15);
    EXPECT_THROW(extinction_rate(schwinger_moments({}), {kPi / 2, kPi / 2}, 0.0), EmptyInput);
}

TEST(Homodyne, GlobalMinimumAtPi) {
    const auto s = fig_state();
    const auto fm = field_moments(s);
    const BsAngles ang{tau_to_theta(0.55), tau_to_theta(0.45)};
    const double d0 = sensitivity_homodyne(fm, ang, kPi, 0.0).delta_phi;
    for (double phi = 0.05; phi < 2 * kPi; phi += 0.05)
        if (std::abs(phi - kPi) > 1e-9) {
            try {
                EXPECT_GE(sensitivity_homodyne(fm, ang, phi, 0.0).delta_phi, d0);
            } catch (const ZeroDerivative&) {
            }
        }
}

TEST(Homodyne, ShotNoiseScaling) {
    for (double a : {10.0, 100.0, 1000.0}) {
        const auto fm = field_moments({ModeSpec::vacuum(), ModeSpec::coherent(a, 0.3)});
        const double d = sensitivity_homodyne(fm, {kPi / 2, kPi / 2}, kPi, 0.3).delta_phi;
        EXPECT_NEAR(d * a, 1.0, 1e-12);
    }
}

TEST(Homodyne, RequiresExternalReference) {
    const auto fm = field_moments(fig_state());
    EXPECT_THROW(sensitivity_homodyne(fm, {}, PhaseConfig{PhaseConvention::NoExternalReference, kPi, 0}),
                 WrongConvention);
}

TEST(Homodyne, MatchesOracleCoherentFock) {
    const InputState s{ModeSpec::fock(1), ModeSpec::coherent(2.0)};
    const double tau = 0.5 + 4.0 / (2.0 * 1 * (1 + 8.0));
    const BsAngles ang{tau_to_theta(tau), 1.1};
    const auto a = sensitivity_homodyne(field_moments(s), ang, kPi, 0.0);
    const auto o = oracle_breakdown(s, ang, ext(kPi, 0.0), Scheme::BalancedHomodyne);
    EXPECT_TRUE(close_rel(a.variance, o.variance, 1e-8));
    EXPECT_TRUE(close_rel(a.delta_phi, o.delta_phi, 1e-6));
}

TEST(Coefficients, TrivialForm) {
    SensitivityCoefficients c;
    c.a = 1;
    c.g = 1;
    EXPECT_NEAR(sensitivity_from_coefficients(c, kPi / 2), 1.0, 1e-15);
    EXPECT_THROW(sensitivity_from_coefficients(c, 0.0), ZeroDerivative);
}

TEST(Coefficients, BalancedDifferenceStructure) {
    const auto m = schwinger_moments(fig_state());
    const auto c = generic_coefficients(Scheme::DifferenceIntensity, m, {kPi / 2, kPi / 2});
    const double s = std::max({std::abs(c.a), std::abs(c.b), std::abs(c.g)});
    EXPECT_NEAR(c.c / s, 0, 1e-14);
    EXPECT_NEAR(c.d / s, 0, 1e-14);
    EXPECT_NEAR(c.e / s, 0, 1e-14);
    EXPECT_NEAR(c.f / s, 0, 1e-14);
    EXPECT_NEAR(c.a, m.var_jx, 1e-9 * s);
    EXPECT_NEAR(c.b, m.var_jz - m.var_jx, 1e-9 * s);
    EXPECT_NEAR(c.g, m.mean_jz, 1e-9 * s);
}

TEST(Coefficients, BalancedSingleStructure) {
    const auto m = schwinger_moments(fig_state());
    const auto c = generic_coefficients(Scheme::SingleModeIntensity, m, {kPi / 2, kPi / 2});
    EXPECT_NEAR(c.a, m.var_jx + 0.25 * m.var_n, 1e-9 * c.a);
    EXPECT_NEAR(c.d, -m.cov_jz_n, 1e-9 * std::abs(c.d));
}

TEST(Coefficients, HomodyneMatchedLocalOscillator) {
    const auto s = fig_state();
    const auto c = generic_coefficients(field_moments(s), {tau_to_theta(0.55), tau_to_theta(0.45)},
                                        s.port1.amplitude_phase);
    const double sc = std::max({std::abs(c.a), std::abs(c.b), std::abs(c.d), std::abs(c.f)});
    EXPECT_NEAR(c.c / sc, 0, 1e-14);
    EXPECT_NEAR(c.e / sc, 0, 1e-14);
    EXPECT_NEAR(c.g / sc, 0, 1e-14);
}

TEST(Coefficients, EquivalentToDirectFormulas) {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> ang(0.05, kPi - 0.05), ph(0, 2 * kPi);
    int checked = 0;
    for (int i = 0; i < 200; ++i) {
        auto s = mzi::testing::random_state(rng);
        const auto m = schwinger_moments(s);
        const auto fm = field_moments(s);
        const BsAngles b{ang(rng), ang(rng)};
        const double pl = ph(rng);
        const auto cd = generic_coefficients(Scheme::DifferenceIntensity, m, b);
        const auto cs = generic_coefficients(Scheme::SingleModeIntensity, m, b);
        const auto ch = generic_coefficients(fm, b, pl);
        for (int j = 0; j < 20; ++j) {
            const double phi = ph(rng);
            try {
                EXPECT_TRUE(close_rel(sensitivity_from_coefficients(cd, phi),
                                      sensitivity_difference(m, b, phi).delta_phi, 1e-10, 0));
                EXPECT_TRUE(close_rel(sensitivity_from_coefficients(cs, phi),
                                      sensitivity_single(m, b, phi).delta_phi, 1e-10, 0));
                EXPECT_TRUE(close_rel(sensitivity_from_coefficients(ch, phi),
                                      sensitivity_homodyne(fm, b, phi, pl).delta_phi, 1e-10, 0));
                ++checked;
            } catch (const ZeroDerivative&) {
            }
        }
    }
    EXPECT_GT(checked, 1000);
}

TEST(Periodicity, IntensitySchemes) {
    const auto m = schwinger_moments(apply_pmc({ModeSpec::squeezed_coherent(1.4, 0, 0.6, 0),
                                                ModeSpec::squeezed_coherent(2.2, 0, 1.2, 0)}, PmcId::PMC3));
    const BsAngles b{1.0, 2.0};
    for (double phi : {0.3, 1.7, 4.0}) {
        EXPECT_TRUE(close_rel(sensitivity_difference(m, b, phi).delta_phi,
                              sensitivity_difference(m, b, phi + 2 * kPi).delta_phi, 1e-12, 0));
        EXPECT_TRUE(close_rel(sensitivity_single(m, b, phi).delta_phi,
                              sensitivity_single(m, b, phi + 2 * kPi).delta_phi, 1e-12, 0));
    }
}
