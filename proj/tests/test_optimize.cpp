#include <gtest/gtest.h>

#include <random>

#include "mzi/optimize.hpp"
#include "opt_checks.hpp"
#include "test_util.hpp"

using namespace mzi;
using mzi::testing::Objective;

namespace {

InputState coh_sqz() {
    return apply_pmc({ModeSpec::squeezed_vacuum(1.2), ModeSpec::coherent(100.0)}, PmcId::CohSqzVac);
}

InputState dual(double a, double b, PmcId pmc) {
    return apply_pmc({ModeSpec::squeezed_coherent(b, 0, 1.2, 0), ModeSpec::squeezed_coherent(a, 0, 0.6, 0)}, pmc);
}

InputState random_gaussian(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> amp(0.3, 2.0), sq(0.05, 0.8), ph(-3.0, 3.0);
    return {ModeSpec::squeezed_coherent(amp(rng), ph(rng), sq(rng), ph(rng)),
            ModeSpec::squeezed_coherent(amp(rng), ph(rng), sq(rng), ph(rng))};
}

double fock_tau(double a, int n) { return 0.5 + a * a / (2 * n * (1 + 2 * a * a)); }

}  // namespace

TEST(Quartic, KnownRoots) {
    // (t + 4)(t + 2)(t - 1)(t - 3)
    const auto r = real_poly_roots({24, -14, -13, 2, 1});
    ASSERT_EQ(r.size(), 4u);
    const double expect[] = {-4, -2, 1, 3};
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(r[i], expect[i], 1e-13);
    // t^4 + 1 has no real root
    EXPECT_TRUE(real_poly_roots({1, 0, 0, 0, 1}).empty());
}

TEST(Quartic, RandomResiduals) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ex(-6, 6);
    int roots = 0;
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> c(5);
        for (double& x : c) x = nd(rng) * std::pow(10.0, ex(rng));
        double worst = 0;
        const auto r = real_poly_roots(c, &worst);
        for (double t : r) EXPECT_LT(poly_residual(c, t), 1e-9) << i;
        EXPECT_LT(worst, 1e-9);
        roots += static_cast<int>(r.size());
    }
    EXPECT_GT(roots, 1000);
}

TEST(Quartic, LowerDegreeAfterTrim) {
    const auto r = real_poly_roots({-2, 1, 0, 0, 0});
    ASSERT_EQ(r.size(), 1u);
    EXPECT_DOUBLE_EQ(r[0], 2);
    EXPECT_TRUE(real_poly_roots({3, 0, 0, 0, 0}).empty());
}

TEST(WorkingPoint, SpecialCaseQuarterWave) {
    SensitivityCoefficients c;
    c.a = 2;
    c.b = 1;
    c.g = 3;
    EXPECT_NEAR(optimal_working_point(c).chosen, kPi / 2, 1e-15);
}

TEST(WorkingPoint, SpecialCaseIntegerPi) {
    SensitivityCoefficients c;
    c.a = 1;
    c.b = 0.5;
    c.d = 0.2;
    c.f = 1;
    // A + B - D < A + B + D, so the dark side wins
    EXPECT_NEAR(optimal_working_point(c).chosen, kPi, 1e-15);
}

TEST(WorkingPoint, ZeroDerivativeEverywhere) {
    SensitivityCoefficients c;
    c.a = 1;
    EXPECT_THROW(optimal_working_point(c), ZeroDerivativeEverywhere);
}

TEST(WorkingPoint, ArctanCaseMatchesQuartic) {
    SensitivityCoefficients c;
    c.a = 2;
    c.b = 0.7;
    c.f = 0.4;
    c.g = 1.3;
    const auto a = optimal_working_point(c), b = optimal_working_point(c, true);
    EXPECT_NEAR(a.chosen, b.chosen, 1e-12);
}

TEST(WorkingPoint, SingleModeBalancedClosedForm) {
    const auto m = schwinger_moments(coh_sqz());
    const auto c = generic_coefficients(Scheme::SingleModeIntensity, m, {kPi / 2, kPi / 2});
    const double expect = 2 * std::atan(std::sqrt(std::sqrt(2.0) * 100 / std::sinh(2.4)));
    const auto closed = optimal_working_point(c), quartic = optimal_working_point(c, true);
    EXPECT_NEAR(closed.chosen, expect, 1e-10);
    EXPECT_NEAR(quartic.chosen, expect, 1e-10);
    EXPECT_NEAR(closed.chosen / kPi, 0.876, 5e-4);
    EXPECT_LT(quartic.residual, 1e-9);
}

TEST(WorkingPoint, HomodynePmcIsPi) {
    const auto s = coh_sqz();
    const auto c = generic_coefficients(field_moments(s), {tau_to_theta(0.55), tau_to_theta(0.45)},
                                        s.port1.amplitude_phase);
    EXPECT_NEAR(optimal_working_point(c).chosen, kPi, 1e-12);
}

TEST(WorkingPoint, QuarticRootsAreStationary) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 200; ++i) {
        SensitivityCoefficients c;
        c.a = 5 + u(rng);
        c.b = u(rng);
        c.c = u(rng);
        c.d = u(rng);
        c.e = u(rng);
        c.f = u(rng);
        c.g = u(rng);
        const auto sol = optimal_working_point(c, true);
        for (double t : sol.real_roots) {
            const double phi = 2 * std::atan(t), h = 1e-6;
            try {
                const double v = sensitivity_from_coefficients(c, phi);
                const double g = (sensitivity_from_coefficients(c, phi + h) -
                                  sensitivity_from_coefficients(c, phi - h)) / (2 * h);
                EXPECT_LT(std::abs(g) / v, 1e-5) << i;
            } catch (const ZeroDerivative&) {
            }
        }
        const double best = sensitivity_from_coefficients(c, sol.chosen);
        for (int k = 0; k < 100; ++k) {
            try {
                EXPECT_GE(sensitivity_from_coefficients(c, 2 * kPi * k / 100), best * (1 - 1e-12));
            } catch (const ZeroDerivative&) {
            }
        }
    }
}

TEST(Bs1, CoherentFockClosedForm) {
    for (auto [a, n] : {std::pair{10.0, 1}, {10.0, 2}, {100.0, 1}}) {
        const InputState s{ModeSpec::fock(n), ModeSpec::coherent(a)};
        const double tau = theta_to_tau(optimize_bs1(s, Reference::External));
        EXPECT_NEAR(tau, fock_tau(a, n), 1e-8) << a << " " << n;
    }
    const double tau = theta_to_tau(optimize_bs1(InputState{ModeSpec::fock(1), ModeSpec::coherent(1000.0)},
                                                 Reference::External));
    EXPECT_NEAR(tau, 0.75, 1e-6);
}

TEST(Bs1, CoherentSqueezedVacuum) {
    EXPECT_NEAR(theta_to_tau(optimize_bs1(coh_sqz(), Reference::None)), 0.5, 1e-10);
    EXPECT_NEAR(theta_to_tau(optimize_bs1(coh_sqz(), Reference::External)), 0.55, 0.01);
}

TEST(Bs1, FlatObjective) {
    EXPECT_THROW(optimize_bs1(InputState{}, Reference::None), FlatObjective);
}

TEST(Bs2, DifferenceBalancedForPmc) {
    const auto m = schwinger_moments(coh_sqz());
    const auto r = optimize_bs2_difference(m, kPi / 2, kPi / 2);
    EXPECT_NEAR(r.theta_prime, kPi / 2, 1e-12);
    EXPECT_FALSE(r.degenerate);
}

TEST(Bs2, SingleBalancedFactorization) {
    const auto m = schwinger_moments(coh_sqz());
    const double phi = 2 * std::atan(std::sqrt(std::sqrt(2.0) * 100 / std::sinh(2.4)));
    const auto r = optimize_bs2_single(m, kPi / 2, phi);
    EXPECT_NEAR(r.chosen, kPi / 2, 1e-12);
    EXPECT_FALSE(r.fallback);
    EXPECT_LT(r.residual, 1e-9);
}

TEST(Bs2, HomodyneCoherentSqueezedVacuum) {
    const auto s = coh_sqz();
    const double th = optimize_bs1(s, Reference::External);
    const auto r = optimize_bs2_homodyne(field_moments(s), th, kPi, s.port1.amplitude_phase);
    EXPECT_NEAR(theta_to_tau(r.theta_prime), 0.45, 0.01);
}

TEST(Bs2, HomodyneCoherentFock) {
    const InputState s{ModeSpec::fock(1), ModeSpec::coherent(1000.0)};
    const double th = tau_to_theta(fock_tau(1000, 1));
    // With the Fock state in port 0 the working point lands on phi = 0 here.
    const auto r = optimize_bs2_homodyne(field_moments(s), th, 0.0, 0.0);
    EXPECT_NEAR(theta_to_tau(r.theta_prime), 0.107, 0.005);
    const auto j = joint_optimize(s, Scheme::BalancedHomodyne, Reference::External);
    EXPECT_NEAR(j.phi_opt, 0.0, 1e-9);
    EXPECT_NEAR(theta_to_tau(j.theta_prime_opt), 0.107, 0.005);
}

TEST(Joint, HomodyneCoherentSqueezedVacuum) {
    const auto r = joint_optimize(coh_sqz(), Scheme::BalancedHomodyne, Reference::External);
    EXPECT_NEAR(theta_to_tau(r.theta_opt), 0.55, 0.01);
    EXPECT_NEAR(theta_to_tau(r.theta_prime_opt), 0.45, 0.01);
    EXPECT_NEAR(r.phi_opt, kPi, 1e-6);
    EXPECT_TRUE(r.hessian_verified);
    EXPECT_FALSE(r.grid_fallback);
}

TEST(Joint, HomodyneNeedsReference) {
    EXPECT_THROW(joint_optimize(coh_sqz(), Scheme::BalancedHomodyne, Reference::None), WrongConvention);
}

TEST(Joint, DualSqueezedPmc3Homodyne) {
    const auto r = joint_optimize(dual(1000, 50, PmcId::PMC3), Scheme::BalancedHomodyne, Reference::External);
    EXPECT_NEAR(r.delta_phi_opt / 2.437e-4, 1, 5e-3);
    EXPECT_NEAR(theta_to_tau(r.theta_prime_opt), 0.278, 0.005);
}

TEST(Joint, DualSqueezedPmc1BalancedFirstSplitter) {
    JointOptions o;
    o.theta = kPi / 2;
    const auto r = joint_optimize(dual(1000, 50, PmcId::PMC1), Scheme::BalancedHomodyne, Reference::External, o);
    EXPECT_NEAR(r.delta_phi_opt / 2.64e-4, 1, 1e-2);
}

TEST(Joint, FixedSplittersOnlyMoveWorkingPoint) {
    JointOptions o;
    o.theta = kPi / 2;
    o.theta_prime = kPi / 2;
    const auto r = joint_optimize(coh_sqz(), Scheme::SingleModeIntensity, Reference::None, o);
    EXPECT_DOUBLE_EQ(r.theta_prime_opt, kPi / 2);
    EXPECT_NEAR(r.phi_opt / kPi, 0.876, 5e-4);
    EXPECT_EQ(r.iterations, 0);
}

TEST(Joint, StationaryAndMinimalOnRandomStates) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> tp(0, kPi), ph(0, 2 * kPi);
    int checked = 0;
    for (Scheme sc : {Scheme::DifferenceIntensity, Scheme::SingleModeIntensity, Scheme::BalancedHomodyne}) {
        for (int i = 0; i < 8; ++i) {
            const auto s = random_gaussian(rng);
            const Reference ref = sc == Scheme::BalancedHomodyne ? Reference::External : Reference::None;
            OptimizationReport r;
            try {
                r = joint_optimize(s, sc, ref);
            } catch (const Error&) {
                continue;
            }
            if (r.degenerate) continue;
            const Objective f(sc, s, r.theta_opt, r.phi_local_opt);
            EXPECT_LT(mzi::testing::relative_gradient(f, r.theta_prime_opt, r.phi_opt), 1e-6)
                << to_string(sc) << " " << i;
            for (int k = 0; k < 10000; ++k)
                ASSERT_GE(f(tp(rng), ph(rng)), r.delta_phi_opt * (1 - 1e-12)) << to_string(sc) << " " << i;
            ++checked;
        }
    }
    EXPECT_GE(checked, 18);
}

TEST(Joint, DarkFringeLimitOfSqueezedVacuum) {
    // sqz-vac alone: both variance and signal vanish at the dark fringe
    const InputState s{ModeSpec::vacuum(), ModeSpec::squeezed_vacuum(0.46, -2.0)};
    const auto r = joint_optimize(s, Scheme::SingleModeIntensity, Reference::None);
    const auto m = schwinger_moments(s);
    const double near = sensitivity_single(m, {r.theta_opt, r.theta_prime_opt}, r.phi_opt + 1e-3).delta_phi;
    EXPECT_TRUE(r.degenerate);
    EXPECT_NEAR(r.delta_phi_opt / near, 1, 1e-5);
}

TEST(Joint, AgreesWithBlindSearch) {
    std::mt19937_64 rng(2024);
    for (Scheme sc : {Scheme::DifferenceIntensity, Scheme::SingleModeIntensity, Scheme::BalancedHomodyne}) {
        int checked = 0;
        for (int i = 0; i < 10 && checked < 3; ++i) {
            const auto s = random_gaussian(rng);
            const Reference ref = sc == Scheme::BalancedHomodyne ? Reference::External : Reference::None;
            const auto r = joint_optimize(s, sc, ref);
            if (r.degenerate) continue;
            const auto g = mzi::testing::compare_blind(Objective(sc, s, r.theta_opt, r.phi_local_opt),
                                                       r.theta_prime_opt, r.phi_opt);
            EXPECT_LT(g.location_gap, 1e-6) << to_string(sc) << " " << i;
            EXPECT_LT(g.value_gap, 1e-9) << to_string(sc) << " " << i;
            ++checked;
        }
        EXPECT_EQ(checked, 3) << to_string(sc);
    }
}
