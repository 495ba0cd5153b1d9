#include <gtest/gtest.h>

#include <cmath>

#include "gdprox/constructions.hpp"

using namespace gdprox;

namespace {

// Enumerate every pair of sign vectors.
double brute_force_gap_probability(std::size_t n) {
    const std::size_t total = std::size_t{1} << (2 * n);
    std::size_t hits = 0;
    for (std::size_t mask = 0; mask < total; ++mask) {
        double sa = 0, sb = 0;
        for (std::size_t i = 0; i < n; ++i) {
            sa += (mask >> i & 1) ? 1.0 : -1.0;
            sb += (mask >> (n + i) & 1) ? 1.0 : -1.0;
        }
        if (std::abs(sa - sb) / static_cast<double>(n) >= 1.0 / std::sqrt(static_cast<double>(n)) - 1e-12) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(total);
}

} // namespace

TEST(Linear, GapProbabilityAtFourMatchesEnumeration) {
    const double brute = brute_force_gap_probability(4);
    EXPECT_DOUBLE_EQ(brute, 186.0 / 256.0);
    EXPECT_DOUBLE_EQ(gap_probability_exact(4), brute);
    EXPECT_DOUBLE_EQ(gap_probability_exact(1), 0.5);
}

TEST(Linear, ExactAgreesWithEnumerationAndBinomial) {
    for (std::size_t n = 1; n <= 8; ++n) EXPECT_DOUBLE_EQ(gap_probability_exact(n), brute_force_gap_probability(n)) << n;
    for (std::size_t n = 1; n <= 40; ++n) {
        EXPECT_NEAR(gap_probability_binomial(n), gap_probability_exact(n), 1e-12) << n;
        EXPECT_GE(gap_probability_exact(n), 0.1) << n;
    }
    EXPECT_THROW(gap_probability_exact(41), ConfigError);
}

TEST(Linear, MonteCarloAgreesWithBinomial) {
    for (std::size_t n : {4u, 100u, 1000u, 10000u}) {
        const auto mc = gap_probability_mc(n, 10000, 17);
        const double exact = gap_probability_binomial(n);
        EXPECT_NEAR(mc.estimate, exact, 3.0 * mc.se) << n;
        EXPECT_GE(mc.estimate, 0.1 - 3.0 * mc.se);
    }
    EXPECT_THROW(gap_probability_mc(10, 100, 1), ConfigError);
}

TEST(Linear, CountHeadsHandlesPartialWords) {
    Rng a = make_rng(1, 0);
    for (std::size_t n : {1u, 63u, 64u, 65u, 200u}) {
        const std::size_t h = count_heads(a, n);
        EXPECT_LE(h, n);
    }
}

TEST(Linear, EngineMatchesClosedForm) {
    const LinearConstruction lin{2.5, 3};
    const SampleSet s = sample(lin.distribution(), 11, 4, 0);
    double mean = 0;
    for (const auto& z : s.instances) mean += z.label / 11.0;
    GdConfig cfg;
    cfg.eta = 0.2;
    cfg.T = 40;
    const Trajectory t = gd_run_empirical(lin.objective(), s, cfg);
    for (std::size_t k = 0; k <= cfg.T; ++k) {
        EXPECT_NEAR(t[k][0], linear_closed_form(2.5, 0.2, mean, k), 1e-12);
        EXPECT_EQ(t[k][1], 0.0);
    }
}

TEST(Nonsmooth, ParameterInvariants) {
    const auto c = NonsmoothConstruction::make(1.5, 0.05, 64, 32, 128);
    EXPECT_NEAR(c.gamma() * std::sqrt(128.0 * 64.0), 0.25, 1e-15);
    const auto eps = c.epsilons();
    for (std::size_t i = 1; i < eps.size(); ++i) EXPECT_LT(eps[i - 1], eps[i]);
    EXPECT_GT(eps.front(), 0.0);
    EXPECT_LT(eps.back(), c.epsilon_cap());
    EXPECT_THROW(NonsmoothConstruction::make(1.0, 0.1, 10, 5, 10), ConfigError);
}

TEST(Nonsmooth, EngineMatchesClosedFormAndNormGrows) {
    const auto c = NonsmoothConstruction::make(1.0, 0.1, 64, 32, 128);
    std::size_t met = 0;
    for (std::uint64_t r = 0; r < 50; ++r) {
        const SampleSet s = sample(c.distribution(), 32, 9, r);
        const auto chk = nonsmooth_trajectory_check(c, s, 64);
        if (!chk.event_met) continue;
        ++met;
        EXPECT_TRUE(chk.matches) << chk.max_error;
        EXPECT_TRUE(chk.lower_bound_holds) << chk.min_norm_ratio;
    }
    EXPECT_GT(met, 20u);
}

TEST(Nonsmooth, AllZeroSampleStaysAtOrigin) {
    const auto c = NonsmoothConstruction::make(1.0, 0.1, 16, 8, 32);
    const SampleSet s = sample_from(std::vector<Instance>(8, Instance{WeightVector{}, 0.0}));
    GdConfig cfg;
    cfg.eta = 0.1;
    cfg.T = 16;
    const Trajectory t = gd_run_empirical(c.objective(), s, cfg);
    for (const auto& w : t.iterates) EXPECT_EQ(w.norm(), 0.0);
    EXPECT_FALSE(nonsmooth_trajectory_check(c, s, 16).event_met);
}

TEST(Nonsmooth, EventProbabilities) {
    for (std::size_t n = 1; n <= 2000; ++n) {
        const auto p = nonsmooth_event_probability(n);
        EXPECT_GE(p.p_allzero, std::exp(-1.0));
        EXPECT_LE(p.p_allzero, 0.5 + 1e-15);
        EXPECT_GE(p.p_joint_exact, 0.2325) << n;
        EXPECT_GE(p.p_joint_exact, p.p_joint_lb);
    }
    const auto p32 = nonsmooth_event_probability(32);
    EXPECT_NEAR(p32.p_allzero, std::pow(32.0 / 33.0, 32.0), 1e-15);
    EXPECT_NEAR(p32.p_allzero, 0.3736, 1e-4);
    EXPECT_NEAR(p32.p_joint_lb, 0.5 * (1.0 - std::exp(-0.5)), 1e-15);
}

TEST(Gn, ClosedFormMatchesEngine) {
    Rng rng = make_rng(3, 0);
    for (int trial = 0; trial < 50; ++trial) {
        const GnVariant v = trial % 2 ? GnVariant::drift : GnVariant::scaled_drift;
        const double L = 0.5 + 2.0 * uniform01(rng);
        const std::size_t n = 10 + static_cast<std::size_t>(1000 * uniform01(rng));
        const double eta = 0.001 + 0.1 * uniform01(rng);
        const std::size_t T = 1 + static_cast<std::size_t>(200 * uniform01(rng));
        const GnValue a = gn_evaluate(v, L, n, eta, T), b = gn_evaluate_engine(v, L, n, eta, T);
        EXPECT_NEAR(a.wbar, b.wbar, 1e-10);
        EXPECT_NEAR(a.erm_gap, b.erm_gap, 1e-10);
        EXPECT_NEAR(a.norm_term, b.norm_term, 1e-10);
    }
}

TEST(Gn, GridOptimumNearQuarterPowerAndRefinementMonotone) {
    const auto coarse = gn_grid_optimize(1.0, 1000, log_grid(1e-4, 10.0, 101), pow2_grid(20));
    std::vector<double> fine = log_grid(1e-4, 10.0, 101);
    for (double x : log_grid(1e-4, 10.0, 1001)) fine.push_back(x);
    const auto refined = gn_grid_optimize(1.0, 1000, fine, pow2_grid(20));
    EXPECT_LE(refined.G, coarse.G);
    for (std::size_t n : {100u, 1000u, 10000u, 100000u}) {
        const auto g = gn_grid_optimize(1.0, n, log_grid(1e-5, 10.0, 4001), pow2_grid(22));
        EXPECT_NEAR(g.G, 0.5 / std::pow(static_cast<double>(n), 0.25), 0.01 / std::pow(static_cast<double>(n), 0.25)) << n;
    }
}
