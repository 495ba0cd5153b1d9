#include <gtest/gtest.h>

#include "property_checks.hpp"

using namespace gdprox;

constexpr std::size_t kTrials = 10000;

TEST(Properties, ConvexityMonotonicity) { EXPECT_EQ(props::convexity_monotonicity(kTrials, 1).violations, 0u); }
TEST(Properties, Lipschitz) { EXPECT_EQ(props::lipschitz(kTrials, 1).violations, 0u); }
TEST(Properties, StepSize) { EXPECT_EQ(props::step_size(kTrials, 1).violations, 0u); }
TEST(Properties, Clip) { EXPECT_EQ(props::clip_props(kTrials, 1).violations, 0u); }
TEST(Properties, ShiftInvariance) { EXPECT_EQ(props::shift_invariance(kTrials, 1).violations, 0u); }
TEST(Properties, ClosedFormVsEngine) { EXPECT_EQ(props::closed_form_vs_engine(kTrials, 1).violations, 0u); }

// The suites must be able to fail: a deliberately wrong Lipschitz constant is caught.
TEST(Properties, DetectsUnderstatedLipschitzConstant) {
    Rng rng = make_rng(1, 0);
    CustomObjective c;
    c.dimension = 1;
    c.lipschitz = 0.5;
    c.value = [](const WeightVector& w, const Instance&) { return std::abs(w[0]); };
    c.subgrad = [](const WeightVector& w, const Instance&) {
        return (WeightVector(1) << (w[0] >= 0 ? 1.0 : -1.0)).finished();
    };
    const ConvexObjective obj(c);
    std::size_t caught = 0;
    for (int k = 0; k < 100; ++k) {
        const WeightVector a = props::random_vector(rng, 1, 3.0), b = props::random_vector(rng, 1, 3.0);
        if (std::abs(instance_value(obj, a, {}) - instance_value(obj, b, {})) > obj.lipschitz() * (a - b).norm()) ++caught;
    }
    EXPECT_GT(caught, 0u);
}
