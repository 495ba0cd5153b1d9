#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "gdprox/distributions.hpp"
#include "gdprox/presets.hpp"

using namespace gdprox;

TEST(Seeding, StreamsAreDeterministicAndDistinct) {
    EXPECT_EQ(stream_seed(1, 0), stream_seed(1, 0));
    EXPECT_NE(stream_seed(1, 0), stream_seed(1, 1));
    EXPECT_NE(stream_seed(1, 0), stream_seed(2, 0));
    Rng a = make_rng(5, 3), b = make_rng(5, 3);
    for (int i = 0; i < 10; ++i) EXPECT_EQ(a(), b());
}

TEST(Seeding, Uniform01InRange) {
    Rng rng = make_rng(9, 0);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = uniform01(rng);
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    EXPECT_LT(lo, 1e-3);
    EXPECT_GT(hi, 1.0 - 1e-3);
}

TEST(FiniteDistribution, Validation) {
    const Instance a{unit(2, 0), 1.0}, b{unit(2, 1), -1.0};
    EXPECT_THROW(FiniteDistribution({a, b}, {0.5, 0.6}), ConfigError);
    EXPECT_THROW(FiniteDistribution({a, b}, {1.2, -0.2}), ConfigError);
    EXPECT_THROW(FiniteDistribution({a}, {0.5, 0.5}), ConfigError);
    EXPECT_THROW(FiniteDistribution({a, Instance{unit(3, 0), 1.0}}, {0.5, 0.5}), ConfigError);
    EXPECT_THROW(FiniteDistribution({}, {}), ConfigError);
    EXPECT_NO_THROW(FiniteDistribution({a, b}, {0.25, 0.75}));
}

TEST(Sampling, FrequenciesMatchProbabilities) {
    const Preset p = hinge_preset();
    const std::size_t n = 200000;
    const SampleSet s = sample(p.dist, n, 11, 0);
    std::vector<double> freq(p.dist.size(), 0.0);
    for (auto j : s.atom_index) freq[j] += 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < p.dist.size(); ++j) {
        const double pj = p.dist.probs()[j];
        EXPECT_NEAR(freq[j], pj, 4.0 * std::sqrt(pj * (1 - pj) / static_cast<double>(n)));
    }
}

TEST(Sampling, ReplicateDeterminism) {
    const Preset p = hinge_preset();
    const SampleSet a = sample(p.dist, 50, 3, 7), b = sample(p.dist, 50, 3, 7), c = sample(p.dist, 50, 3, 8);
    EXPECT_EQ(a.atom_index, b.atom_index);
    EXPECT_NE(a.atom_index, c.atom_index);
}

TEST(Measure, CompressedEmpiricalRiskEqualsPerInstanceMean) {
    const Preset p = hinge_preset();
    const SampleSet s = sample(p.dist, 37, 1, 0);
    const DiscreteMeasure m = measure_of(s);
    double wsum = 0.0;
    for (double w : m.weights) wsum += w;
    EXPECT_NEAR(wsum, 1.0, 1e-15);
    WeightVector w(3);
    w << 0.3, -0.7, 0.2;
    double direct = 0.0;
    WeightVector g = zeros(3);
    for (const auto& z : s.instances) {
        direct += instance_value(p.objective, w, z) / 37.0;
        g += instance_subgrad(p.objective, w, z) / 37.0;
    }
    EXPECT_NEAR(risk(m, p.objective, w), direct, 1e-14);
    EXPECT_LT((subgrad(m, p.objective, w) - g).norm(), 1e-14);
    // explicit samples take the uncompressed path
    const SampleSet e = sample_from(s.instances);
    EXPECT_NEAR(empirical_risk(e, p.objective, w), direct, 1e-14);
}

TEST(Measure, PopulationRiskIsProbabilityWeighted) {
    const Preset p = hinge_preset();
    const WeightVector w = zeros(3);
    EXPECT_DOUBLE_EQ(population_risk(p.dist, p.objective, w), 1.0);   // every hinge term is 1 at 0
}

TEST(ProportionalSample, ReproducesDistribution) {
    const FiniteDistribution d({Instance{unit(1, 0), 1.0}, Instance{unit(1, 0), -1.0}}, {0.25, 0.75});
    const SampleSet s = proportional_sample(d, 8);
    EXPECT_EQ(s.size(), 8u);
    const DiscreteMeasure m = measure_of(s);
    ASSERT_EQ(m.size(), 2u);
    EXPECT_DOUBLE_EQ(m.weights[0], 0.25);
    EXPECT_THROW(proportional_sample(d, 3), ConfigError);
}
