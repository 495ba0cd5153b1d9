// gdprox/distributions.hpp
//
// Finite-support data distributions, seeded i.i.d. sampling, and exact
// population risk / subgradient by atom summation.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "gdprox/objectives.hpp"
#include "gdprox/types.hpp"

namespace gdprox {

// Per-replicate stream seed. splitmix64 finalizer applied to
// seed + golden * (replicate + 1); serial and parallel runs derive the same
// stream for the same (seed, replicate).
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t replicate) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (replicate + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t replicate) { return Rng(stream_seed(seed, replicate)); }

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// +1 / -1 with probability 1/2 each, from one bit.
inline double rademacher_sign(Rng& rng) { return (rng() >> 63) ? 1.0 : -1.0; }

class FiniteDistribution {
public:
    FiniteDistribution(std::vector<Instance> atoms, std::vector<double> probs)
        : atoms_(std::move(atoms)), probs_(std::move(probs)) {
        if (atoms_.empty()) throw ConfigError("distribution needs at least one atom");
        if (atoms_.size() != probs_.size()) throw ConfigError("distribution: atoms/probs length differ");
        double total = 0.0;
        for (double p : probs_) {
            if (!(p >= 0.0)) throw ConfigError("distribution: negative probability");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-12) throw ConfigError("distribution: probabilities must sum to 1");
        for (const auto& a : atoms_)
            if (a.features.size() != atoms_.front().features.size())
                throw ConfigError("distribution: atoms have inconsistent dimension");
        cumulative_.resize(probs_.size());
        std::partial_sum(probs_.begin(), probs_.end(), cumulative_.begin());
        cumulative_.back() = 1.0;
    }

    const std::vector<Instance>& atoms() const { return atoms_; }
    const std::vector<double>& probs() const { return probs_; }
    std::size_t size() const { return atoms_.size(); }
    std::size_t feature_dim() const { return dim(atoms_.front().features); }

    std::size_t draw_index(Rng& rng) const {
        const double u = uniform01(rng);
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), atoms_.size() - 1);
    }

private:
    std::vector<Instance> atoms_;
    std::vector<double> probs_;
    std::vector<double> cumulative_;
};

struct SampleSet {
    std::vector<Instance> instances;
    std::vector<std::size_t> atom_index;   // empty when not drawn from a FiniteDistribution
    std::uint64_t seed = 0;
    std::uint64_t replicate = 0;

    std::size_t size() const { return instances.size(); }
};

inline SampleSet sample(const FiniteDistribution& dist, std::size_t n, std::uint64_t seed, std::uint64_t replicate) {
    if (n == 0) throw ConfigError("sample size must be >= 1");
    Rng rng = make_rng(seed, replicate);
    SampleSet s;
    s.seed = seed;
    s.replicate = replicate;
    s.instances.reserve(n);
    s.atom_index.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = dist.draw_index(rng);
        s.atom_index.push_back(j);
        s.instances.push_back(dist.atoms()[j]);
    }
    return s;
}

// A sample built from explicit instances (uniform empirical weights).
inline SampleSet sample_from(std::vector<Instance> instances) {
    if (instances.empty()) throw ConfigError("sample size must be >= 1");
    SampleSet s;
    s.instances = std::move(instances);
    return s;
}

// Weighted atoms: both the empirical measure of a sample and the law of a
// finite distribution. GD on either is GD on sum_j weight_j f(w; atom_j).
struct DiscreteMeasure {
    std::vector<Instance> atoms;
    std::vector<double> weights;

    std::size_t size() const { return atoms.size(); }
};

inline DiscreteMeasure measure_of(const FiniteDistribution& dist) { return {dist.atoms(), dist.probs()}; }

// Samples drawn from a distribution are compressed to (atom, count / n);
// explicit samples get weight 1/n per instance. Both give mean subgradients.
inline DiscreteMeasure measure_of(const SampleSet& s) {
    DiscreteMeasure m;
    const double inv_n = 1.0 / static_cast<double>(s.size());
    if (s.atom_index.size() == s.size()) {
        std::map<std::size_t, std::pair<std::size_t, std::size_t>> counts;   // atom -> (first position, count)
        for (std::size_t i = 0; i < s.size(); ++i) {
            auto [it, fresh] = counts.try_emplace(s.atom_index[i], i, 0);
            ++it->second.second;
        }
        for (const auto& [atom, entry] : counts) {
            m.atoms.push_back(s.instances[entry.first]);
            m.weights.push_back(static_cast<double>(entry.second) * inv_n);
        }
    } else {
        m.atoms = s.instances;
        m.weights.assign(s.size(), inv_n);
    }
    return m;
}

inline double risk(const DiscreteMeasure& m, const ConvexObjective& obj, const WeightVector& w) {
    double total = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j) total += m.weights[j] * instance_value(obj, w, m.atoms[j]);
    return total;
}

// out <- sum_j weight_j g(w; atom_j); `out` must already have the right size.
inline void subgrad_into(const DiscreteMeasure& m, const ConvexObjective& obj, const WeightVector& w,
                         WeightVector& out) {
    out.setZero();
    for (std::size_t j = 0; j < m.size(); ++j) accumulate_subgrad(obj, w, m.atoms[j], m.weights[j], out);
}

inline WeightVector subgrad(const DiscreteMeasure& m, const ConvexObjective& obj, const WeightVector& w) {
    for (const auto& a : m.atoms) detail::check_dims(obj, w, a);
    WeightVector g = WeightVector::Zero(w.size());
    subgrad_into(m, obj, w, g);
    return g;
}

inline double empirical_risk(const SampleSet& s, const ConvexObjective& obj, const WeightVector& w) {
    return risk(measure_of(s), obj, w);
}

inline double population_risk(const FiniteDistribution& dist, const ConvexObjective& obj, const WeightVector& w) {
    return risk(measure_of(dist), obj, w);
}

inline WeightVector population_subgrad(const FiniteDistribution& dist, const ConvexObjective& obj,
                                       const WeightVector& w) {
    return subgrad(measure_of(dist), obj, w);
}

// Sample whose empirical measure equals `dist` exactly; every probs[j] * n
// must be an integer.
inline SampleSet proportional_sample(const FiniteDistribution& dist, std::size_t n) {
    SampleSet s;
    for (std::size_t j = 0; j < dist.size(); ++j) {
        const double count = dist.probs()[j] * static_cast<double>(n);
        const double rounded = std::round(count);
        if (std::abs(count - rounded) > 1e-9) throw ConfigError("proportional_sample: probs * n not integral");
        for (std::size_t k = 0; k < static_cast<std::size_t>(rounded); ++k) {
            s.instances.push_back(dist.atoms()[j]);
            s.atom_index.push_back(j);
        }
    }
    return s;
}

} // namespace gdprox
