// gdprox/presets.hpp
//
// Named distribution/objective pairs used by the harness and the tests.

#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "gdprox/constructions.hpp"
#include "gdprox/distributions.hpp"
#include "gdprox/generalization.hpp"
#include "gdprox/objectives.hpp"

namespace gdprox {

struct PresetParams {
    std::size_t n = 1;      // sample size the instance is built for (appc2, g4-*)
    double eta = 0.1;
    std::size_t T = 1;
    double L = 1.0;
};

struct Preset {
    std::string name;
    FiniteDistribution dist;
    ConvexObjective objective;
    double B = 1.0;                  // radius of the comparator ball
    std::optional<ClipSpec> clip;    // set for GLM presets with bounded labels
    std::optional<double> F_star;    // known min over ||w|| <= B, when available
};

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"hinge",  "single-atom", "rademacher",     "appc1",
                                                "appc2",  "g4-drift",    "g4-scaled-drift"};
    return names;
}

// Three orthonormal directions in R^3, each carrying a +1 and a -1 label.
// On direction k with mass m_k and positive fraction p_k > 1/2 the hinge risk
// is minimized at <w, u_k> = 1, so w* = u_1 + u_2 + u_3 (norm sqrt 3) and
// F* = sum_k m_k * 2 (1 - p_k) = 0.375.
inline Preset hinge_preset() {
    const std::vector<WeightVector> u{
        (WeightVector(3) << 2.0, 1.0, 2.0).finished() / 3.0,
        (WeightVector(3) << 1.0, 2.0, -2.0).finished() / 3.0,
        (WeightVector(3) << 2.0, -2.0, -1.0).finished() / 3.0,
    };
    const double mass[3] = {0.4, 0.35, 0.25};
    const double pos[3] = {0.8, 0.8, 0.85};
    std::vector<Instance> atoms;
    std::vector<double> probs;
    for (int k = 0; k < 3; ++k) {
        atoms.push_back({u[k], 1.0});
        probs.push_back(mass[k] * pos[k]);
        atoms.push_back({u[k], -1.0});
        probs.push_back(mass[k] * (1.0 - pos[k]));
    }
    return {"hinge", FiniteDistribution(atoms, probs), GlmObjective{hinge_loss()}, 2.0, ClipSpec{1.0, 2.0}, 0.375};
}

// Absolute loss with label 0: GD never leaves w = 0, which is optimal.
inline Preset single_atom_preset(double L = 1.0) {
    const WeightVector phi = (WeightVector(2) << 0.6, 0.8).finished();
    return {"single-atom", FiniteDistribution({Instance{phi, 0.0}}, {1.0}), GlmObjective{absolute_loss(L)}, 1.0,
            ClipSpec{1.0, 2.0 * L}, 0.0};
}

inline Preset make_preset(const std::string& name, const PresetParams& p) {
    if (name == "hinge") return hinge_preset();
    if (name == "single-atom") return single_atom_preset(p.L);
    if (name == "rademacher" || name == "appc1") {
        LinearConstruction c{p.L, 1};
        return {name, c.distribution(), c.objective(), 1.0, std::nullopt, -p.L};
    }
    if (name == "appc2") {
        const auto c = NonsmoothConstruction::make(p.L, p.eta, p.T, p.n, 2 * p.T);
        return {name, c.distribution(), c.objective(), 1.0, std::nullopt, std::nullopt};
    }
    if (name == "g4-drift" || name == "g4-scaled-drift") {
        const GnVariant v = name == "g4-drift" ? GnVariant::drift : GnVariant::scaled_drift;
        return {name, gn_distribution(), gn_objective(v, p.L, p.n), 1.0, std::nullopt, -gn_slope(v, p.L, p.n)};
    }
    throw ConfigError("unknown preset: " + name);
}

} // namespace gdprox
