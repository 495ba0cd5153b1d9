// gdprox/constructions.hpp
//
// Explicit instances with closed-form GD trajectories:
//   * LinearConstruction     f(w; z) = L z <w, e_1>,  z = +-1 equiprobable.
//     Gaps between two samples grow like eta L t / sqrt(n).
//   * NonsmoothConstruction  f(w; z) = -(gamma L / 2) z <w, 1> + (L / 2) max_i {w_i - eps_i, 0},
//     z ~ Bernoulli(1 / (n + 1)). GD consumes one coordinate per step, so
//     the iterate norm grows like eta L sqrt(t).
//   * Drift instances        f(w) = L w and f(w) = L w / n^{1/4} in one
//     dimension, which witness G(n) ~ L / n^{1/4} for origin-centred balls.
//
// All trajectories use engine indexing: w_t is the iterate after t steps.

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "gdprox/distributions.hpp"
#include "gdprox/gd_engine.hpp"
#include "gdprox/objectives.hpp"
#include "gdprox/parallel.hpp"

namespace gdprox {

struct LinearConstruction {
    double L = 1.0;
    std::size_t d = 1;   // extra coordinates are zero padding

    FiniteDistribution distribution() const {
        if (d == 0) throw ConfigError("linear construction needs d >= 1");
        return FiniteDistribution({Instance{unit(d, 0), 1.0}, Instance{unit(d, 0), -1.0}}, {0.5, 0.5});
    }
    ConvexObjective objective() const { return GlmObjective{linear_loss(L)}; }
};

// First coordinate of w_t after t steps on a sample with mean label mean_z.
inline double linear_closed_form(double L, double eta, double mean_z, std::size_t t) {
    return -eta * L * static_cast<double>(t) * mean_z;
}

// Exact P(|mean(z) - mean(z')| >= 1/sqrt(n)) for two independent Rademacher
// samples of size n. With K, K' ~ Bin(n, 1/2) the event is 4 (K - K')^2 >= n;
// counts are summed exactly in 128-bit integers.
inline double gap_probability_exact(std::size_t n) {
    if (n == 0) throw ConfigError("n must be >= 1");
    if (n > 40) throw ConfigError("gap_probability_exact supports n <= 40; use gap_probability_mc");
    using u128 = unsigned __int128;
    std::vector<u128> binom(n + 1, 0);
    binom[0] = 1;
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t k = i; k >= 1; --k) binom[k] += binom[k - 1];
    u128 hits = 0;
    for (std::size_t k = 0; k <= n; ++k)
        for (std::size_t k2 = 0; k2 <= n; ++k2) {
            const auto diff = static_cast<long long>(k) - static_cast<long long>(k2);
            if (4 * diff * diff >= static_cast<long long>(n)) hits += binom[k] * binom[k2];
        }
    const u128 total = u128{1} << (2 * n);
    return static_cast<double>(static_cast<long double>(hits) / static_cast<long double>(total));
}

// Same probability for any n: K - K' + n ~ Bin(2n, 1/2), summed in double
// precision from log-pmf terms.
inline double gap_probability_binomial(std::size_t n) {
    if (n == 0) throw ConfigError("n must be >= 1");
    const double m = 2.0 * static_cast<double>(n);
    const double log_norm = std::lgamma(m + 1.0) - m * std::log(2.0);
    double p = 0.0;
    for (std::size_t j = 0; j <= 2 * n; ++j) {
        const auto diff = static_cast<long long>(j) - static_cast<long long>(n);
        if (4 * diff * diff < static_cast<long long>(n)) continue;
        const double jj = static_cast<double>(j);
        p += std::exp(log_norm - std::lgamma(jj + 1.0) - std::lgamma(m - jj + 1.0));
    }
    return std::min(p, 1.0);
}

struct MonteCarloEstimate {
    double estimate = 0.0;
    double se = 0.0;
};

// Fair coins are taken 64 at a time from the bits of one generator word.
inline std::size_t count_heads(Rng& rng, std::size_t n) {
    std::size_t heads = 0;
    for (; n >= 64; n -= 64) heads += static_cast<std::size_t>(std::popcount(rng()));
    if (n > 0) heads += static_cast<std::size_t>(std::popcount(rng() >> (64 - n)));
    return heads;
}

inline MonteCarloEstimate gap_probability_mc(std::size_t n, std::size_t replicates, std::uint64_t seed,
                                             std::size_t workers = 0) {
    if (replicates < 10000) throw ConfigError("gap_probability_mc needs at least 10^4 replicates");
    constexpr std::size_t block = 1000;
    const std::size_t blocks = (replicates + block - 1) / block;
    auto hits = parallel_map(blocks, workers, [&](std::size_t b) {
        Rng rng = make_rng(seed, b);
        std::size_t h = 0;
        const std::size_t count = std::min(block, replicates - b * block);
        for (std::size_t r = 0; r < count; ++r) {
            const auto k = static_cast<long long>(count_heads(rng, n));
            const auto k2 = static_cast<long long>(count_heads(rng, n));
            if (4 * (k - k2) * (k - k2) >= static_cast<long long>(n)) ++h;
        }
        return h;
    });
    std::size_t total = 0;
    for (auto h : hits) total += h;
    const double p = static_cast<double>(total) / static_cast<double>(replicates);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(replicates))};
}

// ---------------------------------------------------------------------------

struct NonsmoothConstruction {
    double L = 1.0;
    double eta = 0.1;
    std::size_t T = 1;
    std::size_t n = 1;
    std::size_t d = 2;

    static NonsmoothConstruction make(double L, double eta, std::size_t T, std::size_t n, std::size_t d) {
        NonsmoothConstruction c{L, eta, T, n, d};
        c.validate();
        return c;
    }

    void validate() const {
        if (!(L > 0.0) || !(eta > 0.0)) throw ConfigError("nonsmooth construction: L and eta must be positive");
        if (T == 0 || n == 0) throw ConfigError("nonsmooth construction: T and n must be >= 1");
        if (d <= T) throw ConfigError("nonsmooth construction: needs d > T");
    }

    double gamma() const { return 1.0 / (4.0 * std::sqrt(static_cast<double>(d) * static_cast<double>(T))); }

    // Upper end of the eps range: gamma eta L / (2n).
    double epsilon_cap() const { return gamma() * eta * L / (2.0 * static_cast<double>(n)); }

    // eps_i = i / (d + 1) * gamma eta L / (2n), i = 1 .. d.
    std::vector<double> epsilons() const {
        std::vector<double> eps(d);
        for (std::size_t i = 0; i < d; ++i)
            eps[i] = static_cast<double>(i + 1) / static_cast<double>(d + 1) * epsilon_cap();
        return eps;
    }

    FiniteDistribution distribution() const {
        const double p1 = 1.0 / static_cast<double>(n + 1);
        return FiniteDistribution({Instance{WeightVector{}, 1.0}, Instance{WeightVector{}, 0.0}}, {p1, 1.0 - p1});
    }

    ConvexObjective objective() const { return NonsmoothObjective{L, gamma(), epsilons()}; }

    // w_t = t a 1 - (eta L / 2) sum_{s < t} e_s,  a = gamma eta L sum_z / (2n),
    // valid for 1 <= t <= T whenever sum_z >= 1.
    WeightVector closed_form(std::size_t t, double sum_z) const {
        WeightVector w = zeros(d);
        if (t == 0) return w;
        const double a = gamma() * eta * L * sum_z / (2.0 * static_cast<double>(n));
        w.setConstant(static_cast<double>(t) * a);
        for (std::size_t s = 0; s + 1 < t; ++s) w[static_cast<Eigen::Index>(s)] -= 0.5 * eta * L;
        return w;
    }
};

struct NonsmoothEventProbability {
    double p_allzero = 0.0;         // (1 - 1/(n+1))^n: sample S' has no z = 1
    double p_joint_exact = 0.0;     // p_allzero * (1 - p_allzero): S has a one and S' has none
    double p_joint_lb = 0.0;        // 0.5 (1 - e^{-1/2})
    double p_some_one_alt = 0.0;    // 1 - (1 - 1/n)^n
};

inline NonsmoothEventProbability nonsmooth_event_probability(std::size_t n) {
    if (n == 0) throw ConfigError("n must be >= 1");
    const double nn = static_cast<double>(n);
    NonsmoothEventProbability p;
    p.p_allzero = std::pow(1.0 - 1.0 / (nn + 1.0), nn);
    p.p_joint_exact = p.p_allzero * (1.0 - p.p_allzero);
    p.p_joint_lb = 0.5 * (1.0 - std::exp(-0.5));
    p.p_some_one_alt = 1.0 - std::pow(1.0 - 1.0 / nn, nn);
    return p;
}

struct NonsmoothCheck {
    bool event_met = false;
    bool matches = false;
    bool lower_bound_holds = false;
    double max_error = 0.0;          // max_t ||w_t - closed_form(t)||_inf
    double min_norm_ratio = std::numeric_limits<double>::infinity();   // min_s ||w_{s+1}|| / ((3/8) eta L sqrt(s))
};

// Runs GD for t steps on S and compares with the closed form; checks
// ||w_{s+1}|| >= (3/8) eta L sqrt(s) for s = 1 .. t-1.
inline NonsmoothCheck nonsmooth_trajectory_check(const NonsmoothConstruction& params, const SampleSet& s,
                                                 std::size_t t) {
    params.validate();
    if (t > params.T) throw ConfigError("nonsmooth_trajectory_check: t exceeds T");
    NonsmoothCheck out;
    double sum_z = 0.0;
    for (const auto& z : s.instances) sum_z += z.label;
    out.event_met = sum_z >= 1.0;
    if (!out.event_met) return out;
    if (s.size() != params.n) throw ConfigError("nonsmooth_trajectory_check: sample size differs from n");

    GdConfig cfg;
    cfg.eta = params.eta;
    cfg.T = t;
    const Trajectory traj = gd_run_empirical(params.objective(), s, cfg);
    for (std::size_t k = 0; k <= t; ++k)
        out.max_error = std::max(out.max_error, (traj[k] - params.closed_form(k, sum_z)).cwiseAbs().maxCoeff());
    out.matches = out.max_error <= 1e-10;
    out.lower_bound_holds = true;
    for (std::size_t k = 1; k < t; ++k) {
        const double floor = 0.375 * params.eta * params.L * std::sqrt(static_cast<double>(k));
        const double ratio = traj[k + 1].norm() / floor;
        out.min_norm_ratio = std::min(out.min_norm_ratio, ratio);
        if (ratio < 1.0) out.lower_bound_holds = false;
    }
    return out;
}

// ---------------------------------------------------------------------------
// One-dimensional drift instances.

enum class GnVariant { drift, scaled_drift };

inline std::string to_string(GnVariant v) { return v == GnVariant::drift ? "drift" : "scaled-drift"; }

inline double gn_slope(GnVariant v, double L, std::size_t n) {
    return v == GnVariant::drift ? L : L / std::pow(static_cast<double>(n), 0.25);
}

inline FiniteDistribution gn_distribution() { return FiniteDistribution({Instance{unit(1, 0), 1.0}}, {1.0}); }

inline ConvexObjective gn_objective(GnVariant v, double L, std::size_t n) {
    if (v == GnVariant::drift) return GlmObjective{linear_loss(L)};
    return GlmObjective{scaled_linear_loss(L, 1.0 / std::pow(static_cast<double>(n), 0.25))};
}

struct GnValue {
    double erm_gap = 0.0;     // F_S(wbar) - min_{|w| <= 1} F_S(w)
    double norm_term = 0.0;   // |wbar| L / sqrt(n)
    double wbar = 0.0;
};

// Closed form: with slope s, w_t = -eta s t and wbar = -eta s (T + 1) / 2, so
// erm_gap = s (1 + wbar) and norm_term = |wbar| L / sqrt(n).
inline GnValue gn_evaluate(GnVariant v, double L, std::size_t n, double eta, std::size_t T) {
    if (!(L > 0.0) || !(eta > 0.0) || T == 0 || n == 0) throw ConfigError("gn_evaluate: parameters must be positive");
    const double s = gn_slope(v, L, n);
    GnValue out;
    out.wbar = -eta * s * (static_cast<double>(T) + 1.0) / 2.0;
    out.erm_gap = s * out.wbar + s;
    out.norm_term = std::abs(out.wbar) * L / std::sqrt(static_cast<double>(n));
    return out;
}

// The same quantities measured by running the engine.
inline GnValue gn_evaluate_engine(GnVariant v, double L, std::size_t n, double eta, std::size_t T) {
    const ConvexObjective obj = gn_objective(v, L, n);
    const FiniteDistribution dist = gn_distribution();
    GdConfig cfg;
    cfg.eta = eta;
    cfg.T = T;
    const WeightVector wbar = average_iterate(gd_run_population(obj, dist, cfg));
    const double s = gn_slope(v, L, n);
    GnValue out;
    out.wbar = wbar[0];
    out.erm_gap = population_risk(dist, obj, wbar) - (-s);   // min over [-1, 1] of s w is -s
    out.norm_term = wbar.norm() * L / std::sqrt(static_cast<double>(n));
    return out;
}

struct GnGridResult {
    double G = std::numeric_limits<double>::infinity();
    double eta = 0.0;
    std::size_t T = 0;
};

// inf over the grid of the max over both instances and both terms.
inline double gn_point_value(double L, std::size_t n, double eta, std::size_t T) {
    double worst = -std::numeric_limits<double>::infinity();
    for (GnVariant v : {GnVariant::drift, GnVariant::scaled_drift}) {
        const GnValue g = gn_evaluate(v, L, n, eta, T);
        worst = std::max({worst, g.erm_gap, g.norm_term});
    }
    return worst;
}

inline GnGridResult gn_grid_optimize(double L, std::size_t n, const std::vector<double>& eta_grid,
                                     const std::vector<std::size_t>& T_grid) {
    if (eta_grid.empty() || T_grid.empty()) throw ConfigError("gn_grid_optimize: empty grid");
    GnGridResult best;
    for (double eta : eta_grid)
        for (std::size_t T : T_grid) {
            const double v = gn_point_value(L, n, eta, T);
            if (v < best.G) best = {v, eta, T};
        }
    return best;
}

inline std::vector<double> log_grid(double lo, double hi, std::size_t count) {
    if (count < 2 || !(lo > 0.0) || !(hi > lo)) throw ConfigError("log_grid: need count >= 2 and 0 < lo < hi");
    std::vector<double> out(count);
    const double step = std::log(hi / lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) out[i] = lo * std::exp(step * static_cast<double>(i));
    return out;
}

inline std::vector<std::size_t> pow2_grid(std::size_t max_exponent) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k <= max_exponent; ++k) out.push_back(std::size_t{1} << k);
    return out;
}

} // namespace gdprox
