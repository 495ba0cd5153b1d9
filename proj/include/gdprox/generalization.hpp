// gdprox/generalization.hpp
//
// Exact excess population risk, Monte-Carlo empirical Rademacher complexity
// of shifted balls, prediction clipping, and the replicate experiments for
// the excess-risk rate and the clipped high-probability bound.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "gdprox/constructions.hpp"
#include "gdprox/distributions.hpp"
#include "gdprox/gd_engine.hpp"
#include "gdprox/objectives.hpp"
#include "gdprox/parallel.hpp"
#include "gdprox/proximity.hpp"

namespace gdprox {

struct ShiftedBall {
    WeightVector center;
    double radius = 0.0;

    ShiftedBall(WeightVector u, double K) : center(std::move(u)), radius(K) {
        if (!(K >= 0.0)) throw ConfigError("ball radius must be >= 0");
    }
    bool contains(const WeightVector& w, double tol = 1e-12) const { return (w - center).norm() <= radius + tol; }
};

struct ClipSpec {
    double b = 1.0;
    double c = 2.0;

    void validate() const {
        if (!(b > 0.0) || !(c > 0.0)) throw ConfigError("clip: b and c must be positive");
    }
};

inline double clip(double a, const ClipSpec& spec) { return std::clamp(a, -spec.b, spec.b); }

// sum_j p_j loss(clip(w . phi_j), y_j)
inline double clipped_risk(const DiscreteMeasure& m, const ScalarLoss& loss, const WeightVector& w,
                           const ClipSpec& spec) {
    double total = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j)
        total += m.weights[j] * loss_value(loss, clip(w.dot(m.atoms[j].features), spec), m.atoms[j].label);
    return total;
}

// min over ||w|| <= B of F_D, via the oracle on the exact population measure.
inline OracleResult constrained_population_min(const FiniteDistribution& dist, const ConvexObjective& obj, double B,
                                               std::size_t budget = 100000) {
    return constrained_erm_oracle(obj, measure_of(dist), B, budget);
}

struct ExcessRisk {
    double value = 0.0;
    double tolerance = 0.0;
};

inline ExcessRisk excess_population_risk(const FiniteDistribution& dist, const ConvexObjective& obj,
                                         const WeightVector& w, double B, std::size_t budget = 100000) {
    const OracleResult best = constrained_population_min(dist, obj, B, budget);
    return {population_risk(dist, obj, w) - best.value, best.tolerance};
}

// ---------------------------------------------------------------------------
// Rademacher complexity

struct RademacherEstimate {
    double estimate = 0.0;
    double se = 0.0;
};

namespace detail {

inline void draw_signs(Rng& rng, std::vector<double>& sigma) {
    for (auto& s : sigma) s = rademacher_sign(rng);
}

// One generator stream per sigma draw, so the result ignores the worker count.
template <class PerDraw>
RademacherEstimate sigma_average(std::size_t n, std::size_t m_sigma, std::uint64_t seed, std::size_t workers,
                                 PerDraw&& per_draw) {
    if (m_sigma < 100) throw ConfigError("m_sigma must be >= 100");
    auto values = parallel_map(m_sigma, workers, [&](std::size_t k) {
        Rng rng = make_rng(seed, k);
        std::vector<double> sigma(n);
        draw_signs(rng, sigma);
        return per_draw(sigma);
    });
    const auto ms = mean_stderr(values);
    return {ms.mean, ms.se};
}

} // namespace detail

// E_sigma sup_{||v|| <= K} (1/n) sum_i sigma_i v . phi_i = K E ||sum_i sigma_i phi_i|| / n
inline RademacherEstimate rademacher_linear(const SampleSet& s, double K, std::size_t m_sigma, std::uint64_t seed,
                                            std::size_t workers = 0) {
    if (!(K >= 0.0)) throw ConfigError("K must be >= 0");
    const std::size_t n = s.size();
    const std::size_t d = dim(s.instances.front().features);
    return detail::sigma_average(n, m_sigma, seed, workers, [&](const std::vector<double>& sigma) {
        WeightVector acc = zeros(d);
        for (std::size_t i = 0; i < n; ++i) acc += sigma[i] * s.instances[i].features;
        return K * acc.norm() / static_cast<double>(n);
    });
}

struct GlmBallRademacher {
    RademacherEstimate contraction;   // L times the linear estimate; does not depend on the center
    RademacherEstimate direct;        // max over a fixed candidate set inside the ball
};

// Candidates: the center, center +- K e_i, and center + K v_j for seeded
// random unit directions v_j.
inline std::vector<WeightVector> ball_candidates(const ShiftedBall& ball, std::size_t random_dirs, std::uint64_t seed) {
    const std::size_t d = dim(ball.center);
    std::vector<WeightVector> out{ball.center};
    for (std::size_t i = 0; i < d; ++i) {
        out.push_back(ball.center + ball.radius * unit(d, i));
        out.push_back(ball.center - ball.radius * unit(d, i));
    }
    Rng rng = make_rng(seed ^ 0xC4CEB9FE1A85EC53ULL, 0);
    std::normal_distribution<double> gauss;
    for (std::size_t j = 0; j < random_dirs; ++j) {
        WeightVector v(static_cast<Eigen::Index>(d));
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = gauss(rng);
        if (v.norm() > 0.0) out.push_back(ball.center + ball.radius * v / v.norm());
    }
    return out;
}

inline GlmBallRademacher rademacher_glm_ball(const SampleSet& s, const ScalarLoss& loss, const ShiftedBall& ball,
                                             std::size_t m_sigma, std::uint64_t seed, std::size_t workers = 0,
                                             std::size_t random_dirs = 64) {
    if (dim(ball.center) != dim(s.instances.front().features))
        throw DimensionMismatch(dim(s.instances.front().features), dim(ball.center));
    GlmBallRademacher out;
    const RademacherEstimate lin = rademacher_linear(s, ball.radius, m_sigma, seed, workers);
    const double L = lipschitz_constant(loss);
    out.contraction = {L * lin.estimate, L * lin.se};

    const std::size_t n = s.size();
    const auto cands = ball_candidates(ball, random_dirs, seed);
    // loss table: cands x n
    std::vector<std::vector<double>> table(cands.size(), std::vector<double>(n));
    for (std::size_t c = 0; c < cands.size(); ++c)
        for (std::size_t i = 0; i < n; ++i)
            table[c][i] = loss_value(loss, cands[c].dot(s.instances[i].features), s.instances[i].label);
    out.direct = detail::sigma_average(n, m_sigma, seed, workers, [&](const std::vector<double>& sigma) {
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& row : table) {
            double v = 0.0;
            for (std::size_t i = 0; i < n; ++i) v += sigma[i] * row[i];
            best = std::max(best, v);
        }
        return best / static_cast<double>(n);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Clipped high-probability bound.
//
//   F_D(w) + ||w||^2/(eta T) + (||w|| L + c) sqrt(2 log(2/delta) / n)
//   + eta L^2 + 12 eta L^2 T/n sqrt(log(4T/delta)) + 8 eta L^2 sqrt(T/n)
//   + c sqrt(2 log(8/delta) / n)
//
// The comparator infimum over w is replaced by a minimum over oracle
// minimizers of F_D on balls of radius r, so `comparator` is an upper bound
// on the infimum.

struct HpBoundTerms {
    double comparator = 0.0;
    double comparator_radius = 0.0;
    double opt = 0.0;          // eta L^2
    double drift = 0.0;        // 12 eta L^2 T / n sqrt(log(4T/delta))
    double sqrt_term = 0.0;    // 8 eta L^2 sqrt(T) / sqrt(n)
    double clip_conc = 0.0;    // c sqrt(2 log(8/delta) / n)
    double total = 0.0;
};

struct ComparatorPoint {
    double radius = 0.0;
    double norm = 0.0;
    double value = 0.0;   // F_D at the point
};

inline std::vector<ComparatorPoint> comparator_points(const FiniteDistribution& dist, const ConvexObjective& obj,
                                                      const std::vector<double>& radii, std::size_t budget,
                                                      std::size_t workers = 0) {
    auto pts = parallel_map(radii.size(), workers, [&](std::size_t k) {
        if (radii[k] == 0.0) {
            const WeightVector w0 = zeros(dist.feature_dim());
            return ComparatorPoint{0.0, 0.0, population_risk(dist, obj, w0)};
        }
        const OracleResult r = constrained_population_min(dist, obj, radii[k], budget);
        return ComparatorPoint{radii[k], r.w.norm(), r.value};
    });
    return pts;
}

inline HpBoundTerms hp_bound(const std::vector<ComparatorPoint>& pts, double eta, double L, std::size_t T,
                             std::size_t n, double delta, double c) {
    const double nn = static_cast<double>(n);
    const double TT = static_cast<double>(T);
    HpBoundTerms out;
    out.comparator = std::numeric_limits<double>::infinity();
    for (const auto& p : pts) {
        const double v = p.value + p.norm * p.norm / (eta * TT) +
                         (p.norm * L + c) * std::sqrt(2.0 * std::log(2.0 / delta) / nn);
        if (v < out.comparator) {
            out.comparator = v;
            out.comparator_radius = p.radius;
        }
    }
    out.opt = eta * L * L;
    out.drift = 12.0 * eta * L * L * TT / nn * std::sqrt(std::log(4.0 * TT / delta));
    out.sqrt_term = 8.0 * eta * L * L * std::sqrt(TT) / std::sqrt(nn);
    out.clip_conc = c * std::sqrt(2.0 * std::log(8.0 / delta) / nn);
    out.total = out.comparator + out.opt + out.drift + out.sqrt_term + out.clip_conc;
    return out;
}

inline std::vector<double> default_comparator_radii(double B) {
    std::vector<double> r{0.0};
    for (double x : log_grid(0.01, std::max(4.0 * B, 1.0), 48)) r.push_back(x);
    return r;
}

struct HpRow {
    double delta = 0.0;
    double quantile = 0.0;         // (1 - delta) quantile of clipped excess risk
    double quantile_unclipped = 0.0;
    HpBoundTerms bound;
    double bound_excess = 0.0;     // bound.total - F_min
    bool holds = false;
};

struct HpTable {
    std::size_t n = 0;
    double eta = 0.0;
    std::size_t T = 0;
    double F_min = 0.0;            // min over ||w|| <= B of F_D
    double oracle_tolerance = 0.0;
    std::vector<double> clipped_excess;     // per replicate
    std::vector<double> unclipped_excess;
    std::vector<HpRow> rows;
};

inline void require_loss_assumption(const FiniteDistribution& dist, const ScalarLoss& loss, const ClipSpec& spec) {
    spec.validate();
    for (const auto& a : dist.atoms())
        if (!satisfies_loss_assumption(loss, spec.b, spec.c, a.label))
            throw ConfigError("loss violates the clipping assumption for label " + format_number(a.label));
}

inline HpTable hp_experiment(const FiniteDistribution& dist, const ScalarLoss& loss, const ClipSpec& spec,
                             std::size_t n, const GdConfig& cfg, const ExperimentOptions& opt, double B,
                             std::vector<double> deltas = {0.1, 0.01}, std::size_t budget = 100000) {
    require_loss_assumption(dist, loss, spec);
    if (opt.replicates == 0) throw ConfigError("replicates must be >= 1");
    const ConvexObjective obj = GlmObjective{loss};
    const double L = lipschitz_constant(loss);
    const DiscreteMeasure pop = measure_of(dist);

    HpTable out;
    out.n = n;
    out.eta = cfg.eta;
    out.T = cfg.T;
    const OracleResult best = constrained_population_min(dist, obj, B, budget);
    out.F_min = best.value;
    out.oracle_tolerance = best.tolerance;

    struct Rep {
        double clipped = 0.0, unclipped = 0.0;
    };
    auto reps = parallel_map(opt.replicates, opt.workers, [&](std::size_t r) {
        const WeightVector wbar = gd_run_lean(obj, measure_of(sample(dist, n, opt.seed, r)), cfg).average;
        return Rep{clipped_risk(pop, loss, wbar, spec) - out.F_min, risk(pop, obj, wbar) - out.F_min};
    });
    for (const auto& r : reps) {
        out.clipped_excess.push_back(r.clipped);
        out.unclipped_excess.push_back(r.unclipped);
    }

    const auto pts = comparator_points(dist, obj, default_comparator_radii(B), budget, opt.workers);
    for (double delta : deltas) {
        if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
        HpRow row;
        row.delta = delta;
        row.quantile = empirical_quantile(out.clipped_excess, 1.0 - delta);
        row.quantile_unclipped = empirical_quantile(out.unclipped_excess, 1.0 - delta);
        row.bound = hp_bound(pts, cfg.eta, L, cfg.T, n, delta, spec.c);
        row.bound_excess = row.bound.total - out.F_min;
        row.holds = row.quantile <= row.bound_excess;
        out.rows.push_back(row);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Excess-risk rate with eta = 1/(L sqrt(n)), T = n.

struct RateRow {
    std::size_t n = 0;
    double eta = 0.0;
    std::size_t T = 0;
    double mean_excess = 0.0;
    double se = 0.0;
    double tolerance = 0.0;
};

inline std::vector<RateRow> thm1_experiment(const FiniteDistribution& dist, const ConvexObjective& obj,
                                            const std::vector<std::size_t>& n_list, const ExperimentOptions& opt,
                                            double B, std::size_t budget = 1000000) {
    const double L = obj.lipschitz();
    const OracleResult best = constrained_population_min(dist, obj, B, budget);
    std::vector<RateRow> out;
    for (std::size_t n : n_list) {
        GdConfig cfg;
        cfg.T = n;
        cfg.eta = 1.0 / (L * std::sqrt(static_cast<double>(n)));
        auto excess = parallel_map(opt.replicates, opt.workers, [&](std::size_t r) {
            const WeightVector wbar = gd_run_lean(obj, measure_of(sample(dist, n, opt.seed, r)), cfg).average;
            return population_risk(dist, obj, wbar) - best.value;
        });
        const auto ms = mean_stderr(excess);
        out.push_back({n, cfg.eta, cfg.T, ms.mean, ms.se, best.tolerance});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Generalization-gap band: mean of F_D(wbar^S) - F_S(wbar^S) against
// 2 L K / sqrt(n), K the largest observed ||wbar^S - wbar^D||.

struct GapBand {
    double mean_gap = 0.0;
    double se = 0.0;
    double K = 0.0;
    double bound = 0.0;
    bool holds = false;
};

inline GapBand generalization_gap_band(const ConvexObjective& obj, const FiniteDistribution& dist,
                                       const GdConfig& cfg, std::size_t n, const ExperimentOptions& opt) {
    const double L = obj.lipschitz();
    const WeightVector wbar_pop = gd_run_lean(obj, measure_of(dist), cfg).average;
    struct Rep {
        double gap = 0.0, dist = 0.0;
    };
    auto reps = parallel_map(opt.replicates, opt.workers, [&](std::size_t r) {
        const DiscreteMeasure m = measure_of(sample(dist, n, opt.seed, r));
        const WeightVector wbar = gd_run_lean(obj, m, cfg).average;
        return Rep{population_risk(dist, obj, wbar) - risk(m, obj, wbar), (wbar - wbar_pop).norm()};
    });
    std::vector<double> gaps;
    GapBand out;
    for (const auto& r : reps) {
        gaps.push_back(r.gap);
        out.K = std::max(out.K, r.dist);
    }
    const auto ms = mean_stderr(gaps);
    out.mean_gap = ms.mean;
    out.se = ms.se;
    out.bound = 2.0 * L * out.K / std::sqrt(static_cast<double>(n));
    out.holds = out.mean_gap <= out.bound + 2.0 * out.se;
    return out;
}

} // namespace gdprox
