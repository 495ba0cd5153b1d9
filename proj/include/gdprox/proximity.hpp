// gdprox/proximity.hpp
//
// How far does GD on a sample drift from GD on the population risk?
// Distances between trajectories, the explicit-constant proximity bounds,
// and Monte-Carlo experiments comparing the two. The reference sequence is
// always the exact population-GD trajectory of a finite distribution.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "gdprox/distributions.hpp"
#include "gdprox/gd_engine.hpp"
#include "gdprox/parallel.hpp"

namespace gdprox {

inline std::vector<double> trajectory_distance(const Trajectory& a, const Trajectory& b) {
    if (a.iterates.size() != b.iterates.size())
        throw ConfigError("trajectory_distance: length mismatch (" + std::to_string(a.iterates.size()) + " vs " +
                          std::to_string(b.iterates.size()) + ")");
    std::vector<double> out(a.iterates.size());
    for (std::size_t t = 0; t < out.size(); ++t) {
        if (a[t].size() != b[t].size()) throw DimensionMismatch(dim(a[t]), dim(b[t]));
        out[t] = (a[t] - b[t]).norm();
    }
    return out;
}

// E||w^S_{t+1} - w^D_{t+1}|| <= 4 eta L (t+1) / sqrt(n) + 4 eta L sqrt(t+1).
inline double proximity_bound_expectation(double eta, double L, double t, double n) {
    return 4.0 * eta * L * (t + 1.0) / std::sqrt(n) + 4.0 * eta * L * std::sqrt(t + 1.0);
}

// Single-step high-probability form for iterate t+1:
//   6 sqrt(eta^2 L^2 (t+1)^2 log(1/delta) / n) + 4 eta L sqrt(t+1).
inline double proximity_bound_highprob_step(double eta, double L, double t, double n, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
    return 6.0 * eta * L * (t + 1.0) / std::sqrt(n) * std::sqrt(std::log(1.0 / delta)) +
           4.0 * eta * L * std::sqrt(t + 1.0);
}

// Bound for iterate t holding simultaneously over t in [T] (union bound):
//   6 eta L t / sqrt(n) sqrt(log(T / delta)) + 4 eta L sqrt(t).
inline double proximity_bound_highprob(double eta, double L, double t, double n, double delta, double T) {
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
    const double horizon = std::max(T, 1.0);
    return 6.0 * eta * L * t / std::sqrt(n) * std::sqrt(std::log(horizon / delta)) + 4.0 * eta * L * std::sqrt(t);
}

// Per-iterate expectation bound (iterate index t, so t = 0 gives 0).
inline double iterate_bound_expectation(double eta, double L, std::size_t t, double n) {
    return t == 0 ? 0.0 : proximity_bound_expectation(eta, L, static_cast<double>(t - 1), n);
}

struct ProximityReport {
    std::vector<double> per_t_distance;
    std::vector<double> bound_expectation;
    std::vector<double> bound_highprob;
    double delta = 0.05;
    std::vector<bool> exceeded_highprob;

    bool any_exceeded() const { return std::find(exceeded_highprob.begin(), exceeded_highprob.end(), true) != exceeded_highprob.end(); }
};

inline ProximityReport proximity_report(const Trajectory& empirical, const Trajectory& reference, double L,
                                        std::size_t n, double delta) {
    ProximityReport r;
    r.delta = delta;
    r.per_t_distance = trajectory_distance(empirical, reference);
    const std::size_t T = empirical.steps();
    const double eta = empirical.config.eta;
    const double nn = static_cast<double>(n);
    for (std::size_t t = 0; t <= T; ++t) {
        r.bound_expectation.push_back(iterate_bound_expectation(eta, L, t, nn));
        r.bound_highprob.push_back(proximity_bound_highprob(eta, L, static_cast<double>(t), nn, delta,
                                                            static_cast<double>(T)));
        r.exceeded_highprob.push_back(r.per_t_distance[t] > r.bound_highprob[t]);
    }
    return r;
}

// Largest consecutive-iterate distance; GD steps never exceed eta * L.
inline double max_step_length(const Trajectory& traj) {
    double m = 0.0;
    for (std::size_t t = 1; t < traj.iterates.size(); ++t) m = std::max(m, (traj[t] - traj[t - 1]).norm());
    return m;
}

struct ExperimentOptions {
    std::size_t replicates = 200;
    std::uint64_t seed = 0;
    std::size_t workers = 0;           // 0: default_workers()
    bool keep_replicates = false;      // retain per-replicate curves for CSV
};

struct ProximitySummary {
    std::size_t n = 0;
    std::size_t T = 0;
    double eta = 0.0;
    double L = 0.0;
    double delta = 0.05;
    std::vector<double> mean, se, q50, q90, q99, max;   // per t, over replicates
    std::vector<double> bound_expectation, bound_highprob;
    double exceedance_fraction = 0.0;   // replicates with max_t dist / bound_hp > 1
    double max_distance = 0.0;
    double max_step = 0.0;               // over every trajectory
    std::vector<ProximityReport> replicates;   // only with keep_replicates
};

inline ProximitySummary proximity_experiment(const ConvexObjective& obj, const FiniteDistribution& dist,
                                             const GdConfig& cfg, std::size_t n, double delta,
                                             const ExperimentOptions& opt) {
    if (opt.replicates == 0) throw ConfigError("replicates must be >= 1");
    const double L = obj.lipschitz();
    const Trajectory reference = gd_run_population(obj, dist, cfg);

    struct Rep {
        ProximityReport report;
        double max_step = 0.0;
    };
    auto reps = parallel_map(opt.replicates, opt.workers, [&](std::size_t r) {
        const SampleSet s = sample(dist, n, opt.seed, r);
        const Trajectory traj = gd_run_empirical(obj, s, cfg);
        return Rep{proximity_report(traj, reference, L, n, delta), max_step_length(traj)};
    });

    ProximitySummary out;
    out.n = n;
    out.T = cfg.T;
    out.eta = cfg.eta;
    out.L = L;
    out.delta = delta;
    out.max_step = max_step_length(reference);
    out.bound_expectation = reps.front().report.bound_expectation;
    out.bound_highprob = reps.front().report.bound_highprob;
    std::size_t exceeded = 0;
    for (const auto& rep : reps) {
        exceeded += rep.report.any_exceeded() ? 1 : 0;
        out.max_step = std::max(out.max_step, rep.max_step);
    }
    out.exceedance_fraction = static_cast<double>(exceeded) / static_cast<double>(reps.size());

    std::vector<double> column(reps.size());
    for (std::size_t t = 0; t <= cfg.T; ++t) {
        for (std::size_t r = 0; r < reps.size(); ++r) column[r] = reps[r].report.per_t_distance[t];
        const auto ms = mean_stderr(column);
        out.mean.push_back(ms.mean);
        out.se.push_back(ms.se);
        out.q50.push_back(empirical_quantile(column, 0.5));
        out.q90.push_back(empirical_quantile(column, 0.9));
        out.q99.push_back(empirical_quantile(column, 0.99));
        out.max.push_back(*std::max_element(column.begin(), column.end()));
        out.max_distance = std::max(out.max_distance, out.max.back());
    }
    if (opt.keep_replicates) {
        out.replicates.reserve(reps.size());
        for (auto& rep : reps) out.replicates.push_back(std::move(rep.report));
    }
    return out;
}

// Mean distance within the expectation bound (plus `k_se` standard errors) at every t.
inline bool mean_within_expectation_bound(const ProximitySummary& s, double k_se = 2.0) {
    for (std::size_t t = 0; t < s.mean.size(); ++t)
        if (s.mean[t] > s.bound_expectation[t] + k_se * s.se[t] + 1e-12) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Stability: GD on S versus GD on S' = S with one example redrawn.

inline std::vector<double> stability_distances(const ConvexObjective& obj, const SampleSet& a, const SampleSet& b,
                                               const GdConfig& cfg) {
    return trajectory_distance(gd_run_empirical(obj, a, cfg), gd_run_empirical(obj, b, cfg));
}

struct StabilityReport {
    std::vector<double> per_t_distance;   // mean over replicates of ||w^S_t - w^S'_t||
    std::vector<double> stability_bound;    // eta L t / n + eta L sqrt(t), no constants
    std::vector<double> proximity_s;      // mean ||w^S_t - w^D_t||
    std::vector<double> proximity_s_prime;
    double contrast = 0.0;                // proximity_s[T] / per_t_distance[T]
    bool triangle_ok = true;              // stability <= prox(S) + prox(S') pointwise, every replicate
};

inline StabilityReport stability_experiment(const ConvexObjective& obj, const FiniteDistribution& dist,
                                            const GdConfig& cfg, std::size_t n, const ExperimentOptions& opt) {
    if (n < 2) throw ConfigError("stability experiment needs n >= 2");
    const Trajectory reference = gd_run_population(obj, dist, cfg);
    const double L = obj.lipschitz();

    struct Rep {
        std::vector<double> stab, prox, prox2;
        bool triangle = true;
    };
    auto reps = parallel_map(opt.replicates, opt.workers, [&](std::size_t r) {
        SampleSet s = sample(dist, n, opt.seed, r);
        Rng swap_rng = make_rng(opt.seed ^ 0x5DEECE66DULL, r);
        const auto i = static_cast<std::size_t>(uniform01(swap_rng) * static_cast<double>(n));
        SampleSet s2 = s;
        const std::size_t j = dist.draw_index(swap_rng);
        s2.instances[i] = dist.atoms()[j];
        s2.atom_index[i] = j;
        const Trajectory ta = gd_run_empirical(obj, s, cfg);
        const Trajectory tb = gd_run_empirical(obj, s2, cfg);
        Rep rep{trajectory_distance(ta, tb), trajectory_distance(ta, reference), trajectory_distance(tb, reference)};
        for (std::size_t t = 0; t < rep.stab.size(); ++t)
            if (rep.stab[t] > rep.prox[t] + rep.prox2[t] + 1e-12) rep.triangle = false;
        return rep;
    });

    StabilityReport out;
    std::vector<double> c1(reps.size()), c2(reps.size()), c3(reps.size());
    for (std::size_t t = 0; t <= cfg.T; ++t) {
        for (std::size_t r = 0; r < reps.size(); ++r) {
            c1[r] = reps[r].stab[t];
            c2[r] = reps[r].prox[t];
            c3[r] = reps[r].prox2[t];
        }
        out.per_t_distance.push_back(mean_stderr(c1).mean);
        out.proximity_s.push_back(mean_stderr(c2).mean);
        out.proximity_s_prime.push_back(mean_stderr(c3).mean);
        const double td = static_cast<double>(t);
        out.stability_bound.push_back(cfg.eta * L * td / static_cast<double>(n) + cfg.eta * L * std::sqrt(td));
    }
    for (const auto& rep : reps) out.triangle_ok = out.triangle_ok && rep.triangle;
    const double stab_T = out.per_t_distance.back();
    out.contrast = stab_T > 0.0 ? out.proximity_s.back() / stab_T : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// The two terms of the distribution-dependent guarantee:
//   erm_gap        = E[F_S(wbar^S) - min_{||w|| <= B} F_S(w)]
//   proximity_term = E[||wbar^S - wbar^D|| L / sqrt(n)]

struct GtildeTerms {
    double erm_gap = 0.0;
    double erm_gap_se = 0.0;
    double proximity_term = 0.0;
    double proximity_term_se = 0.0;
    double oracle_tolerance = 0.0;
};

inline GtildeTerms gtilde_terms(const ConvexObjective& obj, const FiniteDistribution& dist, const GdConfig& cfg,
                                std::size_t n, double B, const ExperimentOptions& opt,
                                std::size_t oracle_budget = 100000) {
    const double L = obj.lipschitz();
    const DiscreteMeasure pop = measure_of(dist);
    const WeightVector wbar_pop = gd_run_lean(obj, pop, cfg).average;
    struct Rep {
        double gap = 0.0, prox = 0.0, tol = 0.0;
    };
    auto reps = parallel_map(opt.replicates, opt.workers, [&](std::size_t r) {
        const DiscreteMeasure m = measure_of(sample(dist, n, opt.seed, r));
        const WeightVector wbar = gd_run_lean(obj, m, cfg).average;
        const OracleResult best = constrained_erm_oracle(obj, m, B, oracle_budget);
        return Rep{risk(m, obj, wbar) - best.value, (wbar - wbar_pop).norm() * L / std::sqrt(static_cast<double>(n)),
                   best.tolerance};
    });
    std::vector<double> gaps, prox;
    GtildeTerms out;
    for (const auto& r : reps) {
        gaps.push_back(r.gap);
        prox.push_back(r.prox);
        out.oracle_tolerance = std::max(out.oracle_tolerance, r.tol);
    }
    const auto g = mean_stderr(gaps);
    const auto p = mean_stderr(prox);
    out.erm_gap = g.mean;
    out.erm_gap_se = g.se;
    out.proximity_term = p.mean;
    out.proximity_term_se = p.se;
    return out;
}

} // namespace gdprox
