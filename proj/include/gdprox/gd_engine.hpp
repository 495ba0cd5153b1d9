// gdprox/gd_engine.hpp
//
// Unprojected subgradient descent
//     w_{t+1} = w_t - eta * g_t,   g_t in the subdifferential of the risk at w_t,
// on the empirical risk of a sample or on the exact population risk of a
// finite distribution, plus iterate averaging and a projected-subgradient
// oracle for min over the ball of radius B.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "gdprox/csv.hpp"
#include "gdprox/distributions.hpp"
#include "gdprox/objectives.hpp"
#include "gdprox/types.hpp"

namespace gdprox {

struct Averaging {
    enum class Kind { full, tail, last };
    Kind kind = Kind::full;
    double fraction = 1.0;   // tail only, in (0, 1]

    static Averaging full_average() { return {Kind::full, 1.0}; }
    static Averaging tail_average(double fraction) {
        if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("tail-average fraction must lie in (0, 1]");
        return {Kind::tail, fraction};
    }
    static Averaging last_iterate() { return {Kind::last, 1.0}; }
};

struct GdConfig {
    double eta = 0.1;
    std::size_t T = 1;
    Averaging averaging;
    std::optional<WeightVector> w0;   // zero vector when unset

    void validate() const {
        if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("learning rate must be positive");
    }
};

// First iterate index included in the average; the window is [first, T].
inline std::size_t averaging_start(const Averaging& avg, std::size_t T) {
    if (T == 0) return 0;
    switch (avg.kind) {
    case Averaging::Kind::full: return 1;
    case Averaging::Kind::tail: {
        auto k = static_cast<std::size_t>(std::ceil(avg.fraction * static_cast<double>(T) - 1e-12));
        k = std::clamp<std::size_t>(k, 1, T);
        return T - k + 1;
    }
    case Averaging::Kind::last: return T;
    }
    return 1;
}

enum class TrajectorySource { empirical, population };

struct Trajectory {
    std::vector<WeightVector> iterates;   // w_0 .. w_T
    GdConfig config;
    TrajectorySource source = TrajectorySource::empirical;
    std::uint64_t seed = 0;
    std::uint64_t replicate = 0;

    std::size_t steps() const { return iterates.size() - 1; }
    const WeightVector& operator[](std::size_t t) const { return iterates[t]; }
};

namespace detail {

inline std::size_t problem_dim(const ConvexObjective& obj, const DiscreteMeasure& m, const GdConfig& cfg) {
    if (cfg.w0) return dim(*cfg.w0);
    if (auto d = obj.fixed_dimension()) return *d;
    if (m.atoms.empty()) throw ConfigError("empty measure");
    return dim(m.atoms.front().features);
}

} // namespace detail

// Core loop. `visit(t, w_t)` is called for t = 0 .. T.
template <class Visitor>
void run_gd(const ConvexObjective& obj, const DiscreteMeasure& m, const GdConfig& cfg, Visitor&& visit) {
    cfg.validate();
    const std::size_t d = detail::problem_dim(obj, m, cfg);
    WeightVector w = cfg.w0 ? *cfg.w0 : zeros(d);
    for (const auto& a : m.atoms) detail::check_dims(obj, w, a);
    WeightVector g(w.size());
    visit(std::size_t{0}, std::as_const(w));
    for (std::size_t t = 0; t < cfg.T; ++t) {
        subgrad_into(m, obj, w, g);
        w.noalias() -= cfg.eta * g;
        if (!w.allFinite()) throw NumericFault(t + 1);
        visit(t + 1, std::as_const(w));
    }
}

inline Trajectory gd_run(const ConvexObjective& obj, const DiscreteMeasure& m, const GdConfig& cfg,
                         TrajectorySource source = TrajectorySource::empirical) {
    Trajectory traj;
    traj.config = cfg;
    traj.source = source;
    traj.iterates.reserve(cfg.T + 1);
    run_gd(obj, m, cfg, [&](std::size_t, const WeightVector& w) { traj.iterates.push_back(w); });
    return traj;
}

inline Trajectory gd_run_empirical(const ConvexObjective& obj, const SampleSet& s, const GdConfig& cfg) {
    Trajectory traj = gd_run(obj, measure_of(s), cfg, TrajectorySource::empirical);
    traj.seed = s.seed;
    traj.replicate = s.replicate;
    return traj;
}

inline Trajectory gd_run_population(const ConvexObjective& obj, const FiniteDistribution& dist, const GdConfig& cfg) {
    return gd_run(obj, measure_of(dist), cfg, TrajectorySource::population);
}

inline WeightVector average_iterate(const Trajectory& traj) {
    if (traj.iterates.empty()) throw ConfigError("empty trajectory");
    const std::size_t T = traj.steps();
    if (T == 0) return traj.iterates.front();
    const std::size_t first = averaging_start(traj.config.averaging, T);
    WeightVector sum = zeros(dim(traj.iterates.front()));
    for (std::size_t t = first; t <= T; ++t) sum += traj.iterates[t];
    return sum / static_cast<double>(T - first + 1);
}

// Memory-lean run for very long horizons: keeps the configured average, the
// last iterate, and per-step norms instead of every iterate.
struct GdSummary {
    WeightVector last;
    WeightVector average;
    std::vector<double> norms;   // ||w_t||, t = 0 .. T
    double max_step = 0.0;       // max_t ||w_{t+1} - w_t||
};

inline GdSummary gd_run_lean(const ConvexObjective& obj, const DiscreteMeasure& m, const GdConfig& cfg) {
    GdSummary out;
    out.norms.reserve(cfg.T + 1);
    const std::size_t first = averaging_start(cfg.averaging, cfg.T);
    std::size_t count = 0;
    run_gd(obj, m, cfg, [&](std::size_t t, const WeightVector& w) {
        if (t == 0) {
            out.average = zeros(dim(w));
        } else {
            out.max_step = std::max(out.max_step, (w - out.last).norm());
        }
        if (t >= first) {
            out.average += w;
            ++count;
        }
        out.norms.push_back(w.norm());
        out.last = w;
    });
    out.average /= static_cast<double>(std::max<std::size_t>(count, 1));
    return out;
}

// ---------------------------------------------------------------------------
// Constrained ERM oracle: projected subgradient descent over
// {w : ||w|| <= B} with steps B / (L sqrt(k)). Returns the better of the
// running average and the best visited point. `tolerance` is the worst-case
// gap 3 L B / sqrt(budget) for this step rule; the reported value is always
// attained by a feasible point, so it is never below the true minimum.

struct OracleResult {
    WeightVector w;
    double value = 0.0;
    double tolerance = 0.0;
};

inline OracleResult constrained_erm_oracle(const ConvexObjective& obj, const DiscreteMeasure& m, double B,
                                           std::size_t budget = 100000) {
    if (!(B > 0.0)) throw ConfigError("oracle radius must be positive");
    if (budget == 0) throw ConfigError("oracle budget must be positive");
    const double L = obj.lipschitz();
    const std::size_t d = detail::problem_dim(obj, m, GdConfig{});
    WeightVector x = zeros(d);
    WeightVector g(x.size());
    WeightVector avg = zeros(d);
    OracleResult best{x, risk(m, obj, x), 0.0};
    std::size_t used = 0;
    for (std::size_t k = 1; k <= budget; ++k) {
        avg += x;
        ++used;
        subgrad_into(m, obj, x, g);
        const double gn = g.norm();
        if (gn == 0.0) break;   // x minimizes the risk outright
        x.noalias() -= (B / (L * std::sqrt(static_cast<double>(k)))) * g;
        const double xn = x.norm();
        if (xn > B) x *= B / xn;
        const double v = risk(m, obj, x);
        if (v < best.value) best = {x, v, 0.0};
    }
    avg /= static_cast<double>(used);
    if (avg.norm() > B) avg *= B / avg.norm();
    const double avg_value = risk(m, obj, avg);
    if (avg_value < best.value) best = {avg, avg_value, 0.0};
    best.tolerance = 3.0 * L * B / std::sqrt(static_cast<double>(budget));
    return best;
}

inline OracleResult constrained_erm_oracle(const ConvexObjective& obj, const SampleSet& s, double B,
                                           std::size_t budget = 100000) {
    return constrained_erm_oracle(obj, measure_of(s), B, budget);
}

// CSV: t, w_0 .. w_{k-1}, norm. `max_coords` truncates the coordinate columns.
inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj, std::size_t max_coords = static_cast<std::size_t>(-1)) {
    CsvWriter csv(out);
    const std::size_t d = traj.iterates.empty() ? 0 : dim(traj.iterates.front());
    const std::size_t k = std::min(d, max_coords);
    std::vector<std::string> cols{"t"};
    for (std::size_t i = 0; i < k; ++i) cols.push_back("w" + std::to_string(i));
    cols.push_back("norm");
    csv.header(cols);
    for (std::size_t t = 0; t < traj.iterates.size(); ++t) {
        std::vector<double> row{static_cast<double>(t)};
        for (std::size_t i = 0; i < k; ++i) row.push_back(traj.iterates[t][static_cast<Eigen::Index>(i)]);
        row.push_back(traj.iterates[t].norm());
        csv.row_values(row);
    }
}

} // namespace gdprox
