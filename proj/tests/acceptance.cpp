// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "gdprox/constructions.hpp"
#include "gdprox/generalization.hpp"
#include "gdprox/presets.hpp"
#include "gdprox/proximity.hpp"
#include "gdprox/ratefit.hpp"
#include "property_checks.hpp"

using namespace gdprox;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const std::uint64_t kSeed = 20240601;

// Criteria 1 and 2 share one set of runs.
struct ProximityRuns {
    std::vector<ProximitySummary> runs;
    double seconds = 0.0;
};

const ProximityRuns& proximity_runs() {
    static const ProximityRuns r = [] {
        ProximityRuns out;
        const auto t0 = std::chrono::steady_clock::now();
        const Preset p = hinge_preset();
        for (std::size_t n : {64u, 256u, 1024u}) {
            GdConfig cfg;
            cfg.T = n;
            cfg.eta = 1.0 / (p.objective.lipschitz() * std::sqrt(static_cast<double>(n)));
            out.runs.push_back(proximity_experiment(p.objective, p.dist, cfg, n, 0.05, {500, kSeed, 0, false}));
        }
        out.seconds = seconds_since(t0);
        return out;
    }();
    return r;
}

Verdict criterion1() {
    const auto& r = proximity_runs();
    bool ok = r.seconds < 120.0;
    std::string d;
    for (const auto& s : r.runs) {
        std::size_t below_half = 0;
        bool within = true;
        for (std::size_t t = 0; t <= s.T; ++t) {
            within = within && s.mean[t] <= s.bound_expectation[t];
            if (s.mean[t] <= 0.5 * s.bound_expectation[t]) ++below_half;
        }
        const double frac = static_cast<double>(below_half) / static_cast<double>(s.T + 1);
        ok = ok && within && frac >= 0.95;
        d += "n=" + std::to_string(s.n) + (within ? " mean<=bound" : " MEAN>BOUND") + " half-frac=" + fmt("%.3f", frac) + "; ";
    }
    return {ok, d + "runtime " + fmt("%.1f", r.seconds) + "s"};
}

Verdict criterion2() {
    const auto& r = proximity_runs();
    bool ok = true;
    std::string d;
    for (const auto& s : r.runs) {
        ok = ok && s.exceedance_fraction <= 0.05 + 0.02 && s.max_distance <= 10.0;
        d += "n=" + std::to_string(s.n) + " exceed=" + fmt("%.3f", s.exceedance_fraction) +
             " maxdist=" + fmt("%.3f", s.max_distance) + "; ";
    }
    return {ok, d};
}

double brute_force_gap(std::size_t n) {
    std::size_t hits = 0;
    const std::size_t total = std::size_t{1} << (2 * n);
    for (std::size_t mask = 0; mask < total; ++mask) {
        int a = 0, b = 0;
        for (std::size_t i = 0; i < n; ++i) {
            a += (mask >> i & 1) ? 1 : -1;
            b += (mask >> (n + i) & 1) ? 1 : -1;
        }
        // |a - b| / n >= 1/sqrt(n)  <=>  (a - b)^2 >= n
        if (static_cast<std::size_t>((a - b) * (a - b)) >= n) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(total);
}

Verdict criterion3() {
    const auto t0 = std::chrono::steady_clock::now();
    double min_exact = 1.0;
    for (std::size_t n = 1; n <= 40; ++n) min_exact = std::min(min_exact, gap_probability_exact(n));
    const double brute4 = brute_force_gap(4);
    const double exact4 = gap_probability_exact(4);
    const double ref = gap_probability_binomial(10000);
    const auto mc = gap_probability_mc(10000, 10000, kSeed);
    const double z = (mc.estimate - ref) / mc.se;
    const double secs = seconds_since(t0);
    const bool ok = min_exact >= 0.1 && exact4 == brute4 && std::abs(z) <= 3.0 && secs < 60.0;
    return {ok, "min exact(1..40)=" + fmt("%.4f", min_exact) + " P(n=4)=" + fmt("%.6f", exact4) + " brute=" +
                    fmt("%.6f", brute4) + " (=" + fmt("%.0f", brute4 * 256) + "/256) mc(1e4)=" + fmt("%.4f", mc.estimate) +
                    " exact=" + fmt("%.4f", ref) + " z=" + fmt("%.2f", z) + " runtime " + fmt("%.1f", secs) + "s"};
}

Verdict criterion4() {
    const std::size_t T = 64, n = 32, reps = 2000;
    const double L = 1.0, eta = 1.0 / std::sqrt(static_cast<double>(T));
    const auto c = NonsmoothConstruction::make(L, eta, T, n, 2 * T);
    const auto dist = c.distribution();
    struct Rep {
        bool joint = false, matches = true, lb = true;
        double err = 0.0;
    };
    auto reps_out = parallel_map(reps, 0, [&](std::size_t r) {
        const SampleSet s = sample(dist, n, kSeed, 2 * r), s2 = sample(dist, n, kSeed, 2 * r + 1);
        double sum2 = 0.0;
        for (const auto& z : s2.instances) sum2 += z.label;
        const auto chk = nonsmooth_trajectory_check(c, s, T);
        Rep out;
        out.joint = chk.event_met && sum2 == 0.0;
        if (out.joint) {
            out.matches = chk.matches;
            out.lb = chk.lower_bound_holds;
            out.err = chk.max_error;
        }
        return out;
    });
    std::size_t joint = 0;
    bool matches = true, lb = true;
    double err = 0.0;
    for (const auto& r : reps_out) {
        joint += r.joint;
        matches = matches && r.matches;
        lb = lb && r.lb;
        err = std::max(err, r.err);
    }
    const double freq = static_cast<double>(joint) / static_cast<double>(reps);
    const auto probs = nonsmooth_event_probability(n);
    return {matches && lb && freq >= 0.15,
            "joint freq=" + fmt("%.4f", freq) + " (exact " + fmt("%.4f", probs.p_joint_exact) + ") max closed-form err=" +
                fmt("%.2e", err) + (lb ? " norm bound holds" : " NORM BOUND FAILS")};
}

PowerLawFit g_fit() {
    std::vector<RatePoint> pts;
    const auto eta_grid = log_grid(1e-5, 10.0, 4001);
    const auto T_grid = pow2_grid(22);
    for (std::size_t n : {100u, 1000u, 10000u, 100000u})
        pts.push_back({static_cast<double>(n), gn_grid_optimize(1.0, n, eta_grid, T_grid).G, std::nullopt});
    return fit_power_law(pts);
}

Verdict criterion5() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto f = g_fit();
    const double secs = seconds_since(t0);
    return {exponent_in(f, -0.30, -0.20) && f.r_squared >= 0.98,
            "exponent=" + fmt("%.4f", f.exponent) + " R2=" + fmt("%.6f", f.r_squared) + " runtime " + fmt("%.2f", secs) + "s"};
}

Verdict criterion6() {
    const Preset p = hinge_preset();
    std::vector<RatePoint> pts;
    for (std::size_t n = 64; n <= 2048; n *= 2) {
        GdConfig cfg;
        cfg.T = n;
        cfg.eta = 1.0 / std::sqrt(static_cast<double>(n));
        const auto t = gtilde_terms(p.objective, p.dist, cfg, n, p.B, {100, kSeed, 0, false}, 20000);
        pts.push_back({static_cast<double>(n), t.proximity_term, std::nullopt});
    }
    const auto f = fit_power_law(pts);
    const auto g = g_fit();
    return {f.exponent <= -0.4 && f.exponent < g.exponent,
            "proximity-term exponent=" + fmt("%.4f", f.exponent) + " vs G exponent=" + fmt("%.4f", g.exponent)};
}

Verdict criterion7() {
    std::size_t violations = 0;
    double worst = -1e300;
    for (std::size_t k = 0; k < 50; ++k) {
        Rng rng = make_rng(kSeed, 700 + k);
        const std::size_t d = 1 + static_cast<std::size_t>(uniform01(rng) * 8);
        const std::size_t n = 1 + static_cast<std::size_t>(uniform01(rng) * 64);
        std::vector<Instance> z;
        for (std::size_t i = 0; i < n; ++i) {
            auto inst = props::random_instance(rng, d);
            inst.label = rademacher_sign(rng);
            z.push_back(inst);
        }
        const ScalarLoss loss = k % 2 ? hinge_loss() : absolute_loss(0.5 + uniform01(rng));
        const ConvexObjective obj = GlmObjective{loss};
        const double L = obj.lipschitz();
        GdConfig cfg;
        cfg.eta = 0.01 + 0.3 * uniform01(rng);
        cfg.T = 10 + static_cast<std::size_t>(uniform01(rng) * 300);
        const double B = 0.5 + 2.5 * uniform01(rng);
        const DiscreteMeasure m = measure_of(sample_from(z));
        const WeightVector wbar = gd_run_lean(obj, m, cfg).average;
        const OracleResult best = constrained_erm_oracle(obj, m, B, 100000);
        const double slack = risk(m, obj, wbar) - best.value -
                             (cfg.eta * L * L + B * B / (cfg.eta * static_cast<double>(cfg.T)) + best.tolerance);
        worst = std::max(worst, slack);
        if (slack > 0.0) ++violations;
    }
    return {violations == 0, std::to_string(violations) + " violations in 50 instances; worst slack " + fmt("%.4f", worst)};
}

Verdict criterion8() {
    const auto t0 = std::chrono::steady_clock::now();
    const Preset p = hinge_preset();
    const auto rows = thm1_experiment(p.dist, p.objective, {32, 128, 512, 2048}, {200, kSeed, 0, false}, p.B);
    std::vector<RatePoint> pts;
    std::string d;
    for (const auto& r : rows) {
        pts.push_back({static_cast<double>(r.n), r.mean_excess, std::nullopt});
        d += "n=" + std::to_string(r.n) + ":" + fmt("%.4f", r.mean_excess) + " ";
    }
    const auto f = fit_power_law(pts);
    const double secs = seconds_since(t0);
    return {f.exponent <= -0.4 && secs < 180.0,
            d + "slope=" + fmt("%.4f", f.exponent) + " runtime " + fmt("%.1f", secs) + "s"};
}

Verdict criterion9() {
    const Preset p = hinge_preset();
    bool ok = true;
    std::string d;
    for (std::size_t n : {256u, 1024u}) {
        GdConfig cfg;
        cfg.T = n;
        cfg.eta = 1.0 / std::sqrt(static_cast<double>(n));
        const auto t = hp_experiment(p.dist, p.objective.loss(), *p.clip, n, cfg, {1000, kSeed, 0, false}, p.B, {0.01});
        const auto& row = t.rows.front();
        ok = ok && row.holds;
        d += "n=" + std::to_string(n) + " q99=" + fmt("%.4f", row.quantile) + " bound=" + fmt("%.4f", row.bound_excess) + "; ";
    }
    return {ok, d};
}

Verdict criterion10() {
    const auto outcomes = props::run_all(10000, kSeed);
    bool ok = true;
    std::string d;
    for (const auto& o : outcomes) {
        ok = ok && o.violations == 0;
        d += o.name + ":" + std::to_string(o.violations) + "/" + std::to_string(o.trials) + " ";
    }
    return {ok, d};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"proximity in expectation", criterion1},
        {"proximity high probability", criterion2},
        {"linear lower-bound construction", criterion3},
        {"nonsmooth lower-bound construction", criterion4},
        {"G(n) rate", criterion5},
        {"G-tilde vs G", criterion6},
        {"optimization bound", criterion7},
        {"excess-risk rate", criterion8},
        {"clipped high-probability quantiles", criterion9},
        {"property suites", criterion10},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failed += v.pass ? 0 : 1;
        std::printf("%s criterion %zu (%s): %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    v.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
