// gdprox/ratefit.hpp
//
// Power-law fits value ~ A x^k by least squares on (log x, log value).

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "gdprox/types.hpp"

namespace gdprox {

struct RatePoint {
    double x = 0.0;
    double value = 0.0;
    std::optional<double> se;   // standard error of value
};

struct PowerLawFit {
    double exponent = 0.0;
    double log_intercept = 0.0;
    double r_squared = 0.0;
};

// Unweighted unless every point carries a positive standard error; then each
// log-value gets weight (value / se)^2 (delta method).
inline PowerLawFit fit_power_law(std::span<const RatePoint> pts) {
    if (pts.size() < 3) throw ConfigError("power-law fit needs at least 3 points");
    const bool weighted = std::all_of(pts.begin(), pts.end(), [](const RatePoint& p) { return p.se && *p.se > 0.0; });
    double sw = 0.0, sx = 0.0, sy = 0.0;
    std::vector<double> lx, ly, w;
    for (const auto& p : pts) {
        if (!(p.x > 0.0) || !(p.value > 0.0)) throw std::domain_error("power-law fit needs positive x and value");
        lx.push_back(std::log(p.x));
        ly.push_back(std::log(p.value));
        w.push_back(weighted ? (p.value / *p.se) * (p.value / *p.se) : 1.0);
    }
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sw += w[i];
        sx += w[i] * lx[i];
        sy += w[i] * ly[i];
    }
    const double mx = sx / sw, my = sy / sw;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += w[i] * (lx[i] - mx) * (lx[i] - mx);
        sxy += w[i] * (lx[i] - mx) * (ly[i] - my);
        syy += w[i] * (ly[i] - my) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) throw std::domain_error("power-law fit needs at least two distinct x");
    PowerLawFit fit;
    fit.exponent = sxy / sxx;
    fit.log_intercept = my - fit.exponent * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - (fit.log_intercept + fit.exponent * lx[i]);
        sse += w[i] * r * r;
    }
    // constant data: the fit is exact
    fit.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
    return fit;
}

inline PowerLawFit fit_power_law(const std::vector<RatePoint>& pts) { return fit_power_law(std::span<const RatePoint>(pts)); }

inline bool exponent_in(const PowerLawFit& fit, double lo, double hi) {
    if (lo > hi) throw ConfigError("exponent_in: lo > hi");
    return fit.exponent >= lo && fit.exponent <= hi;
}

} // namespace gdprox
