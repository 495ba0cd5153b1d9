// gdprox/types.hpp
//
// Shared vocabulary: weight vectors, instances and the error types every
// module throws.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace gdprox {

using WeightVector = Eigen::VectorXd;

// One data point z. GLM objectives read `features` (= phi(x)) and `label`
// (= y); the nonsmooth construction reads only `label` as its z in {0, 1}.
struct Instance {
    WeightVector features;
    double label = 0.0;
};

// Bad parameters, unknown loss kinds, malformed config files.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DimensionMismatch : std::invalid_argument {
    DimensionMismatch(std::size_t expected, std::size_t got)
        : std::invalid_argument("dimension mismatch: expected " + std::to_string(expected) +
                                ", got " + std::to_string(got)),
          expected(expected), got(got) {}
    std::size_t expected;
    std::size_t got;
};

// A non-finite value showed up while iterating.
struct NumericFault : std::runtime_error {
    explicit NumericFault(std::size_t step)
        : std::runtime_error("non-finite iterate at step " + std::to_string(step)), step(step) {}
    std::size_t step;
};

inline WeightVector zeros(std::size_t d) { return WeightVector::Zero(static_cast<Eigen::Index>(d)); }

inline WeightVector unit(std::size_t d, std::size_t i) {
    WeightVector e = zeros(d);
    e[static_cast<Eigen::Index>(i)] = 1.0;
    return e;
}

inline std::size_t dim(const WeightVector& w) { return static_cast<std::size_t>(w.size()); }

} // namespace gdprox
