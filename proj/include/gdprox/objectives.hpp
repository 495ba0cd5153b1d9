// gdprox/objectives.hpp
//
// Scalar convex Lipschitz losses, the generalized linear composition
// f(w; z) = loss(w . phi(x), y), and the nonsmooth max-type objective used by
// the sqrt(t) lower-bound construction. Every objective exposes its value and
// one fixed element of its subdifferential.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <type_traits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gdprox/types.hpp"

namespace gdprox {

enum class LossKind { hinge, linear, absolute, scaled_linear };

inline std::string to_string(LossKind kind) {
    switch (kind) {
    case LossKind::hinge: return "hinge";
    case LossKind::linear: return "linear";
    case LossKind::absolute: return "absolute";
    case LossKind::scaled_linear: return "scaled-linear";
    }
    return "unknown";
}

struct ScalarLoss {
    LossKind kind = LossKind::hinge;
    double lipschitz = 1.0;                // L; hinge assumes |y| <= L
    double scale = 1.0;                    // scaled-linear only: value = scale * L * a * y
    std::optional<double> clip_margin;     // b
    std::optional<double> value_bound;     // c
};

inline ScalarLoss hinge_loss() { return {LossKind::hinge, 1.0, 1.0, std::nullopt, std::nullopt}; }
inline ScalarLoss linear_loss(double L) { return {LossKind::linear, L, 1.0, std::nullopt, std::nullopt}; }
inline ScalarLoss absolute_loss(double L) { return {LossKind::absolute, L, 1.0, std::nullopt, std::nullopt}; }
inline ScalarLoss scaled_linear_loss(double L, double scale) {
    return {LossKind::scaled_linear, L, scale, std::nullopt, std::nullopt};
}

// Lipschitz constant in a (for |y| <= 1 where the label enters the slope).
inline double lipschitz_constant(const ScalarLoss& loss) {
    return loss.kind == LossKind::scaled_linear ? loss.lipschitz * std::abs(loss.scale) : loss.lipschitz;
}

inline double loss_value(const ScalarLoss& loss, double a, double y) {
    switch (loss.kind) {
    case LossKind::hinge: return std::max(0.0, 1.0 - y * a);
    case LossKind::linear: return loss.lipschitz * a * y;
    case LossKind::absolute: return loss.lipschitz * std::abs(a - y);
    case LossKind::scaled_linear: return loss.scale * loss.lipschitz * a * y;
    }
    throw ConfigError("unknown loss kind");
}

// Kinks: hinge at y*a == 1 and absolute at a == y both return 0.
inline double loss_subgrad(const ScalarLoss& loss, double a, double y) {
    switch (loss.kind) {
    case LossKind::hinge: return y * a < 1.0 ? -y : 0.0;
    case LossKind::linear: return loss.lipschitz * y;
    case LossKind::absolute:
        if (a > y) return loss.lipschitz;
        if (a < y) return -loss.lipschitz;
        return 0.0;
    case LossKind::scaled_linear: return loss.scale * loss.lipschitz * y;
    }
    throw ConfigError("unknown loss kind");
}

// ---------------------------------------------------------------------------
// Objective forms

struct GlmObjective {
    ScalarLoss loss;
};

// f(w; z) = -(gamma L / 2) z <w, 1> + (L / 2) max_i { w_i - eps_i, 0 }
struct NonsmoothObjective {
    double L = 1.0;
    double gamma = 0.0;
    std::vector<double> epsilons;   // strictly increasing, length d
};

struct CustomObjective {
    std::size_t dimension = 0;
    double lipschitz = 1.0;
    std::function<double(const WeightVector&, const Instance&)> value;
    std::function<WeightVector(const WeightVector&, const Instance&)> subgrad;
};

class ConvexObjective {
public:
    using Form = std::variant<GlmObjective, NonsmoothObjective, CustomObjective>;

    ConvexObjective(GlmObjective glm) : form_(std::move(glm)) {}
    ConvexObjective(NonsmoothObjective ns) : form_(std::move(ns)) {
        for (std::size_t i = 1; i < std::get<NonsmoothObjective>(form_).epsilons.size(); ++i) {
            const auto& eps = std::get<NonsmoothObjective>(form_).epsilons;
            if (!(eps[i - 1] < eps[i])) throw ConfigError("nonsmooth objective: epsilons must increase strictly");
        }
    }
    ConvexObjective(CustomObjective custom) : form_(std::move(custom)) {}

    const Form& form() const { return form_; }

    bool is_glm() const { return std::holds_alternative<GlmObjective>(form_); }
    const ScalarLoss& loss() const { return std::get<GlmObjective>(form_).loss; }

    double lipschitz() const {
        return std::visit(
            [](const auto& f) -> double {
                using F = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<F, GlmObjective>) return lipschitz_constant(f.loss);
                else if constexpr (std::is_same_v<F, NonsmoothObjective>) return f.L;
                else return f.lipschitz;
            },
            form_);
    }

    // Fixed dimension, or nullopt when it follows the instance features.
    std::optional<std::size_t> fixed_dimension() const {
        if (const auto* ns = std::get_if<NonsmoothObjective>(&form_)) return ns->epsilons.size();
        if (const auto* c = std::get_if<CustomObjective>(&form_)) return c->dimension;
        return std::nullopt;
    }

private:
    Form form_;
};

namespace detail {

inline void check_dims(const ConvexObjective& obj, const WeightVector& w, const Instance& z) {
    const std::size_t expected = obj.is_glm() ? dim(z.features) : *obj.fixed_dimension();
    if (dim(w) != expected) throw DimensionMismatch(expected, dim(w));
}

// Smallest index attaining max_i (w_i - eps_i), or nullopt when that max is <= 0.
inline std::optional<std::size_t> active_coordinate(const NonsmoothObjective& ns, const WeightVector& w) {
    std::optional<std::size_t> best;
    double best_value = 0.0;
    for (std::size_t i = 0; i < ns.epsilons.size(); ++i) {
        const double v = w[static_cast<Eigen::Index>(i)] - ns.epsilons[i];
        if (v > best_value) {
            best_value = v;
            best = i;
        }
    }
    return best;
}

} // namespace detail

inline double instance_value(const ConvexObjective& obj, const WeightVector& w, const Instance& z) {
    detail::check_dims(obj, w, z);
    return std::visit(
        [&](const auto& f) -> double {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, GlmObjective>) {
                return loss_value(f.loss, w.dot(z.features), z.label);
            } else if constexpr (std::is_same_v<F, NonsmoothObjective>) {
                double mx = 0.0;
                for (std::size_t i = 0; i < f.epsilons.size(); ++i)
                    mx = std::max(mx, w[static_cast<Eigen::Index>(i)] - f.epsilons[i]);
                return -0.5 * f.gamma * f.L * z.label * w.sum() + 0.5 * f.L * mx;
            } else {
                return f.value(w, z);
            }
        },
        obj.form());
}

// out += weight * g(w; z), with g the conventional subgradient. No allocation
// for the built-in forms; the engine calls this once per atom per step.
inline void accumulate_subgrad(const ConvexObjective& obj, const WeightVector& w, const Instance& z,
                               double weight, WeightVector& out) {
    std::visit(
        [&](const auto& f) {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, GlmObjective>) {
                const double s = loss_subgrad(f.loss, w.dot(z.features), z.label);
                if (s != 0.0) out.noalias() += (weight * s) * z.features;
            } else if constexpr (std::is_same_v<F, NonsmoothObjective>) {
                if (z.label != 0.0) out.array() -= weight * 0.5 * f.gamma * f.L * z.label;
                if (auto i = detail::active_coordinate(f, w))
                    out[static_cast<Eigen::Index>(*i)] += weight * 0.5 * f.L;
            } else {
                out.noalias() += weight * f.subgrad(w, z);
            }
        },
        obj.form());
}

inline WeightVector instance_subgrad(const ConvexObjective& obj, const WeightVector& w, const Instance& z) {
    detail::check_dims(obj, w, z);
    WeightVector g = WeightVector::Zero(w.size());
    accumulate_subgrad(obj, w, z, 1.0, g);
    return g;
}

// ---------------------------------------------------------------------------
// Prediction-range assumption used by the clipped learner:
//   |y| <= b,  |loss(a, y)| <= c on [-b, b],
//   loss(a, y) >= loss(|y|, y) for a >= |y| and loss(a, y) >= loss(-|y|, y) for a <= -|y|.
// Checked numerically on a geometric grid of offsets; adequate for the
// piecewise-linear losses shipped here.
inline bool satisfies_loss_assumption(const ScalarLoss& loss, double b, double c, double y) {
    constexpr double tol = 1e-12;
    const double ay = std::abs(y);
    if (ay > b + tol) return false;
    for (int k = 0; k <= 400; ++k) {
        const double a = -b + 2.0 * b * k / 400.0;
        if (std::abs(loss_value(loss, a, y)) > c + tol) return false;
    }
    if (std::abs(loss_value(loss, y, y)) > c + tol) return false;
    const double right = loss_value(loss, ay, y);
    const double left = loss_value(loss, -ay, y);
    for (double h = 1e-9; h < 1e4; h *= 1.5) {
        if (loss_value(loss, ay + h, y) < right - tol) return false;
        if (loss_value(loss, -ay - h, y) < left - tol) return false;
    }
    return true;
}

} // namespace gdprox
