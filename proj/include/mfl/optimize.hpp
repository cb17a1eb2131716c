#pragma once

// Projected quasi-Newton (BFGS) maximization over a box.

#include "mfl/models.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace mfl {

struct BoxOptimizerOptions {
    /// Stop when |P(x + g) - x| <= rel_tolerance * (1 + |f(x)|).
    double rel_tolerance = 1e-8;
    std::size_t max_iterations = 500;
    std::size_t max_backtracks = 60;
    double armijo = 1e-4;
};

struct BoxOptimizerResult {
    Vec x;
    double value = 0.0;
    Vec gradient;
    std::size_t iterations = 0;
    bool converged = false;
    double projected_gradient_norm = 0.0;
    std::vector<bool> at_bound;
};

/// Objective returning (value, gradient) at a point of the box.
using ObjectiveWithGradient = std::function<std::pair<double, Vec>(const Vec&)>;

[[nodiscard]] BoxOptimizerResult maximize_in_box(const ObjectiveWithGradient& objective, const ParamBox& box,
                                                 const Vec& start, const BoxOptimizerOptions& options = {});

/// Norm of the projected gradient step P(x + g) - x for ascent.
[[nodiscard]] double projected_gradient_norm(const ParamBox& box, const Vec& x, const Vec& gradient);

}  // namespace mfl
