#include "mfl/optimize.hpp"

#include "mfl/error.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace mfl {

namespace {

std::vector<bool> bound_flags(const ParamBox& box, const Vec& x) {
    std::vector<bool> flags(static_cast<std::size_t>(x.size()));
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        flags[static_cast<std::size_t>(k)] = x(k) <= box.lower()(k) || x(k) >= box.upper()(k);
    }
    return flags;
}

}  // namespace

double projected_gradient_norm(const ParamBox& box, const Vec& x, const Vec& gradient) {
    return (box.project(x + gradient) - x).norm();
}

// Works on the minimization of F = -f. The inverse-Hessian approximation H is
// restricted to the free variables (those not held at a bound by the gradient).
BoxOptimizerResult maximize_in_box(const ObjectiveWithGradient& objective, const ParamBox& box, const Vec& start,
                                   const BoxOptimizerOptions& options) {
    const Eigen::Index p = start.size();
    if (static_cast<std::size_t>(p) != box.size()) throw ShapeError("start point and box differ in length");

    auto eval = [&](const Vec& x) {
        auto [v, g] = objective(x);
        if (!std::isfinite(v) || !g.allFinite()) throw NumericError("objective returned non-finite values");
        return std::pair<double, Vec>{-v, -g};
    };

    Vec x = box.project(start);
    double fx = 0.0;
    Vec gx;
    std::tie(fx, gx) = eval(x);
    Mat h = Mat::Identity(p, p);
    bool identity_h = true;
    const double diameter = std::max((box.upper() - box.lower()).norm(), 1e-8);

    BoxOptimizerResult res;
    std::size_t iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        const double pg = projected_gradient_norm(box, x, -gx);
        if (pg <= options.rel_tolerance * (1.0 + std::abs(fx))) {
            res.converged = true;
            break;
        }

        std::vector<bool> free(static_cast<std::size_t>(p));
        for (Eigen::Index k = 0; k < p; ++k) {
            const bool held_low = x(k) <= box.lower()(k) && gx(k) > 0.0;
            const bool held_high = x(k) >= box.upper()(k) && gx(k) < 0.0;
            free[static_cast<std::size_t>(k)] = !(held_low || held_high);
        }
        auto direction = [&](const Mat& hm) {
            Vec gf = gx;
            for (Eigen::Index k = 0; k < p; ++k) {
                if (!free[static_cast<std::size_t>(k)]) gf(k) = 0.0;
            }
            Vec d = -(hm * gf);
            for (Eigen::Index k = 0; k < p; ++k) {
                if (!free[static_cast<std::size_t>(k)]) d(k) = 0.0;
            }
            return d;
        };

        Vec d = direction(h);
        if (identity_h || gx.dot(d) >= 0.0) {
            h = Mat::Identity(p, p);
            identity_h = true;
            d = direction(h);
            const double dn = d.norm();
            if (dn > 0.0) d *= std::min(1.0, diameter / dn);
        }

        bool accepted = false;
        Vec x_new;
        double f_new = 0.0;
        Vec g_new;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            double alpha = 1.0;
            for (std::size_t bt = 0; bt < options.max_backtracks; ++bt, alpha *= 0.5) {
                x_new = box.project(x + alpha * d);
                const Vec step = x_new - x;
                if (step.norm() == 0.0) break;
                std::tie(f_new, g_new) = eval(x_new);
                if (f_new <= fx + options.armijo * gx.dot(step)) {
                    accepted = true;
                    break;
                }
            }
            if (!accepted && !identity_h) {
                h = Mat::Identity(p, p);
                identity_h = true;
                d = direction(h);
                const double dn = d.norm();
                if (dn > 0.0) d *= std::min(1.0, diameter / dn);
            } else {
                break;
            }
        }
        if (!accepted) break;

        const Vec s = x_new - x;
        const Vec y = g_new - gx;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (identity_h) {
                h *= sy / y.dot(y);
                identity_h = false;
            }
            const double rho = 1.0 / sy;
            const Mat id = Mat::Identity(p, p);
            h = (id - rho * s * y.transpose()) * h * (id - rho * y * s.transpose()) + rho * s * s.transpose();
        }
        x = x_new;
        fx = f_new;
        gx = g_new;
    }
    res.x = x;
    res.value = -fx;
    res.gradient = -gx;
    res.iterations = iter;
    res.projected_gradient_norm = projected_gradient_norm(box, x, -gx);
    res.at_bound = bound_flags(box, x);
    if (!res.converged && res.projected_gradient_norm <= options.rel_tolerance * (1.0 + std::abs(res.value))) {
        res.converged = true;
    }
    return res;
}

}  // namespace mfl
