#pragma once

// Maximum likelihood estimation: normal equations for drifts linear in theta,
// multi-start projected quasi-Newton otherwise.

#include "mfl/likelihood.hpp"
#include "mfl/optimize.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace mfl {

/// A theta = B with A = (1/N) sum phi phi^T dt and B = (1/N) sum phi dX (c = sigma^2 scaled).
struct NormalEquations {
    Mat a;
    Vec b;
    std::size_t particles = 0;
    std::size_t steps = 0;
};

enum class EstimateMethod { linear_solve, quasi_newton };
[[nodiscard]] std::string_view method_name(EstimateMethod m);

struct EstimateResult {
    ParamVector theta_hat;
    EstimateMethod method = EstimateMethod::linear_solve;
    bool converged = false;
    std::size_t iterations = 0;
    double score_norm = 0.0;
    std::vector<bool> boundary_active;
    double log_likelihood = 0.0;
};

struct MultiStartOptions {
    std::size_t starts = 8;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    BoxOptimizerOptions optimizer{};
};

[[nodiscard]] NormalEquations assemble_normal_equations(const DriftModel& model, const ParticlePaths& paths);

/// Solves the normal equations; clamps to the box and clears `converged` if the solution is outside.
/// Throws SingularError when A fails the scale-aware determinant test.
[[nodiscard]] EstimateResult mle_linear(const DriftModel& model, const ParticlePaths& paths);
[[nodiscard]] Vec solve_normal_equations(const NormalEquations& eq);

[[nodiscard]] EstimateResult mle_numeric(const DriftModel& model, const ParticlePaths& paths,
                                         const ParamVector& theta_init, const MultiStartOptions& options = {});

/// Start points used by mle_numeric: theta_init, box center, inset corners, then uniform draws.
[[nodiscard]] std::vector<Vec> multistart_points(const ParamBox& box, const Vec& theta_init, std::size_t count,
                                                 std::uint64_t seed);

/// sqrt(N) I^{1/2} (theta_hat - theta_star) with the symmetric root of I.
[[nodiscard]] Vec standardized_error(const Vec& theta_hat, const Vec& theta_star, std::size_t particles,
                                     const FisherMatrix& info);

/// Symmetric square root of a symmetric positive semidefinite matrix.
[[nodiscard]] Mat symmetric_sqrt(const Mat& m);
/// Symmetric inverse square root; throws SingularError if m is degenerate.
[[nodiscard]] Mat symmetric_inverse_sqrt(const Mat& m);

}  // namespace mfl
