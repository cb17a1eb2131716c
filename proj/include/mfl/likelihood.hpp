#pragma once

// Discretized Girsanov log-likelihood, score and Fisher information.

#include "mfl/models.hpp"
#include "mfl/simulate.hpp"

#include <span>
#include <vector>

namespace mfl {

enum class FisherKind { empirical_over_n, limit };

/// Symmetric p x p information matrix.
struct FisherMatrix {
    Mat values;
    FisherKind kind = FisherKind::limit;

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(values.rows()); }
    [[nodiscard]] double determinant() const { return values.determinant(); }
    [[nodiscard]] double min_eigenvalue() const;
    /// Scale-aware degeneracy test: det < 1e-12 * (trace/p)^p.
    [[nodiscard]] bool degenerate() const;
};

/// Threshold used by every degeneracy decision in the library.
inline constexpr double kDegeneracyRelTol = 1e-12;
[[nodiscard]] double degeneracy_threshold(const Mat& m);
[[nodiscard]] bool is_degenerate(const Mat& m);

struct LikelihoodValue {
    double value = 0.0;
    Vec theta;
    std::size_t particles = 0;
    std::size_t steps = 0;
    /// value / N
    [[nodiscard]] double normalized() const { return value / static_cast<double>(particles); }
};

/// sum_i sum_j (c^{-1}b)^T dX - 1/2 |c^{-1/2} b|^2 dt, drift and measure at the left endpoint.
[[nodiscard]] LikelihoodValue log_likelihood_discrete(const DriftModel& model, const ParamVector& theta,
                                                      const ParticlePaths& paths);
/// Exact theta-gradient of log_likelihood_discrete.
[[nodiscard]] Vec score_discrete(const DriftModel& model, const ParamVector& theta, const ParticlePaths& paths);
/// log-likelihood at theta_prime minus log-likelihood at theta.
[[nodiscard]] double log_likelihood_ratio(const DriftModel& model, const ParamVector& theta,
                                          const ParamVector& theta_prime, const ParticlePaths& paths);
/// (1/N) sum_i sum_j grad(c^{-1/2}b)^T grad(c^{-1/2}b) dt along the observed paths.
[[nodiscard]] FisherMatrix empirical_fisher(const DriftModel& model, const ParamVector& theta,
                                            const ParticlePaths& paths);
/// Trapezoid-in-time, atom-average-in-space quadrature of I_G(theta) on a reference flow.
[[nodiscard]] FisherMatrix limit_fisher(const DriftModel& model, const ParamVector& theta, const MeasureFlow& flow);
/// Closed-form I_G(theta) for McKean-OU from the Gaussian moments, trapezoid in time.
[[nodiscard]] FisherMatrix ou_limit_fisher(const OUMoments& mom, const TimeGrid& grid);

/// Value and score in one pass (used by the optimizer).
struct LikelihoodWithScore {
    double value = 0.0;
    Vec score;
};
[[nodiscard]] LikelihoodWithScore log_likelihood_and_score(const DriftModel& model, const ParamVector& theta,
                                                           const ParticlePaths& paths);

/// Sum in a fixed pairwise tree order, independent of how the inputs were produced.
[[nodiscard]] double pairwise_sum(std::span<const double> values);

}  // namespace mfl
