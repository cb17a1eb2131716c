#pragma once

// Monte Carlo verification experiments: LAN expansion, asymptotic normality,
// risk against the Gaussian bound, non-degeneracy and identifiability checks,
// propagation-of-chaos rate, and the KL indistinguishability proxy.

#include "mfl/estimate.hpp"
#include "mfl/likelihood.hpp"
#include "mfl/simulate.hpp"
#include "mfl/stats.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mfl {

/// Everything needed to simulate replications of one experiment.
struct SimulationSetup {
    DriftModel model;
    ParamVector theta;
    InitialLaw init;
    TimeGrid grid;
    std::size_t particles = 100;
    std::size_t replications = 10;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

/// Seed of replication r of an experiment seeded with `seed`.
[[nodiscard]] std::uint64_t replication_seed(std::uint64_t seed, std::size_t replication);

/// I_G(theta): closed form for McKean-OU, otherwise limit_fisher on a reference flow.
[[nodiscard]] FisherMatrix limit_information(const SimulationSetup& setup, std::size_t reference_atoms = 10000);

struct LanReport {
    Vec u;
    std::vector<double> zeta;
    double mean = 0.0;
    double variance = 0.0;
    double predicted_mean = 0.0;
    double predicted_variance = 0.0;
    double ks_statistic = 0.0;
    double ks_p_value = 1.0;
    bool degenerate = false;
    bool mean_pass = false;
    bool ks_pass = false;
    [[nodiscard]] bool pass() const { return mean_pass && ks_pass; }
};

/// zeta_r = log-likelihood ratio between theta + (N I)^{-1/2} u and theta on replication r.
[[nodiscard]] LanReport lan_experiment(const SimulationSetup& setup, const Vec& u, const FisherMatrix& info);

struct NormalityReport {
    Mat errors;  // R x p standardized errors (successful replications only)
    std::vector<std::size_t> replication;
    std::vector<EstimateResult> estimates;
    std::vector<KsResult> ks;
    Mat covariance;
    double covariance_error = 0.0;  // |Cov - Id|_F / sqrt(p)
    std::size_t failures = 0;
    bool ks_pass = false;
    bool covariance_pass = false;
    [[nodiscard]] bool pass() const { return ks_pass && covariance_pass; }
};

struct NormalityOptions {
    EstimateMethod method = EstimateMethod::linear_solve;
    double ks_level = 0.01;
    double covariance_tolerance = 0.25;
    MultiStartOptions multistart{};
};

/// R independent simulate-then-estimate runs standardized by sqrt(N) I^{1/2}.
[[nodiscard]] NormalityReport normality_experiment(const SimulationSetup& setup, const FisherMatrix& info,
                                                   const NormalityOptions& options = {});

struct RiskReport {
    LossSpec loss;
    std::vector<double> losses;
    double empirical_risk = 0.0;
    double gaussian_bound = 0.0;
    double ratio = 0.0;
    double standard_error = 0.0;
    NormalityReport normality;
};

[[nodiscard]] RiskReport risk_experiment(const SimulationSetup& setup, const FisherMatrix& info,
                                         const LossSpec& loss, const NormalityOptions& options = {});

struct NondegeneracyOptions {
    std::size_t random_pairs = 32;
    bool include_edges = true;
    std::size_t directions = 64;
    std::size_t x_points = 101;
    std::uint64_t seed = 0;
    double threshold = 1e-10;
};

struct NondegeneracyVerdict {
    bool nondegenerate = true;
    double min_max_value = 0.0;  // min over (pair, z) of max over x
    std::size_t pairs_checked = 0;
    std::size_t directions_checked = 0;
    // Witness of the weakest (pair, z).
    Vec theta;
    Vec theta_prime;
    Vec z;
};

/// Segment-averaged information at t = 0 on an x-grid for sampled segments and unit directions.
[[nodiscard]] NondegeneracyVerdict nondegeneracy_t0(const DriftModel& model, const ParamBox& box,
                                                    const EmpiricalMeasure& initial_sample,
                                                    const NondegeneracyOptions& options = {});

/// Radial factor h with F(grad U_theta)(xi) = i xi h(|xi|).
[[nodiscard]] double double_layer_fourier_factor(const Vec& theta, std::size_t dim, double xi_norm);
/// max over the grid of |F(grad U_theta)(xi) - F(grad U_theta')(xi)|.
[[nodiscard]] double identifiability_fourier_check(const Vec& theta, const Vec& theta_prime, std::size_t dim,
                                                   std::span<const double> xi_grid);

struct RateReport {
    std::vector<std::size_t> levels;
    std::vector<double> median_distance;
    std::vector<std::vector<double>> distances;  // per level, per replication
    LineFit fit;
    std::size_t reference_atoms = 0;
    bool exact_reference = false;
    bool coupling_bound = false;
};

struct ChaosOptions {
    std::vector<std::size_t> levels{100, 1000, 10000};
    std::size_t reference_atoms = 0;  // 0: 10 * max level
    bool exact_ou_reference = true;
};

/// Median W1(mu^N_T, reference) per N level and the log-log slope.
[[nodiscard]] RateReport chaos_rate(const SimulationSetup& setup, const ChaosOptions& options = {});

struct KlReport {
    std::vector<double> values;
    double estimate = 0.0;
    double standard_error = 0.0;
    std::size_t reference_atoms = 0;
};

/// 1/2 sum_i sum_j dt |c^{-1/2}(b(X^i, mu^N) - b(X^i, mu_ref))|^2 under the product dynamics.
[[nodiscard]] KlReport kl_proxy(const SimulationSetup& setup, std::size_t reference_atoms = 0);
/// Same, against a precomputed reference flow (shared across N levels).
[[nodiscard]] KlReport kl_proxy(const SimulationSetup& setup, const MeasureFlow& flow);

struct FisherConvergenceReport {
    std::vector<std::size_t> levels;
    std::vector<double> median_error;
    std::vector<std::vector<double>> errors;
    FisherMatrix limit;
};

/// |empirical_fisher(N) - I_G|_F per level, median over replications.
[[nodiscard]] FisherConvergenceReport fisher_convergence(const SimulationSetup& setup,
                                                         const std::vector<std::size_t>& levels,
                                                         const FisherMatrix& limit);

}  // namespace mfl
