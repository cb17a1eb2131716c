#pragma once

// CSV and metadata serialization. Reals are written with 17 significant
// digits so every artifact reads back to the identical double.

#include "mfl/estimate.hpp"
#include "mfl/simulate.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mfl {

inline constexpr int kSchemaVersion = 1;

[[nodiscard]] std::string format_double(double v);
/// Whole-token parse of a finite double.
[[nodiscard]] bool parse_double(std::string_view s, double& out);
[[nodiscard]] bool parse_u64(std::string_view s, std::uint64_t& out);
/// `[a, b, c]` or `a, b, c`.
[[nodiscard]] bool parse_list(std::string_view s, std::vector<double>& out);

[[nodiscard]] std::uint64_t fnv1a64(std::string_view bytes);
[[nodiscard]] std::string hex64(std::uint64_t v);

struct PathsMetadata {
    int schema_version = kSchemaVersion;
    std::string model;
    std::vector<double> theta;
    std::size_t particles = 0;
    std::size_t steps = 0;
    std::size_t dim = 1;
    std::size_t replications = 1;
    double horizon = 1.0;
    std::uint64_t seed = 0;
};

/// Header `rep,particle,step,time,x0[,x1,...]`; one row per (rep, particle, step).
void write_paths_csv(std::ostream& os, std::span<const ParticlePaths> reps);
[[nodiscard]] PathsMetadata paths_metadata(const ParticlePaths& paths, std::size_t replications);
[[nodiscard]] std::string paths_metadata_json(const PathsMetadata& meta);
[[nodiscard]] PathsMetadata parse_paths_metadata(std::string_view json);
[[nodiscard]] std::vector<ParticlePaths> read_paths_csv(std::istream& is, const PathsMetadata& meta);

/// `row,col,value`.
void write_matrix_csv(std::ostream& os, const Mat& m);
[[nodiscard]] Mat read_matrix_csv(std::istream& is);

/// `theta_0..theta_{p-1},loglik`.
void write_likelihood_scan(std::ostream& os, std::span<const Vec> thetas, std::span<const double> loglik);

/// `rep,method,converged,iters,theta_hat_0..,score_norm,boundary_flags`.
void write_estimates_csv(std::ostream& os, std::span<const std::size_t> reps, std::span<const EstimateResult> est);

}  // namespace mfl
