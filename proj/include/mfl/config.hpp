#pragma once

// Declarative experiment configuration: flat `key = value` lines, optional
// `[section]` headers (cosmetic), `#` comments, lists written as `[a, b, c]`.

#include "mfl/diagnostics.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mfl {

enum class ExperimentKind {
    simulate,
    estimate,
    fisher,
    lan,
    normality,
    risk,
    chaos_rate,
    kl_proxy,
    nondegeneracy,
    identifiability
};

[[nodiscard]] std::string_view kind_name(ExperimentKind kind);
[[nodiscard]] std::optional<ExperimentKind> kind_from_name(std::string_view name);
[[nodiscard]] std::vector<std::string> kind_names();

/// Box used when a config gives no lower/upper bounds.
[[nodiscard]] ParamBox default_box(Family family);

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::simulate;
    // Effective key/value pairs after overrides, as written (trimmed).
    std::map<std::string, std::string> entries;

    Family family = Family::mckean_ou;
    std::size_t dim = 1;
    double sigma = 1.0;
    Vec lower;
    Vec upper;
    std::string kernel_f;
    std::string kernel_g;
    std::string link;

    Vec theta;
    std::optional<Vec> theta_prime;
    std::optional<Vec> u;
    LossSpec loss;

    std::size_t particles = 0;
    std::vector<std::size_t> levels;
    std::size_t reference_atoms = 0;
    std::size_t replications = 1;
    double horizon = 1.0;
    std::size_t steps = 100;
    std::uint64_t seed = 0;
    InitialLaw init = InitialLaw::gaussian(0.0, 1.0);

    EstimateMethod method = EstimateMethod::linear_solve;
    std::size_t starts = 8;
    std::string out = "out";

    // Pass bands.
    double ks_level = 0.01;
    double covariance_tolerance = 0.25;
    double risk_low = 0.8;
    double risk_high = 1.3;
    double slope_low = -0.7;
    double slope_high = -0.2;
    double kl_ratio_max = 3.0;
    std::optional<bool> expect_degenerate;
    std::optional<bool> expect_nondegenerate;

    // nondegeneracy_t0 / identifiability
    NondegeneracyOptions nondegeneracy;
    double xi_max = 10.0;
    std::size_t xi_points = 201;
    double identifiability_tolerance = 1e-8;

    [[nodiscard]] DriftModel model() const;
    [[nodiscard]] TimeGrid grid() const { return {horizon, steps}; }
    [[nodiscard]] SimulationSetup setup(unsigned threads) const;

    /// Sorted `key=value` lines of every entry except `out`; independent of key order.
    [[nodiscard]] std::string canonical() const;
    /// FNV-1a 64 of canonical().
    [[nodiscard]] std::uint64_t hash() const;
};

struct ConfigParseResult {
    std::optional<ExperimentConfig> config;
    std::vector<std::string> errors;
    [[nodiscard]] bool ok() const { return config.has_value(); }
};

/// Key/value pairs applied on top of the file (CLI flags); they replace file entries.
using ConfigOverrides = std::vector<std::pair<std::string, std::string>>;

/// Parses and validates; collects every error rather than stopping at the first.
[[nodiscard]] ConfigParseResult parse_config(std::string_view text, const ConfigOverrides& overrides = {});
/// As parse_config but throws ConfigError with all messages, one per line.
[[nodiscard]] ExperimentConfig parse_config_or_throw(std::string_view text, const ConfigOverrides& overrides = {});

/// Documented keys, for help output.
[[nodiscard]] std::vector<std::string> config_keys();

}  // namespace mfl
