#pragma once

// Experiment dispatch, artifact writing and the named verification suites.

#include "mfl/config.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mfl {

inline constexpr std::string_view kVersion = "0.1.0";

struct ArtifactRecord {
    std::string file;  // relative to the run directory
    std::size_t bytes = 0;
    std::uint64_t hash = 0;  // FNV-1a 64 of the contents
};

using Summary = std::vector<std::pair<std::string, std::string>>;

struct RunManifest {
    std::string kind;
    std::uint64_t config_hash = 0;
    std::vector<ArtifactRecord> artifacts;
    std::map<std::string, std::string> versions;
    double wall_clock_seconds = 0.0;
    bool pass = false;
    Summary summary;

    [[nodiscard]] std::string to_json() const;
};

/// `key: value` lines.
[[nodiscard]] std::string format_summary(const Summary& summary);

/// Runs one experiment into out_dir (created if needed): CSV artifacts, summary.txt,
/// config.txt and manifest.json. Files written before a failure are removed.
RunManifest run(const ExperimentConfig& config, const std::filesystem::path& out_dir, unsigned threads);

struct SuiteEntry {
    std::string name;
    std::string config_text;
};

[[nodiscard]] std::vector<std::string> suite_names();
/// Throws ConfigError for an unknown suite.
[[nodiscard]] std::vector<SuiteEntry> suite_entries(std::string_view suite);

struct SuiteResult {
    std::string suite;
    std::vector<std::pair<std::string, RunManifest>> runs;
    bool pass = false;
};

/// Runs every entry of the suite into out_dir/<entry>, seeded from `seed` when given.
SuiteResult verify(std::string_view suite, const std::filesystem::path& out_dir, unsigned threads,
                   std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace mfl
