#pragma once

// Counter-based random streams. Every draw is addressed by a 128-bit stream key
// derived from (seed, labels...), so results do not depend on scheduling.

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>

namespace mfl {

struct StreamKey {
    std::uint64_t hi = 0;
    std::uint64_t lo = 0;
    friend bool operator==(const StreamKey&, const StreamKey&) = default;
    friend auto operator<=>(const StreamKey&, const StreamKey&) = default;
};

/// Domain tags used as the first label of a stream.
namespace stream_tag {
inline constexpr std::uint64_t noise = 1;
inline constexpr std::uint64_t initial = 2;
inline constexpr std::uint64_t replication = 3;
inline constexpr std::uint64_t multistart = 4;
inline constexpr std::uint64_t directions = 5;
inline constexpr std::uint64_t reference = 6;
inline constexpr std::uint64_t sweep = 7;
}  // namespace stream_tag

/// 64-bit finalizer of splitmix64.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Two-lane absorb-and-mix hash of the seed and the labels. Stable across versions:
///   hi0 = mix64(seed + C1), lo0 = mix64(~seed + C2)
///   per label v: hi = mix64(hi ^ (v + C1)) + lo; lo = mix64(lo ^ (v * C3 + C2)) ^ hi
///   finally hi = mix64(hi ^ n_labels), lo = mix64(lo + hi)
[[nodiscard]] StreamKey derive_stream(std::uint64_t seed, std::span<const std::uint64_t> labels) noexcept;
[[nodiscard]] StreamKey derive_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> labels) noexcept;

/// 64-bit child seed, e.g. per replication: the hi lane of derive_stream.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> labels) noexcept;

/// Philox4x32 with 10 rounds (Salmon et al. counter-based generator).
[[nodiscard]] std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                                         std::array<std::uint32_t, 2> key) noexcept;

/// Random variates from one stream; block b of the stream is Philox(counter = key + b).
class Stream {
public:
    explicit Stream(StreamKey key) noexcept : key_(key) {}

    /// Two uniforms in (0, 1) with 53-bit resolution from block `block`.
    [[nodiscard]] std::array<double, 2> uniform_pair(std::uint32_t block) const noexcept;
    /// Two independent standard normals from block `block` (Box-Muller).
    [[nodiscard]] std::array<double, 2> normal_pair(std::uint32_t block) const noexcept;
    /// Fill out with standard normals using blocks 0, 1, ...
    void normals(std::span<double> out) const noexcept;
    /// Fill out with uniforms in (0, 1) using blocks 0, 1, ...
    void uniforms(std::span<double> out) const noexcept;

private:
    StreamKey key_;
};

}  // namespace mfl
