#include "mfl/rng.hpp"

#include <cmath>
#include <numbers>

namespace mfl {

namespace {

constexpr std::uint64_t kC1 = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kC2 = 0xd1b54a32d192ed03ULL;
constexpr std::uint64_t kC3 = 0xff51afd7ed558ccdULL;

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53U;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57U;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9U;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85U;

// Fixed Philox key; all stream separation lives in the 128-bit counter.
constexpr std::array<std::uint32_t, 2> kKey{0x2545F491U, 0x4F6CDD1DU};

double to_unit(std::uint32_t a, std::uint32_t b) noexcept {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(a) << 32) | b) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

StreamKey derive_stream(std::uint64_t seed, std::span<const std::uint64_t> labels) noexcept {
    std::uint64_t hi = mix64(seed + kC1);
    std::uint64_t lo = mix64(~seed + kC2);
    for (std::uint64_t v : labels) {
        hi = mix64(hi ^ (v + kC1)) + lo;
        lo = mix64(lo ^ (v * kC3 + kC2)) ^ hi;
    }
    hi = mix64(hi ^ static_cast<std::uint64_t>(labels.size()));
    lo = mix64(lo + hi);
    return {hi, lo};
}

StreamKey derive_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> labels) noexcept {
    return derive_stream(seed, std::span<const std::uint64_t>(labels.begin(), labels.size()));
}

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> labels) noexcept {
    return derive_stream(seed, labels).hi;
}

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) noexcept {
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW0;
        key[1] += kPhiloxW1;
    }
    return ctr;
}

std::array<double, 2> Stream::uniform_pair(std::uint32_t block) const noexcept {
    const std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(key_.lo) + block,
                                           static_cast<std::uint32_t>(key_.lo >> 32),
                                           static_cast<std::uint32_t>(key_.hi),
                                           static_cast<std::uint32_t>(key_.hi >> 32)};
    const auto r = philox4x32_10(ctr, kKey);
    return {to_unit(r[0], r[1]), to_unit(r[2], r[3])};
}

std::array<double, 2> Stream::normal_pair(std::uint32_t block) const noexcept {
    const auto u = uniform_pair(block);
    const double radius = std::sqrt(-2.0 * std::log(u[0]));
    const double angle = 2.0 * std::numbers::pi * u[1];
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

void Stream::normals(std::span<double> out) const noexcept {
    for (std::size_t k = 0; k < out.size(); k += 2) {
        const auto z = normal_pair(static_cast<std::uint32_t>(k / 2));
        out[k] = z[0];
        if (k + 1 < out.size()) out[k + 1] = z[1];
    }
}

void Stream::uniforms(std::span<double> out) const noexcept {
    for (std::size_t k = 0; k < out.size(); k += 2) {
        const auto u = uniform_pair(static_cast<std::uint32_t>(k / 2));
        out[k] = u[0];
        if (k + 1 < out.size()) out[k + 1] = u[1];
    }
}

}  // namespace mfl
