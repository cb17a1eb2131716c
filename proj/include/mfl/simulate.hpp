#pragma once

// Euler-Maruyama simulation of the N-particle system, synchronous couplings,
// reference measure flows and closed-form McKean-OU moments.

#include "mfl/models.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mfl {

/// Uniform grid 0 = t_0 < ... < t_m = T.
class TimeGrid {
public:
    TimeGrid() = default;
    TimeGrid(double horizon, std::size_t steps);

    [[nodiscard]] double horizon() const noexcept { return horizon_; }
    [[nodiscard]] std::size_t steps() const noexcept { return steps_; }
    [[nodiscard]] double dt() const noexcept { return horizon_ / static_cast<double>(steps_); }
    [[nodiscard]] double time(std::size_t j) const noexcept {
        return j == steps_ ? horizon_ : static_cast<double>(j) * dt();
    }
    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    double horizon_ = 1.0;
    std::size_t steps_ = 1;
};

/// Initial law mu_0 with i.i.d. coordinates.
struct InitialLaw {
    enum class Kind { point, gaussian, uniform };
    Kind kind = Kind::point;
    double a = 0.0;  // point location, gaussian mean, or uniform lower end
    double b = 0.0;  // gaussian variance or uniform upper end

    static InitialLaw point(double x) { return {Kind::point, x, 0.0}; }
    static InitialLaw gaussian(double mean, double variance);
    static InitialLaw uniform(double lo, double hi);

    [[nodiscard]] double mean() const noexcept;
    [[nodiscard]] double variance() const noexcept;
    [[nodiscard]] std::string describe() const;
};

/// N particles observed on a grid; storage is step-major, x(i, j, k) at (j*N + i)*d + k.
class ParticlePaths {
public:
    ParticlePaths() = default;
    ParticlePaths(std::size_t particles, TimeGrid grid, std::size_t dim);

    [[nodiscard]] std::size_t particles() const noexcept { return particles_; }
    [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::size_t steps() const noexcept { return grid_.steps(); }

    [[nodiscard]] double& at(std::size_t i, std::size_t j, std::size_t k = 0) {
        return data_[(j * particles_ + i) * dim_ + k];
    }
    [[nodiscard]] double at(std::size_t i, std::size_t j, std::size_t k = 0) const {
        return data_[(j * particles_ + i) * dim_ + k];
    }
    [[nodiscard]] std::span<const double> position(std::size_t i, std::size_t j) const {
        return {data_.data() + (j * particles_ + i) * dim_, dim_};
    }
    /// All particle positions at step j (N * d values).
    [[nodiscard]] std::span<const double> slice(std::size_t j) const {
        return {data_.data() + j * particles_ * dim_, particles_ * dim_};
    }
    [[nodiscard]] std::span<double> slice(std::size_t j) {
        return {data_.data() + j * particles_ * dim_, particles_ * dim_};
    }
    [[nodiscard]] EmpiricalMeasure measure(std::size_t j) const;
    [[nodiscard]] const std::vector<double>& data() const noexcept { return data_; }

    /// Keep every `factor`-th grid time (steps must be divisible by factor).
    [[nodiscard]] ParticlePaths subsample(std::size_t factor) const;
    /// Reorder particles: new particle i is old particle perm[i].
    [[nodiscard]] ParticlePaths permuted(std::span<const std::size_t> perm) const;

    // Provenance metadata.
    std::uint64_t seed = 0;
    std::string model_tag;
    std::vector<double> theta;

    friend bool operator==(const ParticlePaths& a, const ParticlePaths& b) {
        return a.particles_ == b.particles_ && a.grid_ == b.grid_ && a.dim_ == b.dim_ && a.data_ == b.data_;
    }

private:
    std::size_t particles_ = 0;
    TimeGrid grid_;
    std::size_t dim_ = 1;
    std::vector<double> data_;
};

/// One empirical measure per grid time, used as a proxy for the mean-field law.
struct MeasureFlow {
    TimeGrid grid;
    std::vector<EmpiricalMeasure> measures;
};

/// Mean-field McKean-OU law parameters; sigma is the constant diffusion.
struct OUMoments {
    ParamVector theta;
    double mean0 = 0.0;
    double var0 = 0.0;
    double sigma = 1.0;
};

[[nodiscard]] ParticlePaths simulate_particles(const DriftModel& model, const ParamVector& theta,
                                               std::size_t particles, const TimeGrid& grid,
                                               const InitialLaw& init, std::uint64_t seed);

/// n draws from the initial law on the same streams simulate_particles uses (particle-major).
[[nodiscard]] std::vector<double> sample_initial(const InitialLaw& init, std::size_t n, std::size_t dim,
                                                 std::uint64_t seed);

/// Two systems driven by identical initial positions and Brownian increments.
[[nodiscard]] std::pair<ParticlePaths, ParticlePaths> coupled_simulate(const DriftModel& model,
                                                                       const ParamVector& theta,
                                                                       const ParamVector& theta_prime,
                                                                       std::size_t particles, const TimeGrid& grid,
                                                                       const InitialLaw& init, std::uint64_t seed);

/// Large-cloud approximation of mu_t^theta; min_atoms is the configurable floor on N_ref.
[[nodiscard]] MeasureFlow reference_flow(const DriftModel& model, const ParamVector& theta,
                                         std::size_t reference_atoms, const TimeGrid& grid,
                                         const InitialLaw& init, std::uint64_t seed,
                                         std::size_t min_atoms = 1000);

/// Independent particles driven by b(theta; t, x, flow_t) with the same random streams as
/// simulate_particles (a synchronous coupling with the interacting system).
[[nodiscard]] ParticlePaths simulate_product(const DriftModel& model, const ParamVector& theta,
                                             std::size_t particles, const TimeGrid& grid, const InitialLaw& init,
                                             std::uint64_t seed, const MeasureFlow& flow);

/// Mean of the McKean-OU law: -t2/t1 + (m0 + t2/t1) exp(t1 t).
[[nodiscard]] double ou_mean(const OUMoments& mom, double t);
/// Variance of the McKean-OU law: e^{2at} Var0 + sigma^2 (e^{2at} - 1)/(2a), a = t1 - t3.
[[nodiscard]] double ou_variance(const OUMoments& mom, double t);
/// Second moment: ou_variance + ou_mean^2.
[[nodiscard]] double ou_second_moment(const OUMoments& mom, double t);

}  // namespace mfl
