#include "mfl/simulate.hpp"

#include "mfl/error.hpp"
#include "mfl/rng.hpp"

#include <cmath>
#include <optional>
#include <sstream>

namespace mfl {

namespace {

void draw_initial(const InitialLaw& init, std::uint64_t seed, std::size_t particle, std::span<double> out) {
    switch (init.kind) {
        case InitialLaw::Kind::point:
            for (auto& v : out) v = init.a;
            return;
        case InitialLaw::Kind::gaussian: {
            Stream(derive_stream(seed, {stream_tag::initial, particle})).normals(out);
            const double sd = std::sqrt(init.b);
            for (auto& v : out) v = init.a + sd * v;
            return;
        }
        case InitialLaw::Kind::uniform: {
            Stream(derive_stream(seed, {stream_tag::initial, particle})).uniforms(out);
            for (auto& v : out) v = init.a + (init.b - init.a) * v;
            return;
        }
    }
}

/// Euler-Maruyama; measure_at(j, paths) returns the measure entering the drift at step j.
template <class MeasureAt>
ParticlePaths run_euler(const DriftModel& model, const ParamVector& theta, std::size_t particles,
                        const TimeGrid& grid, const InitialLaw& init, std::uint64_t seed, MeasureAt&& measure_at) {
    model.require_valid(theta);
    if (particles == 0) throw DomainError("particle count must be at least 1");
    const std::size_t d = model.dim();
    ParticlePaths paths(particles, grid, d);
    paths.seed = seed;
    paths.model_tag = model.tag();
    paths.theta.assign(theta.vec().data(), theta.vec().data() + theta.size());

    for (std::size_t i = 0; i < particles; ++i) {
        draw_initial(init, seed, i, {&paths.at(i, 0), d});
    }

    const DiffusionSpec& diff = model.diffusion();
    const bool scalar = diff.is_scalar();
    const double dt = grid.dt();
    const double sqdt = std::sqrt(dt);
    std::vector<double> drift(d);
    std::vector<double> z(d);
    Vec zv(static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < grid.steps(); ++j) {
        const double t = grid.time(j);
        const EmpiricalMeasure& nu = measure_at(j, paths);
        for (std::size_t i = 0; i < particles; ++i) {
            const auto x = paths.position(i, j);
            model.evaluate(theta.vec(), t, x, nu, drift);
            Stream(derive_stream(seed, {stream_tag::noise, i, j})).normals(z);
            double* next = &paths.at(i, j + 1);
            if (scalar) {
                const double s = diff.scalar_sigma() * sqdt;
                for (std::size_t k = 0; k < d; ++k) next[k] = x[k] + drift[k] * dt + s * z[k];
            } else {
                for (std::size_t k = 0; k < d; ++k) zv(static_cast<Eigen::Index>(k)) = z[k];
                const Vec noise = diff.sigma() * zv * sqdt;
                for (std::size_t k = 0; k < d; ++k) {
                    next[k] = x[k] + drift[k] * dt + noise(static_cast<Eigen::Index>(k));
                }
            }
            for (std::size_t k = 0; k < d; ++k) {
                if (!std::isfinite(next[k])) throw BlowUpError(j + 1, i);
            }
        }
    }
    return paths;
}

}  // namespace

TimeGrid::TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("time horizon must be positive and finite");
    if (steps == 0) throw DomainError("grid needs at least one step");
}

InitialLaw InitialLaw::gaussian(double mean, double variance) {
    if (!(variance >= 0.0) || !std::isfinite(mean) || !std::isfinite(variance)) {
        throw DomainError("gaussian initial law needs finite mean and nonnegative variance");
    }
    return {Kind::gaussian, mean, variance};
}

InitialLaw InitialLaw::uniform(double lo, double hi) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw DomainError("uniform initial law needs finite a < b");
    }
    return {Kind::uniform, lo, hi};
}

double InitialLaw::mean() const noexcept {
    return kind == Kind::uniform ? 0.5 * (a + b) : a;
}

double InitialLaw::variance() const noexcept {
    switch (kind) {
        case Kind::point: return 0.0;
        case Kind::gaussian: return b;
        case Kind::uniform: return (b - a) * (b - a) / 12.0;
    }
    return 0.0;
}

std::string InitialLaw::describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind) {
        case Kind::point: os << "point(" << a << ")"; break;
        case Kind::gaussian: os << "gaussian(" << a << "," << b << ")"; break;
        case Kind::uniform: os << "uniform(" << a << "," << b << ")"; break;
    }
    return os.str();
}

ParticlePaths::ParticlePaths(std::size_t particles, TimeGrid grid, std::size_t dim)
    : particles_(particles), grid_(grid), dim_(dim), data_(particles * (grid.steps() + 1) * dim, 0.0) {}

EmpiricalMeasure ParticlePaths::measure(std::size_t j) const {
    const auto s = slice(j);
    return EmpiricalMeasure(std::vector<double>(s.begin(), s.end()), dim_);
}

ParticlePaths ParticlePaths::subsample(std::size_t factor) const {
    if (factor == 0 || steps() % factor != 0) throw ShapeError("subsample factor must divide the step count");
    ParticlePaths out(particles_, TimeGrid(grid_.horizon(), steps() / factor), dim_);
    for (std::size_t j = 0; j <= out.steps(); ++j) {
        const auto src = slice(j * factor);
        std::copy(src.begin(), src.end(), out.slice(j).begin());
    }
    out.seed = seed;
    out.model_tag = model_tag;
    out.theta = theta;
    return out;
}

ParticlePaths ParticlePaths::permuted(std::span<const std::size_t> perm) const {
    if (perm.size() != particles_) throw ShapeError("permutation length differs from particle count");
    ParticlePaths out = *this;
    for (std::size_t j = 0; j <= steps(); ++j) {
        for (std::size_t i = 0; i < particles_; ++i) {
            for (std::size_t k = 0; k < dim_; ++k) out.at(i, j, k) = at(perm[i], j, k);
        }
    }
    return out;
}

ParticlePaths simulate_particles(const DriftModel& model, const ParamVector& theta, std::size_t particles,
                                 const TimeGrid& grid, const InitialLaw& init, std::uint64_t seed) {
    std::optional<EmpiricalMeasure> current;
    return run_euler(model, theta, particles, grid, init, seed,
                     [&](std::size_t j, const ParticlePaths& p) -> const EmpiricalMeasure& {
                         current.emplace(p.measure(j));
                         return *current;
                     });
}

std::vector<double> sample_initial(const InitialLaw& init, std::size_t n, std::size_t dim, std::uint64_t seed) {
    std::vector<double> out(n * dim);
    for (std::size_t i = 0; i < n; ++i) draw_initial(init, seed, i, {&out[i * dim], dim});
    return out;
}

std::pair<ParticlePaths, ParticlePaths> coupled_simulate(const DriftModel& model, const ParamVector& theta,
                                                         const ParamVector& theta_prime, std::size_t particles,
                                                         const TimeGrid& grid, const InitialLaw& init,
                                                         std::uint64_t seed) {
    model.require_valid(theta_prime);
    return {simulate_particles(model, theta, particles, grid, init, seed),
            simulate_particles(model, theta_prime, particles, grid, init, seed)};
}

MeasureFlow reference_flow(const DriftModel& model, const ParamVector& theta, std::size_t reference_atoms,
                           const TimeGrid& grid, const InitialLaw& init, std::uint64_t seed,
                           std::size_t min_atoms) {
    if (reference_atoms < min_atoms) {
        throw DomainError("reference flow needs at least " + std::to_string(min_atoms) + " atoms");
    }
    const ParticlePaths cloud = simulate_particles(model, theta, reference_atoms, grid, init, seed);
    MeasureFlow flow{grid, {}};
    flow.measures.reserve(grid.steps() + 1);
    for (std::size_t j = 0; j <= grid.steps(); ++j) flow.measures.push_back(cloud.measure(j));
    return flow;
}

ParticlePaths simulate_product(const DriftModel& model, const ParamVector& theta, std::size_t particles,
                               const TimeGrid& grid, const InitialLaw& init, std::uint64_t seed,
                               const MeasureFlow& flow) {
    if (!(flow.grid == grid) || flow.measures.size() != grid.steps() + 1) {
        throw ShapeError("measure flow grid differs from simulation grid");
    }
    return run_euler(model, theta, particles, grid, init, seed,
                     [&](std::size_t j, const ParticlePaths&) -> const EmpiricalMeasure& { return flow.measures[j]; });
}

namespace {
void require_ou_theta(const OUMoments& mom) {
    if (mom.theta.size() != 3) throw ShapeError("McKean-OU moments need theta of length 3");
}
}  // namespace

double ou_mean(const OUMoments& mom, double t) {
    require_ou_theta(mom);
    const double t1 = mom.theta[0];
    const double t2 = mom.theta[1];
    if (t1 == 0.0) throw DomainError("ou_mean requires theta_1 != 0");
    return -t2 / t1 + (mom.mean0 + t2 / t1) * std::exp(t1 * t);
}

double ou_variance(const OUMoments& mom, double t) {
    require_ou_theta(mom);
    const double a = mom.theta[0] - mom.theta[2];
    if (a == 0.0) throw DomainError("ou_variance requires theta_1 != theta_3");
    const double growth = std::exp(2.0 * a * t);
    return growth * mom.var0 + mom.sigma * mom.sigma * std::expm1(2.0 * a * t) / (2.0 * a);
}

double ou_second_moment(const OUMoments& mom, double t) {
    const double m = ou_mean(mom, t);
    return ou_variance(mom, t) + m * m;
}

}  // namespace mfl
