#include "mfl/diagnostics.hpp"

#include "mfl/error.hpp"
#include "mfl/parallel.hpp"
#include "mfl/rng.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace mfl {

namespace {

std::uint64_t level_seed(std::uint64_t seed, std::size_t level, std::size_t replication) {
    return derive_seed(seed, {stream_tag::replication, 1000000 + level, replication});
}

/// Largest s >= 0 with theta + s * dir inside the box.
double max_feasible_scale(const ParamBox& box, const Vec& theta, const Vec& dir) {
    double s = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
        if (dir(k) > 0.0) s = std::min(s, (box.upper()(k) - theta(k)) / dir(k));
        if (dir(k) < 0.0) s = std::min(s, (box.lower()(k) - theta(k)) / dir(k));
    }
    return std::max(s, 0.0);
}

Vec unit_direction(std::uint64_t seed, std::size_t index, std::size_t p) {
    std::vector<double> z(p);
    Stream(derive_stream(seed, {stream_tag::directions, index})).normals(z);
    Vec v = Eigen::Map<const Vec>(z.data(), static_cast<Eigen::Index>(p));
    const double n = v.norm();
    return n > 0.0 ? Vec(v / n) : Vec(Vec::Unit(static_cast<Eigen::Index>(p), 0));
}

/// First nonzero component positive.
Vec canonical_sign(Vec z) {
    for (Eigen::Index k = 0; k < z.size(); ++k) {
        if (std::abs(z(k)) > 1e-14) return z(k) < 0.0 ? Vec(-z) : z;
    }
    return z;
}

}  // namespace

std::uint64_t replication_seed(std::uint64_t seed, std::size_t replication) {
    return derive_seed(seed, {stream_tag::replication, replication});
}

FisherMatrix limit_information(const SimulationSetup& setup, std::size_t reference_atoms) {
    if (setup.model.family() == Family::mckean_ou) {
        return ou_limit_fisher({setup.theta, setup.init.mean(), setup.init.variance(),
                                setup.model.diffusion().scalar_sigma()},
                               setup.grid);
    }
    const MeasureFlow flow = reference_flow(setup.model, setup.theta, reference_atoms, setup.grid, setup.init,
                                            derive_seed(setup.seed, {stream_tag::reference}));
    return limit_fisher(setup.model, setup.theta, flow);
}

LanReport lan_experiment(const SimulationSetup& setup, const Vec& u, const FisherMatrix& info) {
    const std::size_t p = setup.model.num_params();
    if (static_cast<std::size_t>(u.size()) != p || info.size() != p) throw ShapeError("lan_experiment: u and I must match p");
    if (setup.replications < 2) throw DomainError("lan_experiment needs at least 2 replications");
    setup.model.require_valid(setup.theta);

    LanReport rep;
    rep.u = u;
    const double u2 = u.squaredNorm();
    rep.predicted_mean = -0.5 * u2;
    rep.predicted_variance = u2;
    const std::size_t r_count = setup.replications;
    if (u2 == 0.0) {
        rep.zeta.assign(r_count, 0.0);
        rep.degenerate = true;
        rep.mean_pass = true;
        rep.ks_pass = true;
        return rep;
    }

    const Mat root = symmetric_inverse_sqrt(info.values);
    const double sqrt_n = std::sqrt(static_cast<double>(setup.particles));
    const Vec shift = root * u / sqrt_n;
    const Vec theta_prime = setup.theta.vec() + shift;
    if (!setup.model.box().contains(theta_prime)) {
        const double s = max_feasible_scale(setup.model.box(), setup.theta.vec(), shift);
        std::ostringstream os;
        os << "local parameter theta + (N I)^{-1/2} u leaves the box; max feasible |u| along this direction is "
           << s * std::sqrt(u2);
        throw DomainError(os.str());
    }
    const ParamVector local(theta_prime);

    rep.zeta.assign(r_count, 0.0);
    parallel_for(r_count, setup.threads, [&](std::size_t r) {
        const ParticlePaths paths = simulate_particles(setup.model, setup.theta, setup.particles, setup.grid,
                                                       setup.init, replication_seed(setup.seed, r));
        rep.zeta[r] = log_likelihood_ratio(setup.model, setup.theta, local, paths);
    });
    rep.mean = mean(rep.zeta);
    rep.variance = sample_variance(rep.zeta);
    const double un = std::sqrt(u2);
    std::vector<double> standardized(r_count);
    for (std::size_t r = 0; r < r_count; ++r) standardized[r] = (rep.zeta[r] + 0.5 * u2) / un;
    rep.mean_pass = std::abs(rep.mean + 0.5 * u2) <= 3.0 * un / std::sqrt(static_cast<double>(r_count));
    if (r_count >= 8) {
        const KsResult ks = ks_test_normal(standardized);
        rep.ks_statistic = ks.statistic;
        rep.ks_p_value = ks.p_value;
        rep.ks_pass = ks.p_value >= 0.01;
    }
    return rep;
}

NormalityReport normality_experiment(const SimulationSetup& setup, const FisherMatrix& info,
                                     const NormalityOptions& options) {
    const std::size_t p = setup.model.num_params();
    if (info.size() != p) throw ShapeError("normality_experiment: Fisher matrix size differs from p");
    if (info.degenerate()) {
        throw DomainError("precondition failure: Fisher information is degenerate at theta* (det = " +
                          std::to_string(info.determinant()) + ")");
    }
    setup.model.require_valid(setup.theta);
    const std::size_t r_count = setup.replications;
    std::vector<std::optional<EstimateResult>> est(r_count);
    parallel_for(r_count, setup.threads, [&](std::size_t r) {
        const std::uint64_t s = replication_seed(setup.seed, r);
        try {
            const ParticlePaths paths =
                simulate_particles(setup.model, setup.theta, setup.particles, setup.grid, setup.init, s);
            EstimateResult e;
            if (options.method == EstimateMethod::linear_solve) {
                e = mle_linear(setup.model, paths);
            } else {
                MultiStartOptions ms = options.multistart;
                ms.seed = derive_seed(s, {stream_tag::multistart});
                ms.threads = 1;
                e = mle_numeric(setup.model, paths, setup.theta, ms);
            }
            if (e.converged) est[r] = std::move(e);
        } catch (const Error&) {
            est[r].reset();
        }
    });

    NormalityReport rep;
    for (std::size_t r = 0; r < r_count; ++r) {
        if (!est[r]) {
            ++rep.failures;
            continue;
        }
        rep.replication.push_back(r);
        rep.estimates.push_back(*est[r]);
    }
    if (static_cast<double>(rep.failures) > 0.2 * static_cast<double>(r_count)) {
        throw Error(ErrorCode::non_convergence, "normality_experiment: " + std::to_string(rep.failures) + " of " +
                                                    std::to_string(r_count) + " replications failed estimation");
    }
    const std::size_t ok = rep.estimates.size();
    rep.errors.resize(static_cast<Eigen::Index>(ok), static_cast<Eigen::Index>(p));
    for (std::size_t k = 0; k < ok; ++k) {
        rep.errors.row(static_cast<Eigen::Index>(k)) =
            standardized_error(rep.estimates[k].theta_hat.vec(), setup.theta.vec(), setup.particles, info)
                .transpose();
    }
    rep.ks_pass = ok >= 8;
    for (std::size_t c = 0; c < p && ok >= 8; ++c) {
        const Vec col = rep.errors.col(static_cast<Eigen::Index>(c));
        rep.ks.push_back(ks_test_normal({col.data(), ok}));
        if (rep.ks.back().p_value < options.ks_level) rep.ks_pass = false;
    }
    if (ok >= 2) {
        rep.covariance = sample_covariance(rep.errors);
        rep.covariance_error = (rep.covariance - Mat::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p))).norm() /
                               std::sqrt(static_cast<double>(p));
        rep.covariance_pass = rep.covariance_error <= options.covariance_tolerance;
    }
    return rep;
}

RiskReport risk_experiment(const SimulationSetup& setup, const FisherMatrix& info, const LossSpec& loss,
                           const NormalityOptions& options) {
    RiskReport rep;
    rep.loss = loss;
    rep.gaussian_bound = gaussian_risk(loss, setup.model.num_params());
    rep.normality = normality_experiment(setup, info, options);
    const auto rows = rep.normality.errors.rows();
    for (Eigen::Index k = 0; k < rows; ++k) rep.losses.push_back(evaluate_loss(loss, rep.normality.errors.row(k).transpose()));
    rep.empirical_risk = mean(rep.losses);
    rep.standard_error = rep.losses.size() >= 2 ? std::sqrt(sample_variance(rep.losses) / static_cast<double>(rep.losses.size())) : 0.0;
    rep.ratio = rep.empirical_risk / rep.gaussian_bound;
    return rep;
}

NondegeneracyVerdict nondegeneracy_t0(const DriftModel& model, const ParamBox& box,
                                      const EmpiricalMeasure& initial_sample, const NondegeneracyOptions& options) {
    const std::size_t p = model.num_params();
    const std::size_t d = model.dim();
    if (box.size() != p) throw ShapeError("nondegeneracy_t0: box size differs from p");
    if (initial_sample.dim() != d) throw ShapeError("nondegeneracy_t0: sample dimension differs from model");

    // Segments: all box edges, then uniform random pairs.
    std::vector<std::pair<Vec, Vec>> pairs;
    if (options.include_edges) {
        for (std::size_t k = 0; k < p; ++k) {
            for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (p - 1)); ++mask) {
                Vec a(static_cast<Eigen::Index>(p));
                std::size_t bit = 0;
                for (std::size_t c = 0; c < p; ++c) {
                    const auto cc = static_cast<Eigen::Index>(c);
                    if (c == k) continue;
                    a(cc) = ((mask >> bit) & 1U) ? box.upper()(cc) : box.lower()(cc);
                    ++bit;
                }
                Vec b = a;
                a(static_cast<Eigen::Index>(k)) = box.lower()(static_cast<Eigen::Index>(k));
                b(static_cast<Eigen::Index>(k)) = box.upper()(static_cast<Eigen::Index>(k));
                pairs.emplace_back(a, b);
            }
        }
    }
    for (std::size_t r = 0; r < options.random_pairs; ++r) {
        std::vector<double> u(2 * p);
        Stream(derive_stream(options.seed, {stream_tag::directions, 1u << 20, r})).uniforms(u);
        Vec a(static_cast<Eigen::Index>(p));
        Vec b(static_cast<Eigen::Index>(p));
        for (std::size_t c = 0; c < p; ++c) {
            const auto cc = static_cast<Eigen::Index>(c);
            const double w = box.upper()(cc) - box.lower()(cc);
            a(cc) = box.lower()(cc) + u[c] * w;
            b(cc) = box.lower()(cc) + u[p + c] * w;
        }
        pairs.emplace_back(a, b);
    }

    std::vector<Vec> directions;
    for (std::size_t k = 0; k < options.directions; ++k) directions.push_back(unit_direction(options.seed, k, p));

    // x-grid along the diagonal direction through the sample mean, spanning the support +- 3 SD.
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    Vec diag = Vec::Constant(static_cast<Eigen::Index>(d), 1.0 / std::sqrt(static_cast<double>(d)));
    const Vec& mean0 = initial_sample.mean();
    for (std::size_t j = 0; j < initial_sample.size(); ++j) {
        const auto y = initial_sample.atom(j);
        double proj = 0.0;
        for (std::size_t k = 0; k < d; ++k) proj += (y[k] - mean0(static_cast<Eigen::Index>(k))) * diag(static_cast<Eigen::Index>(k));
        lo = std::min(lo, proj);
        hi = std::max(hi, proj);
    }
    double sd = std::sqrt(initial_sample.variance());
    if (sd == 0.0) sd = 1.0;
    lo -= 3.0 * sd;
    hi += 3.0 * sd;
    const std::size_t nx = std::max<std::size_t>(options.x_points, 2);
    std::vector<std::vector<double>> xs(nx, std::vector<double>(d));
    for (std::size_t a = 0; a < nx; ++a) {
        const double s = lo + (hi - lo) * static_cast<double>(a) / static_cast<double>(nx - 1);
        for (std::size_t k = 0; k < d; ++k) {
            xs[a][k] = mean0(static_cast<Eigen::Index>(k)) + s * diag(static_cast<Eigen::Index>(k));
        }
    }

    // 16-point Gauss-Legendre on [0, 1].
    using GL = boost::math::quadrature::gauss<double, 16>;
    std::vector<double> nodes;
    std::vector<double> weights;
    for (std::size_t k = 0; k < GL::abscissa().size(); ++k) {
        const double x = GL::abscissa()[k];
        const double w = GL::weights()[k];
        nodes.push_back(0.5 * (1.0 + x));
        weights.push_back(0.5 * w);
        if (x != 0.0) {
            nodes.push_back(0.5 * (1.0 - x));
            weights.push_back(0.5 * w);
        }
    }

    const Mat& cis = model.diffusion().c_inv_sqrt();
    NondegeneracyVerdict verdict;
    verdict.min_max_value = std::numeric_limits<double>::infinity();
    Vec b(static_cast<Eigen::Index>(d));
    Mat grad;
    for (const auto& [ta, tb] : pairs) {
        std::vector<Mat> v(nx, Mat::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(p)));
        for (std::size_t q = 0; q < nodes.size(); ++q) {
            const Vec th = ta + nodes[q] * (tb - ta);
            for (std::size_t a = 0; a < nx; ++a) {
                model.evaluate_with_gradient(th, 0.0, xs[a], initial_sample, {b.data(), d}, grad);
                v[a] += weights[q] * cis * grad;
            }
        }
        Mat gram = Mat::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
        for (const auto& va : v) gram += va.transpose() * va;
        Eigen::SelfAdjointEigenSolver<Mat> eig(gram);
        std::vector<Vec> zs = directions;
        zs.push_back(canonical_sign(eig.eigenvectors().col(0)));
        for (const Vec& z : zs) {
            double best = 0.0;
            for (const auto& va : v) best = std::max(best, (va * z).squaredNorm());
            ++verdict.directions_checked;
            if (best < verdict.min_max_value) {
                verdict.min_max_value = best;
                verdict.theta = ta;
                verdict.theta_prime = tb;
                verdict.z = z;
            }
        }
        ++verdict.pairs_checked;
    }
    verdict.nondegenerate = verdict.min_max_value > options.threshold;
    return verdict;
}

double double_layer_fourier_factor(const Vec& theta, std::size_t dim, double xi_norm) {
    if (theta.size() != 4 || theta.minCoeff() <= 0.0) {
        throw DomainError("double-layer Fourier transform needs four positive parameters");
    }
    const double hd = 0.5 * static_cast<double>(dim);
    const double r2 = xi_norm * xi_norm;
    return std::pow(std::numbers::pi, hd) * (theta(0) * std::pow(theta(1), -hd) * std::exp(-r2 / (4.0 * theta(1))) -
                                             theta(2) * std::pow(theta(3), -hd) * std::exp(-r2 / (4.0 * theta(3))));
}

double identifiability_fourier_check(const Vec& theta, const Vec& theta_prime, std::size_t dim,
                                     std::span<const double> xi_grid) {
    if (dim == 0) throw DomainError("dimension must be positive");
    double gap = 0.0;
    for (double r : xi_grid) {
        const double diff = double_layer_fourier_factor(theta, dim, r) - double_layer_fourier_factor(theta_prime, dim, r);
        gap = std::max(gap, std::abs(r) * std::abs(diff));
    }
    return gap;
}

RateReport chaos_rate(const SimulationSetup& setup, const ChaosOptions& options) {
    auto levels = options.levels;
    if (levels.size() < 3) throw DomainError("chaos_rate needs at least 3 N levels");
    for (std::size_t k = 0; k < levels.size(); ++k) {
        if (levels[k] < 2 || (k > 0 && levels[k] <= levels[k - 1])) {
            throw DomainError("chaos_rate: levels must be strictly increasing and at least 2 (degenerate levels)");
        }
    }
    const std::size_t max_n = levels.back();
    RateReport rep;
    rep.levels = levels;
    rep.reference_atoms = options.reference_atoms == 0 ? 10 * max_n : options.reference_atoms;
    const DriftModel& model = setup.model;
    const std::size_t d = model.dim();
    const std::size_t last = setup.grid.steps();

    std::optional<MeasureFlow> flow;
    std::vector<double> reference_terminal;
    const bool exact = d == 1 && model.family() == Family::mckean_ou && options.exact_ou_reference;
    rep.exact_reference = exact;
    rep.coupling_bound = d > 1;
    if (!exact) {
        flow = reference_flow(model, setup.theta, rep.reference_atoms, setup.grid, setup.init,
                              derive_seed(setup.seed, {stream_tag::reference}), 1);
        const auto atoms = flow->measures[last].atoms();
        reference_terminal.assign(atoms.begin(), atoms.end());
    }
    double m_t = 0.0;
    double sd_t = 0.0;
    if (exact) {
        const OUMoments mom{setup.theta, setup.init.mean(), setup.init.variance(), model.diffusion().scalar_sigma()};
        m_t = ou_mean(mom, setup.grid.horizon());
        sd_t = std::sqrt(ou_variance(mom, setup.grid.horizon()));
    }

    rep.distances.assign(levels.size(), std::vector<double>(setup.replications, 0.0));
    for (std::size_t l = 0; l < levels.size(); ++l) {
        const std::size_t n = levels[l];
        std::vector<double> quantiles;
        if (exact) {
            quantiles.resize(n);
            for (std::size_t k = 0; k < n; ++k) {
                quantiles[k] = m_t + sd_t * standard_normal_quantile((static_cast<double>(k) + 0.5) / static_cast<double>(n));
            }
        }
        parallel_for(setup.replications, setup.threads, [&](std::size_t r) {
            const std::uint64_t s = level_seed(setup.seed, l, r);
            const ParticlePaths paths = simulate_particles(model, setup.theta, n, setup.grid, setup.init, s);
            const auto terminal = paths.slice(last);
            double dist = 0.0;
            if (exact) {
                dist = wasserstein1_1d(terminal, quantiles);
            } else if (d == 1) {
                dist = wasserstein1_1d_cdf(terminal, reference_terminal);
            } else {
                const ParticlePaths limit = simulate_product(model, setup.theta, n, setup.grid, setup.init, s, *flow);
                const auto lt = limit.slice(last);
                for (std::size_t i = 0; i < n; ++i) {
                    double sq = 0.0;
                    for (std::size_t k = 0; k < d; ++k) sq += (terminal[i * d + k] - lt[i * d + k]) * (terminal[i * d + k] - lt[i * d + k]);
                    dist += std::sqrt(sq);
                }
                dist /= static_cast<double>(n);
            }
            rep.distances[l][r] = dist;
        });
        rep.median_distance.push_back(median(rep.distances[l]));
    }
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t l = 0; l < levels.size(); ++l) {
        if (!(rep.median_distance[l] > 0.0)) throw DomainError("chaos_rate: zero median distance at a level (degenerate levels)");
        lx.push_back(std::log(static_cast<double>(levels[l])));
        ly.push_back(std::log(rep.median_distance[l]));
    }
    rep.fit = fit_line(lx, ly);
    return rep;
}

KlReport kl_proxy(const SimulationSetup& setup, std::size_t reference_atoms) {
    const DriftModel& model = setup.model;
    if (!model.linear_in_measure()) throw UnsupportedError("kl_proxy needs a drift linear in the measure argument");
    model.require_valid(setup.theta);
    const std::size_t atoms = reference_atoms == 0 ? 10 * setup.particles : reference_atoms;
    return kl_proxy(setup, reference_flow(model, setup.theta, atoms, setup.grid, setup.init,
                                          derive_seed(setup.seed, {stream_tag::reference}), 1));
}

KlReport kl_proxy(const SimulationSetup& setup, const MeasureFlow& flow) {
    const DriftModel& model = setup.model;
    if (!model.linear_in_measure()) throw UnsupportedError("kl_proxy needs a drift linear in the measure argument");
    model.require_valid(setup.theta);
    if (!(flow.grid == setup.grid) || flow.measures.size() != setup.grid.steps() + 1) {
        throw ShapeError("kl_proxy: reference flow grid differs from the experiment grid");
    }
    KlReport rep;
    rep.reference_atoms = flow.measures.front().size();
    const std::size_t d = model.dim();
    const Mat& cis = model.diffusion().c_inv_sqrt();
    const double dt = setup.grid.dt();
    rep.values.assign(setup.replications, 0.0);
    parallel_for(setup.replications, setup.threads, [&](std::size_t r) {
        const ParticlePaths paths = simulate_product(model, setup.theta, setup.particles, setup.grid, setup.init,
                                                     replication_seed(setup.seed, r), flow);
        Vec b1(static_cast<Eigen::Index>(d));
        Vec b2(static_cast<Eigen::Index>(d));
        std::vector<double> per_particle(setup.particles, 0.0);
        for (std::size_t j = 0; j < setup.grid.steps(); ++j) {
            const double t = setup.grid.time(j);
            const EmpiricalMeasure nu = paths.measure(j);
            for (std::size_t i = 0; i < setup.particles; ++i) {
                const auto x = paths.position(i, j);
                model.evaluate(setup.theta.vec(), t, x, nu, {b1.data(), d});
                model.evaluate(setup.theta.vec(), t, x, flow.measures[j], {b2.data(), d});
                per_particle[i] += 0.5 * (cis * (b1 - b2)).squaredNorm() * dt;
            }
        }
        rep.values[r] = pairwise_sum(per_particle);
    });
    rep.estimate = mean(rep.values);
    rep.standard_error =
        setup.replications >= 2 ? std::sqrt(sample_variance(rep.values) / static_cast<double>(setup.replications)) : 0.0;
    return rep;
}

FisherConvergenceReport fisher_convergence(const SimulationSetup& setup, const std::vector<std::size_t>& levels,
                                           const FisherMatrix& limit) {
    FisherConvergenceReport rep;
    rep.levels = levels;
    rep.limit = limit;
    for (std::size_t l = 0; l < levels.size(); ++l) {
        std::vector<double> err(setup.replications, 0.0);
        parallel_for(setup.replications, setup.threads, [&](std::size_t r) {
            const ParticlePaths paths = simulate_particles(setup.model, setup.theta, levels[l], setup.grid,
                                                           setup.init, level_seed(setup.seed, l, r));
            const FisherMatrix f = empirical_fisher(setup.model, setup.theta, paths);
            err[r] = (f.values - limit.values).norm();
        });
        rep.median_error.push_back(median(err));
        rep.errors.push_back(std::move(err));
    }
    return rep;
}

}  // namespace mfl
