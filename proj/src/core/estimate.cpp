#include "mfl/estimate.hpp"

#include "mfl/error.hpp"
#include "mfl/parallel.hpp"
#include "mfl/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace mfl {

namespace {

double condition_estimate(const Mat& a) {
    Eigen::SelfAdjointEigenSolver<Mat> eig(a, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

}  // namespace

std::string_view method_name(EstimateMethod m) {
    return m == EstimateMethod::linear_solve ? "linear_solve" : "quasi_newton";
}

NormalEquations assemble_normal_equations(const DriftModel& model, const ParticlePaths& paths) {
    if (!model.linear_in_theta()) {
        throw UnsupportedError("normal equations need a drift linear in theta (mckean_ou or gen_linear)");
    }
    if (paths.dim() != 1 || model.dim() != 1) throw ShapeError("normal equations are assembled for d = 1");
    const std::size_t n = paths.particles();
    const std::size_t p = model.num_params();
    const double dt = paths.grid().dt();
    const double inv_c = 1.0 / (model.diffusion().scalar_sigma() * model.diffusion().scalar_sigma());

    // Per-particle blocks: p*p entries of A, then p entries of B.
    const std::size_t width = p * p + p;
    std::vector<double> blocks(n * width, 0.0);
    for (std::size_t j = 1; j <= paths.steps(); ++j) {
        const double t = paths.grid().time(j - 1);
        const EmpiricalMeasure nu = paths.measure(j - 1);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = paths.at(i, j - 1);
            const double dx = paths.at(i, j) - x;
            const Vec phi = model.features(t, x, nu);
            double* blk = &blocks[i * width];
            for (std::size_t a = 0; a < p; ++a) {
                const double pa = phi(static_cast<Eigen::Index>(a));
                for (std::size_t c = 0; c < p; ++c) blk[a * p + c] += pa * phi(static_cast<Eigen::Index>(c)) * dt;
                blk[p * p + a] += pa * dx;
            }
        }
    }
    NormalEquations eq{Mat(p, p), Vec(p), n, paths.steps()};
    std::vector<double> column(n);
    for (std::size_t e = 0; e < width; ++e) {
        for (std::size_t i = 0; i < n; ++i) column[i] = blocks[i * width + e];
        const double v = pairwise_sum(column) * inv_c / static_cast<double>(n);
        if (e < p * p) {
            eq.a(static_cast<Eigen::Index>(e / p), static_cast<Eigen::Index>(e % p)) = v;
        } else {
            eq.b(static_cast<Eigen::Index>(e - p * p)) = v;
        }
    }
    eq.a = 0.5 * (eq.a + eq.a.transpose());
    return eq;
}

Vec solve_normal_equations(const NormalEquations& eq) {
    if (is_degenerate(eq.a)) {
        std::ostringstream os;
        os << "normal-equation matrix is degenerate: det = " << eq.a.determinant()
           << ", threshold = " << degeneracy_threshold(eq.a) << ", condition estimate = " << condition_estimate(eq.a);
        throw SingularError(os.str());
    }
    Eigen::LLT<Mat> llt(eq.a);
    if (llt.info() != Eigen::Success) {
        std::ostringstream os;
        os << "normal-equation matrix is not positive definite: det = " << eq.a.determinant()
           << ", condition estimate = " << condition_estimate(eq.a);
        throw SingularError(os.str());
    }
    return llt.solve(eq.b);
}

EstimateResult mle_linear(const DriftModel& model, const ParticlePaths& paths) {
    const NormalEquations eq = assemble_normal_equations(model, paths);
    const Vec raw = solve_normal_equations(eq);
    const ParamBox& box = model.box();
    const Vec clamped = box.project(raw);

    EstimateResult r;
    r.method = EstimateMethod::linear_solve;
    r.iterations = 1;
    r.theta_hat = ParamVector(clamped);
    r.boundary_active.assign(static_cast<std::size_t>(raw.size()), false);
    bool outside = false;
    for (Eigen::Index k = 0; k < raw.size(); ++k) {
        if (raw(k) != clamped(k)) {
            r.boundary_active[static_cast<std::size_t>(k)] = true;
            outside = true;
        }
    }
    r.converged = !outside;
    // score = N (B - A theta) in the c-scaled units used by eq.
    r.score_norm = (static_cast<double>(eq.particles) * (eq.b - eq.a * clamped)).norm();
    const double n = static_cast<double>(eq.particles);
    // loglik = N (theta^T B - theta^T A theta / 2)
    r.log_likelihood = n * (clamped.dot(eq.b) - 0.5 * clamped.dot(eq.a * clamped));
    return r;
}

std::vector<Vec> multistart_points(const ParamBox& box, const Vec& theta_init, std::size_t count,
                                   std::uint64_t seed) {
    std::vector<Vec> pts;
    if (count == 0) return pts;
    pts.push_back(box.project(theta_init));
    if (count > 1) pts.push_back(box.center());
    const auto p = static_cast<std::size_t>(box.size());
    const Vec center = box.center();
    const std::size_t n_corners = p >= 63 ? std::numeric_limits<std::size_t>::max() : (std::size_t{1} << p);
    // Random distinct corners, inset a quarter of the way to the center.
    std::vector<std::uint64_t> corners;
    for (std::uint64_t draw = 0; pts.size() < count && corners.size() < n_corners && draw < 64 * count; ++draw) {
        const StreamKey key = derive_stream(seed, {stream_tag::multistart, 0, draw});
        const std::uint64_t corner = key.lo % n_corners;
        if (std::find(corners.begin(), corners.end(), corner) != corners.end()) continue;
        corners.push_back(corner);
        Vec c(box.size());
        for (std::size_t k = 0; k < p; ++k) {
            const auto kk = static_cast<Eigen::Index>(k);
            c(kk) = ((corner >> k) & 1U) ? box.upper()(kk) : box.lower()(kk);
        }
        pts.push_back(center + 0.75 * (c - center));
        if (pts.size() >= count || corners.size() * 2 >= count) break;
    }
    for (std::uint64_t r = 0; pts.size() < count; ++r) {
        std::vector<double> u(p);
        Stream(derive_stream(seed, {stream_tag::multistart, 1, r})).uniforms(u);
        Vec x(box.size());
        for (std::size_t k = 0; k < p; ++k) {
            const auto kk = static_cast<Eigen::Index>(k);
            x(kk) = box.lower()(kk) + u[k] * (box.upper()(kk) - box.lower()(kk));
        }
        pts.push_back(x);
    }
    return pts;
}

EstimateResult mle_numeric(const DriftModel& model, const ParticlePaths& paths, const ParamVector& theta_init,
                           const MultiStartOptions& options) {
    model.require_valid(theta_init);
    const auto starts = multistart_points(model.box(), theta_init.vec(), std::max<std::size_t>(1, options.starts),
                                          options.seed);
    ObjectiveWithGradient objective = [&](const Vec& theta) {
        auto r = log_likelihood_and_score(model, ParamVector(theta), paths);
        return std::pair<double, Vec>{r.value, r.score};
    };
    std::vector<std::optional<BoxOptimizerResult>> results(starts.size());
    parallel_for(starts.size(), options.threads, [&](std::size_t s) {
        try {
            results[s] = maximize_in_box(objective, model.box(), starts[s], options.optimizer);
        } catch (const NumericError&) {
            results[s].reset();
        }
    });
    const double init_value = log_likelihood_discrete(model, theta_init, paths).value;

    // Best value wins; ties go to the lowest start index.
    std::size_t best = starts.size();
    for (std::size_t s = 0; s < starts.size(); ++s) {
        if (!results[s]) continue;
        if (best == starts.size() || results[s]->value > results[best]->value) best = s;
    }
    EstimateResult r;
    r.method = EstimateMethod::quasi_newton;
    if (best == starts.size()) {
        r.theta_hat = theta_init;
        r.converged = false;
        r.boundary_active.assign(theta_init.size(), false);
        r.log_likelihood = init_value;
        return r;
    }
    const auto& b = *results[best];
    r.theta_hat = ParamVector(b.x);
    r.iterations = b.iterations;
    r.boundary_active = b.at_bound;
    r.log_likelihood = b.value;
    r.score_norm = b.gradient.norm();
    r.converged = b.converged;
    if (b.value < init_value) r.converged = false;
    return r;
}

Mat symmetric_sqrt(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (m + m.transpose()));
    const Vec ev = eig.eigenvalues().cwiseMax(0.0);
    return eig.eigenvectors() * ev.cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
}

Mat symmetric_inverse_sqrt(const Mat& m) {
    if (is_degenerate(m)) throw SingularError("matrix is degenerate; inverse square root undefined");
    Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (m + m.transpose()));
    const Vec& ev = eig.eigenvalues();
    if (ev.minCoeff() <= 0.0) throw SingularError("matrix is not positive definite");
    return eig.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
}

Vec standardized_error(const Vec& theta_hat, const Vec& theta_star, std::size_t particles,
                       const FisherMatrix& info) {
    if (theta_hat.size() != theta_star.size() || static_cast<std::size_t>(theta_hat.size()) != info.size()) {
        throw ShapeError("standardized_error: dimension mismatch");
    }
    if (info.degenerate()) throw SingularError("standardized_error: Fisher information is degenerate");
    return std::sqrt(static_cast<double>(particles)) * symmetric_sqrt(info.values) * (theta_hat - theta_star);
}

}  // namespace mfl
