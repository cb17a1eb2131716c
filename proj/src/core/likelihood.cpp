#include "mfl/likelihood.hpp"

#include "mfl/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace mfl {

namespace {

struct Accumulated {
    std::vector<double> value;  // per particle
    std::vector<double> score;  // per particle, p entries each
    std::vector<double> info;   // per particle, p*p entries each
};

void check_inputs(const DriftModel& model, const ParamVector& theta, const ParticlePaths& paths) {
    model.require_valid(theta);
    if (paths.particles() == 0) throw DomainError("likelihood needs at least one particle");
    if (paths.dim() != model.dim()) throw ShapeError("path dimension differs from model dimension");
}

/// One pass over the paths; each particle accumulates its own terms in step order.
Accumulated accumulate(const DriftModel& model, const Vec& theta, const ParticlePaths& paths, bool want_value,
                       bool want_score, bool want_info) {
    const std::size_t n = paths.particles();
    const std::size_t d = model.dim();
    const std::size_t p = model.num_params();
    const auto di = static_cast<Eigen::Index>(d);
    const auto& diff = model.diffusion();
    const bool scalar = diff.is_scalar();
    const double inv_c = scalar ? 1.0 / (diff.scalar_sigma() * diff.scalar_sigma()) : 0.0;
    const double dt = paths.grid().dt();
    const bool need_grad = want_score || want_info;

    Accumulated acc;
    if (want_value) acc.value.assign(n, 0.0);
    if (want_score) acc.score.assign(n * p, 0.0);
    if (want_info) acc.info.assign(n * p * p, 0.0);

    Vec b(di);
    Vec dx(di);
    Vec cinv_b(di);
    Vec cinv_dx(di);
    Mat grad;
    for (std::size_t j = 1; j <= paths.steps(); ++j) {
        const double t = paths.grid().time(j - 1);
        const EmpiricalMeasure nu = paths.measure(j - 1);
        for (std::size_t i = 0; i < n; ++i) {
            const auto x = paths.position(i, j - 1);
            if (need_grad) {
                model.evaluate_with_gradient(theta, t, x, nu, {b.data(), d}, grad);
            } else {
                model.evaluate(theta, t, x, nu, {b.data(), d});
            }
            for (std::size_t k = 0; k < d; ++k) dx(static_cast<Eigen::Index>(k)) = paths.at(i, j, k) - x[k];
            if (scalar) {
                cinv_b = inv_c * b;
                cinv_dx = inv_c * dx;
            } else {
                cinv_b = diff.c_inv() * b;
                cinv_dx = diff.c_inv() * dx;
            }
            if (want_value) acc.value[i] += cinv_b.dot(dx) - 0.5 * cinv_b.dot(b) * dt;
            if (want_score) {
                const Vec s = grad.transpose() * (cinv_dx - cinv_b * dt);
                for (std::size_t a = 0; a < p; ++a) acc.score[i * p + a] += s(static_cast<Eigen::Index>(a));
            }
            if (want_info) {
                const Mat g = scalar ? Mat(inv_c * grad.transpose() * grad) : Mat(grad.transpose() * diff.c_inv() * grad);
                for (std::size_t a = 0; a < p; ++a) {
                    for (std::size_t c = 0; c < p; ++c) {
                        acc.info[(i * p + a) * p + c] += g(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c)) * dt;
                    }
                }
            }
        }
    }
    return acc;
}

/// Pairwise reduction of per-particle blocks of `width` entries.
Vec reduce_blocks(const std::vector<double>& blocks, std::size_t n, std::size_t width) {
    Vec out(static_cast<Eigen::Index>(width));
    std::vector<double> column(n);
    for (std::size_t a = 0; a < width; ++a) {
        for (std::size_t i = 0; i < n; ++i) column[i] = blocks[i * width + a];
        out(static_cast<Eigen::Index>(a)) = pairwise_sum(column);
    }
    return out;
}

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw NumericError(std::string(what) + ": non-finite accumulation");
}

FisherMatrix make_fisher(Mat m, FisherKind kind) {
    if (!m.allFinite()) throw NumericError("Fisher information: non-finite entries");
    FisherMatrix f{0.5 * (m + m.transpose()), kind};
    return f;
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double degeneracy_threshold(const Mat& m) {
    const double p = static_cast<double>(m.rows());
    const double tr = m.trace();
    if (tr <= 0.0) return 0.0;
    return kDegeneracyRelTol * std::pow(tr / p, p);
}

bool is_degenerate(const Mat& m) {
    if (m.trace() <= 0.0) return true;
    return m.determinant() < degeneracy_threshold(m);
}

double FisherMatrix::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Mat> eig(values, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
}

bool FisherMatrix::degenerate() const { return is_degenerate(values); }

LikelihoodValue log_likelihood_discrete(const DriftModel& model, const ParamVector& theta,
                                        const ParticlePaths& paths) {
    check_inputs(model, theta, paths);
    const auto acc = accumulate(model, theta.vec(), paths, true, false, false);
    const double v = pairwise_sum(acc.value);
    require_finite(v, "log-likelihood");
    return {v, theta.vec(), paths.particles(), paths.steps()};
}

Vec score_discrete(const DriftModel& model, const ParamVector& theta, const ParticlePaths& paths) {
    check_inputs(model, theta, paths);
    const auto acc = accumulate(model, theta.vec(), paths, false, true, false);
    Vec s = reduce_blocks(acc.score, paths.particles(), model.num_params());
    if (!s.allFinite()) throw NumericError("score: non-finite accumulation");
    return s;
}

LikelihoodWithScore log_likelihood_and_score(const DriftModel& model, const ParamVector& theta,
                                             const ParticlePaths& paths) {
    check_inputs(model, theta, paths);
    const auto acc = accumulate(model, theta.vec(), paths, true, true, false);
    LikelihoodWithScore out{pairwise_sum(acc.value), reduce_blocks(acc.score, paths.particles(), model.num_params())};
    require_finite(out.value, "log-likelihood");
    if (!out.score.allFinite()) throw NumericError("score: non-finite accumulation");
    return out;
}

double log_likelihood_ratio(const DriftModel& model, const ParamVector& theta, const ParamVector& theta_prime,
                            const ParticlePaths& paths) {
    return log_likelihood_discrete(model, theta_prime, paths).value -
           log_likelihood_discrete(model, theta, paths).value;
}

FisherMatrix empirical_fisher(const DriftModel& model, const ParamVector& theta, const ParticlePaths& paths) {
    check_inputs(model, theta, paths);
    const std::size_t p = model.num_params();
    const auto acc = accumulate(model, theta.vec(), paths, false, false, true);
    const Vec flat = reduce_blocks(acc.info, paths.particles(), p * p);
    Mat m = Eigen::Map<const Mat>(flat.data(), static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    return make_fisher(m / static_cast<double>(paths.particles()), FisherKind::empirical_over_n);
}

FisherMatrix limit_fisher(const DriftModel& model, const ParamVector& theta, const MeasureFlow& flow) {
    model.require_valid(theta);
    const TimeGrid& grid = flow.grid;
    if (flow.measures.size() != grid.steps() + 1) throw ShapeError("flow has one measure per grid time expected");
    const std::size_t p = model.num_params();
    const std::size_t d = model.dim();
    const auto& diff = model.diffusion();
    Mat total = Mat::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    Vec b(static_cast<Eigen::Index>(d));
    Mat grad;
    for (std::size_t j = 0; j <= grid.steps(); ++j) {
        const EmpiricalMeasure& mu = flow.measures[j];
        if (mu.dim() != d) throw ShapeError("flow dimension differs from model dimension");
        const double t = grid.time(j);
        std::vector<double> entries(mu.size() * p * p);
        for (std::size_t a = 0; a < mu.size(); ++a) {
            model.evaluate_with_gradient(theta.vec(), t, mu.atom(a), mu, {b.data(), d}, grad);
            const Mat g = grad.transpose() * diff.c_inv() * grad;
            for (std::size_t e = 0; e < p * p; ++e) entries[a * p * p + e] = g.data()[e];
        }
        const Vec avg = reduce_blocks(entries, mu.size(), p * p) / static_cast<double>(mu.size());
        const double w = (j == 0 || j == grid.steps()) ? 0.5 * grid.dt() : grid.dt();
        total += w * Eigen::Map<const Mat>(avg.data(), static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    }
    return make_fisher(total, FisherKind::limit);
}

FisherMatrix ou_limit_fisher(const OUMoments& mom, const TimeGrid& grid) {
    if (mom.theta.size() != 3) throw ShapeError("ou_limit_fisher needs theta of length 3");
    if (mom.theta[0] == 0.0) throw DomainError("ou_limit_fisher requires theta_1 != 0");
    if (mom.theta[0] == mom.theta[2]) throw DomainError("ou_limit_fisher requires theta_1 != theta_3");
    Mat total = Mat::Zero(3, 3);
    for (std::size_t j = 0; j <= grid.steps(); ++j) {
        const double t = grid.time(j);
        const double m1 = ou_mean(mom, t);
        const double var = ou_variance(mom, t);
        const double m2 = var + m1 * m1;
        Mat a{{m2, m1, -var}, {m1, 1.0, 0.0}, {-var, 0.0, var}};
        const double w = (j == 0 || j == grid.steps()) ? 0.5 * grid.dt() : grid.dt();
        total += w * a;
    }
    return make_fisher(total / (mom.sigma * mom.sigma), FisherKind::limit);
}

}  // namespace mfl
