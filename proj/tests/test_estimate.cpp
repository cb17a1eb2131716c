#include "mfl/error.hpp"
#include "mfl/estimate.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace mfl;

namespace {

DriftModel ou_model() {
    return DriftModel::mckean_ou({(Vec(3) << -3, -5, 0).finished(), (Vec(3) << -0.25, 5, 2).finished()});
}

}  // namespace

TEST_CASE("normal equations agree with a dense brute-force solve") {
    const auto p = simulate_particles(ou_model(), {-1, 1, 0.5}, 15, TimeGrid(1.0, 12), InitialLaw::gaussian(2, 0.5), 5);
    const oracle::Paths1d raw{p.particles(), p.steps(), 1.0, p.data()};
    const auto ref = oracle::linear_mle(raw, 3, [](double x, const std::vector<double>& a) {
        double m = 0.0;
        for (double y : a) m += y;
        m /= static_cast<double>(a.size());
        return std::vector<double>{x, 1.0, -(x - m)};
    });
    const Vec got = solve_normal_equations(assemble_normal_equations(ou_model(), p));
    for (int k = 0; k < 3; ++k) CHECK(std::abs(got(k) - ref[static_cast<std::size_t>(k)]) <= 1e-10 * std::max(1.0, std::abs(ref[static_cast<std::size_t>(k)])));
}

TEST_CASE("mle_linear recovers the parameter at moderate N") {
    const std::size_t n = 2000;
    const TimeGrid grid(1.0, 400);
    const auto p = simulate_particles(ou_model(), {-1, 1, 0.5}, n, grid, InitialLaw::gaussian(3, 0.5), 17);
    const auto est = mle_linear(ou_model(), p);
    REQUIRE(est.converged);
    const auto info = ou_limit_fisher({{-1, 1, 0.5}, 3.0, 0.5, 1.0}, grid);
    const double band = 5.0 * std::sqrt(info.values.inverse().trace() / static_cast<double>(n));
    CHECK((est.theta_hat.vec() - Vec(ParamVector{-1, 1, 0.5}.vec())).norm() <= band);
    // Score vanishes at an interior solution of the normal equations.
    const Vec s = score_discrete(ou_model(), est.theta_hat, p);
    CHECK(s.norm() <= 1e-8 * static_cast<double>(n));
    CHECK(est.method == EstimateMethod::linear_solve);
}

TEST_CASE("identical constant paths make the normal equations singular") {
    ParticlePaths p(5, TimeGrid(1.0, 10), 1);
    for (std::size_t j = 0; j <= 10; ++j) {
        for (std::size_t i = 0; i < 5; ++i) p.at(i, j) = 0.7;
    }
    CHECK_THROWS_AS((void)mle_linear(ou_model(), p), SingularError);
}

TEST_CASE("nonlinear families are rejected by the linear solver") {
    const auto m = DriftModel::nonlinear_f(kernel_by_name("tanh"), kernel_by_name("gaussian_bump"),
                                           {Vec::Constant(1, 0.05), Vec::Constant(1, 5)});
    ParticlePaths p(2, TimeGrid(1.0, 2), 1);
    CHECK_THROWS_AS((void)assemble_normal_equations(m, p), UnsupportedError);
}

TEST_CASE("numeric and linear estimators agree for interior solutions") {
    const auto p = simulate_particles(ou_model(), {-1, 1, 0.5}, 500, TimeGrid(1.0, 200), InitialLaw::gaussian(3, 0.5), 2);
    const auto lin = mle_linear(ou_model(), p);
    REQUIRE(lin.converged);
    const auto num = mle_numeric(ou_model(), p, {-1.5, 0, 1});
    CHECK(num.converged);
    CHECK((num.theta_hat.vec() - lin.theta_hat.vec()).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("double-layer parameters are recovered inside the Fisher band") {
    // Far below the reference scale (N = 2000, m = 400) to keep the suite fast.
    const auto m = DriftModel::double_layer(1, {(Vec(4) << 0.1, 0.3, 0.1, 1.5).finished(),
                                                (Vec(4) << 5, 0.8, 5, 3).finished()});
    const ParamVector star{1, 0.5, 1, 2};
    const std::size_t n = 200;
    const auto p = simulate_particles(m, star, n, TimeGrid(1.0, 50), InitialLaw::gaussian(0, 1), 31);
    MultiStartOptions opt;
    opt.seed = 4;
    opt.starts = 2;
    const auto est = mle_numeric(m, p, star, opt);
    const auto info = empirical_fisher(m, est.theta_hat, p);
    const double band = 5.0 * std::sqrt(info.values.inverse().trace() / static_cast<double>(n));
    CHECK((est.theta_hat.vec() - star.vec()).norm() <= band);
    CHECK(est.log_likelihood >= log_likelihood_discrete(m, star, p).value - 1e-6);
}

TEST_CASE("multistart points are deterministic and inside the box") {
    const ParamBox box((Vec(2) << -1, -2).finished(), (Vec(2) << 1, 2).finished());
    const auto a = multistart_points(box, Vec::Zero(2), 8, 3);
    const auto b = multistart_points(box, Vec::Zero(2), 8, 3);
    REQUIRE(a.size() == 8);
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k] == b[k]);
        CHECK(box.contains(a[k]));
    }
    CHECK(a[0] == Vec::Zero(2));
}

TEST_CASE("estimates outside the box are clamped and flagged") {
    const auto narrow = DriftModel::mckean_ou({(Vec(3) << -3, 2, 0).finished(), (Vec(3) << -0.25, 5, 2).finished()});
    const auto p = simulate_particles(ou_model(), {-1, -1, 0.5}, 300, TimeGrid(1.0, 100), InitialLaw::gaussian(0, 0.5), 3);
    const auto est = mle_linear(narrow, p);
    CHECK_FALSE(est.converged);
    CHECK(est.boundary_active[1]);
    CHECK(est.theta_hat[1] == 2.0);
}

TEST_CASE("standardized error") {
    FisherMatrix info{Mat::Constant(1, 1, 4.0), FisherKind::limit};
    const Vec z = standardized_error(Vec::Constant(1, 0.05), Vec::Zero(1), 100, info);
    CHECK(z(0) == doctest::Approx(1.0));
    const Vec zero = standardized_error(Vec::Constant(1, 0.3), Vec::Constant(1, 0.3), 100, info);
    CHECK(zero(0) == 0.0);

    // The norm only depends on I: |I^{1/2} v|^2 = v^T I v.
    Mat a(2, 2);
    a << 2.0, 0.5, 0.5, 1.0;
    const Vec v = (Vec(2) << 0.3, -0.2).finished();
    const Vec w = standardized_error(v, Vec::Zero(2), 1, {a, FisherKind::limit});
    CHECK(w.squaredNorm() == doctest::Approx(v.dot(a * v)));
    CHECK_THROWS_AS((void)standardized_error(v, Vec::Zero(2), 1, {Mat::Zero(2, 2), FisherKind::limit}),
                    SingularError);
}

TEST_CASE("scaling A and B together leaves the solution unchanged") {
    const auto p = simulate_particles(ou_model(), {-1, 1, 0.5}, 40, TimeGrid(1.0, 50), InitialLaw::gaussian(2, 0.5), 6);
    auto eq = assemble_normal_equations(ou_model(), p);
    const Vec a = solve_normal_equations(eq);
    eq.a *= 7.5;
    eq.b *= 7.5;
    CHECK((solve_normal_equations(eq) - a).norm() <= 1e-12 * a.norm());
}
