#include "mfl/error.hpp"
#include "mfl/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace mfl;

TEST_CASE("wasserstein-1 on small samples") {
    CHECK(wasserstein1_1d(std::vector<double>{0}, std::vector<double>{1}) == 1.0);
    CHECK(wasserstein1_1d(std::vector<double>{0, 2}, std::vector<double>{3, 1}) == 1.0);
    const std::vector<double> a{0.3, -1.2, 4.0};
    CHECK(wasserstein1_1d(a, a) == 0.0);
    CHECK_THROWS_AS((void)wasserstein1_1d(a, std::vector<double>{1.0}), ShapeError);
    CHECK(wasserstein1_1d_cdf(std::vector<double>{0, 2}, std::vector<double>{1, 3}) == doctest::Approx(1.0));
    CHECK(wasserstein1_1d_cdf(std::vector<double>{0}, std::vector<double>{1, 1, 1}) == doctest::Approx(1.0));
}

TEST_CASE("kolmogorov-smirnov against the standard normal") {
    const std::size_t n = 1000;
    std::vector<double> q(n);
    for (std::size_t k = 0; k < n; ++k) q[k] = standard_normal_quantile((static_cast<double>(k) + 0.5) / n);
    const auto r = ks_test_normal(q);
    CHECK(r.statistic <= 0.5 / n * 10);
    CHECK(r.p_value > 0.99);

    const auto c = ks_test_normal(std::vector<double>(20, 0.1));
    CHECK(c.statistic >= 0.5);
    CHECK_THROWS_AS((void)ks_test_normal(std::vector<double>(5, 0.0)), DomainError);

    double prev = 1.0;
    for (double d = 0.01; d < 0.3; d += 0.01) {
        const double p = ks_p_value(d, 100);
        CHECK(p <= prev);
        prev = p;
    }
    CHECK(kolmogorov_survival(1.36) == doctest::Approx(0.0494).epsilon(0.01));
}

TEST_CASE("gaussian risk closed forms") {
    CHECK(gaussian_risk(loss_by_name("squared_norm"), 3) == doctest::Approx(3.0));
    CHECK(gaussian_risk(loss_by_name("one"), 4) == 1.0);
    CHECK(gaussian_risk(loss_by_name("abs_first"), 5) == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)));
    CHECK(gaussian_risk(loss_by_name("indicator", 0.0), 3) == doctest::Approx(1.0));
    // P(chi2_1 > 1.96^2) = 0.05
    CHECK(gaussian_risk(loss_by_name("indicator", 1.959963984540054), 1) == doctest::Approx(0.05).epsilon(1e-9));
    CHECK_THROWS_AS((void)loss_by_name("cubic"), ConfigError);
    CHECK(evaluate_loss(loss_by_name("squared_norm"), (Vec(2) << 1, 2).finished()) == 5.0);
}

TEST_CASE("summary statistics") {
    const std::vector<double> v{1, 2, 3, 4};
    CHECK(mean(v) == 2.5);
    CHECK(sample_variance(v) == doctest::Approx(5.0 / 3.0));
    CHECK(median({3, 1, 2}) == 2.0);
    CHECK(median({4, 1, 2, 3}) == 2.5);
    CHECK(correlation(v, std::vector<double>{2, 4, 6, 8}) == doctest::Approx(1.0));
    const auto fit = fit_line(std::vector<double>{0, 1, 2}, std::vector<double>{1, 3, 5});
    CHECK(fit.slope == doctest::Approx(2.0));
    CHECK(fit.intercept == doctest::Approx(1.0));
    Mat rows(3, 2);
    rows << 1, 0, 2, 1, 3, 2;
    const Mat c = sample_covariance(rows);
    CHECK(c(0, 0) == doctest::Approx(1.0));
    CHECK(c(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("normal cdf and quantile are inverse") {
    for (double p : {1e-6, 0.01, 0.3, 0.5, 0.9, 0.999}) {
        CHECK(standard_normal_cdf(standard_normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
    }
}
