#pragma once

// Statistical utilities for the verification experiments.

#include "mfl/models.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mfl {

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against the standard normal; needs at least 8 points.
[[nodiscard]] KsResult ks_test_normal(std::span<const double> sample);
/// P(K > x) for the Kolmogorov distribution, series truncated at 100 terms.
[[nodiscard]] double kolmogorov_survival(double x);
/// Asymptotic p-value of statistic D at sample size n, using sqrt(n) D.
[[nodiscard]] double ks_p_value(double statistic, std::size_t n);

/// W1 between two equal-size samples on R: mean absolute difference of order statistics.
[[nodiscard]] double wasserstein1_1d(std::span<const double> a, std::span<const double> b);
/// W1 between uniform empirical measures of arbitrary sizes: integral of |F_a - F_b|.
[[nodiscard]] double wasserstein1_1d_cdf(std::span<const double> a, std::span<const double> b);

[[nodiscard]] double standard_normal_cdf(double x);
[[nodiscard]] double standard_normal_quantile(double p);

/// Loss functions w applied to standardized errors.
enum class Loss { squared_norm, abs_first, indicator, one };
struct LossSpec {
    Loss kind = Loss::squared_norm;
    double threshold = 0.0;  // c for the indicator |x| > c
};
/// Names: squared_norm, abs_first, indicator (threshold c), one. Throws ConfigError otherwise.
[[nodiscard]] LossSpec loss_by_name(std::string_view name, double threshold = 0.0);
[[nodiscard]] std::string loss_name(const LossSpec& loss);
[[nodiscard]] double evaluate_loss(const LossSpec& loss, const Vec& x);
/// (2 pi)^{-p/2} integral w(x) exp(-|x|^2/2) dx, closed form for every registered loss.
[[nodiscard]] double gaussian_risk(const LossSpec& loss, std::size_t p);

[[nodiscard]] double mean(std::span<const double> v);
/// Unbiased sample variance.
[[nodiscard]] double sample_variance(std::span<const double> v);
[[nodiscard]] double median(std::vector<double> v);
[[nodiscard]] double correlation(std::span<const double> a, std::span<const double> b);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};
/// Least-squares line y = intercept + slope x.
[[nodiscard]] LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Empirical covariance (divide by R - 1) of R samples stored as rows.
[[nodiscard]] Mat sample_covariance(const Mat& rows);

}  // namespace mfl
