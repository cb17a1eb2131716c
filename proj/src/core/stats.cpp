#include "mfl/stats.hpp"

#include "mfl/error.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace mfl {

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double standard_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal quantile needs p in (0, 1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), p);
}

double kolmogorov_survival(double x) {
    // Below 0.2 the survival function equals 1 to double precision and the
    // truncated alternating series has not converged.
    if (x < 0.2) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    }
    return std::clamp(sum, 0.0, 1.0);
}

double ks_p_value(double statistic, std::size_t n) {
    return kolmogorov_survival(std::sqrt(static_cast<double>(n)) * statistic);
}

KsResult ks_test_normal(std::span<const double> sample) {
    if (sample.size() < 8) throw DomainError("KS test needs at least 8 observations");
    std::vector<double> s(sample.begin(), sample.end());
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double f = standard_normal_cdf(s[k]);
        d = std::max({d, static_cast<double>(k + 1) / n - f, f - static_cast<double>(k) / n});
    }
    return {d, ks_p_value(d, s.size())};
}

double wasserstein1_1d(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ShapeError("wasserstein1_1d needs samples of equal length");
    if (a.empty()) throw DomainError("wasserstein1_1d needs nonempty samples");
    std::vector<double> sa(a.begin(), a.end());
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    double sum = 0.0;
    for (std::size_t k = 0; k < sa.size(); ++k) sum += std::abs(sa[k] - sb[k]);
    return sum / static_cast<double>(sa.size());
}

double wasserstein1_1d_cdf(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw DomainError("wasserstein1_1d_cdf needs nonempty samples");
    std::vector<double> sa(a.begin(), a.end());
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const double wa = 1.0 / static_cast<double>(sa.size());
    const double wb = 1.0 / static_cast<double>(sb.size());
    std::size_t ia = 0;
    std::size_t ib = 0;
    double fa = 0.0;
    double fb = 0.0;
    double prev = std::min(sa.front(), sb.front());
    double total = 0.0;
    while (ia < sa.size() || ib < sb.size()) {
        const double next = (ib >= sb.size() || (ia < sa.size() && sa[ia] <= sb[ib])) ? sa[ia] : sb[ib];
        total += std::abs(fa - fb) * (next - prev);
        while (ia < sa.size() && sa[ia] == next) {
            fa += wa;
            ++ia;
        }
        while (ib < sb.size() && sb[ib] == next) {
            fb += wb;
            ++ib;
        }
        prev = next;
    }
    return total;
}

LossSpec loss_by_name(std::string_view name, double threshold) {
    if (name == "squared_norm") return {Loss::squared_norm, 0.0};
    if (name == "abs_first") return {Loss::abs_first, 0.0};
    if (name == "indicator") {
        if (!(threshold >= 0.0)) throw ConfigError("indicator loss needs a threshold c >= 0");
        return {Loss::indicator, threshold};
    }
    if (name == "one") return {Loss::one, 0.0};
    throw ConfigError("unknown loss '" + std::string(name) + "'");
}

std::string loss_name(const LossSpec& loss) {
    switch (loss.kind) {
        case Loss::squared_norm: return "squared_norm";
        case Loss::abs_first: return "abs_first";
        case Loss::indicator: return "indicator";
        case Loss::one: return "one";
    }
    return "unknown";
}

double evaluate_loss(const LossSpec& loss, const Vec& x) {
    switch (loss.kind) {
        case Loss::squared_norm: return x.squaredNorm();
        case Loss::abs_first: return std::abs(x(0));
        case Loss::indicator: return x.norm() > loss.threshold ? 1.0 : 0.0;
        case Loss::one: return 1.0;
    }
    return 0.0;
}

double gaussian_risk(const LossSpec& loss, std::size_t p) {
    if (p == 0) throw DomainError("gaussian_risk needs p >= 1");
    switch (loss.kind) {
        case Loss::squared_norm: return static_cast<double>(p);
        case Loss::abs_first: return std::sqrt(2.0 / std::numbers::pi);
        case Loss::indicator:
            if (loss.threshold == 0.0) return 1.0;
            return boost::math::cdf(
                boost::math::complement(boost::math::chi_squared_distribution<double>(static_cast<double>(p)),
                                        loss.threshold * loss.threshold));
        case Loss::one: return 1.0;
    }
    return 0.0;
}

double mean(std::span<const double> v) {
    if (v.empty()) throw DomainError("mean of an empty sample");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
    if (v.size() < 2) throw DomainError("variance needs at least two observations");
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

double median(std::vector<double> v) {
    if (v.empty()) throw DomainError("median of an empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double correlation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) throw ShapeError("correlation needs two equal samples of size >= 2");
    const double ma = mean(a);
    const double mb = mean(b);
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        sab += (a[k] - ma) * (b[k] - mb);
        saa += (a[k] - ma) * (a[k] - ma);
        sbb += (b[k] - mb) * (b[k] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw ShapeError("fit_line needs two equal samples of size >= 2");
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx) * (x[k] - mx);
    }
    if (sxx == 0.0) throw DomainError("fit_line: abscissae are all equal");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

Mat sample_covariance(const Mat& rows) {
    if (rows.rows() < 2) throw DomainError("covariance needs at least two rows");
    const Eigen::RowVectorXd mu = rows.colwise().mean();
    const Mat centered = rows.rowwise() - mu;
    return centered.transpose() * centered / static_cast<double>(rows.rows() - 1);
}

}  // namespace mfl
