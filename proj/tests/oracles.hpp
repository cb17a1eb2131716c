#pragma once

// Reference computations written directly from the model definitions, with
// plain loops and no calls into the library's numerics. Tests and the
// acceptance program compare library output against these.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace oracle {

// Raw step-major buffer: x[(j * n + i)] for d = 1.
struct Paths1d {
    std::size_t n = 0;
    std::size_t m = 0;
    double horizon = 1.0;
    std::vector<double> x;
    double at(std::size_t i, std::size_t j) const { return x[j * n + i]; }
};

inline double mean_at(const Paths1d& p, std::size_t j) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.n; ++i) s += p.at(i, j);
    return s / static_cast<double>(p.n);
}

// OU law moments by solving the moment ODEs
//   m' = t1 m + t2,   V' = 2 (t1 - t3) V + sigma^2.
inline double ou_mean(double t1, double t2, double m0, double t) {
    return (m0 + t2 / t1) * std::exp(t1 * t) - t2 / t1;
}
inline double ou_var(double t1, double t3, double v0, double sigma, double t) {
    const double a = t1 - t3;
    const double e = std::exp(2.0 * a * t);
    return e * v0 + sigma * sigma * (e - 1.0) / (2.0 * a);
}

// Discrete Girsanov contrast for McKean-OU, sigma = 1, by direct double loop.
inline double ou_loglik(const std::array<double, 3>& th, const Paths1d& p) {
    const double dt = p.horizon / static_cast<double>(p.m);
    double total = 0.0;
    for (std::size_t j = 0; j < p.m; ++j) {
        const double mu = mean_at(p, j);
        for (std::size_t i = 0; i < p.n; ++i) {
            const double x = p.at(i, j);
            const double b = th[0] * x + th[1] - th[2] * (x - mu);
            total += b * (p.at(i, j + 1) - x) - 0.5 * b * b * dt;
        }
    }
    return total;
}

// Dense Gaussian elimination with partial pivoting.
inline std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t p = b.size();
    for (std::size_t c = 0; c < p; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < p; ++r) {
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        }
        if (a[piv][c] == 0.0) throw std::runtime_error("oracle::solve: singular");
        std::swap(a[piv], a[c]);
        std::swap(b[piv], b[c]);
        for (std::size_t r = c + 1; r < p; ++r) {
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < p; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(p);
    for (std::size_t r = p; r-- > 0;) {
        double s = b[r];
        for (std::size_t k = r + 1; k < p; ++k) s -= a[r][k] * x[k];
        x[r] = s / a[r][r];
    }
    return x;
}

// Brute-force normal equations for a feature map phi(x, atoms at step j).
template <class Phi>
std::vector<double> linear_mle(const Paths1d& p, std::size_t dim_theta, Phi&& phi) {
    const double dt = p.horizon / static_cast<double>(p.m);
    std::vector<std::vector<double>> a(dim_theta, std::vector<double>(dim_theta, 0.0));
    std::vector<double> b(dim_theta, 0.0);
    for (std::size_t j = 0; j < p.m; ++j) {
        std::vector<double> atoms(p.n);
        for (std::size_t i = 0; i < p.n; ++i) atoms[i] = p.at(i, j);
        for (std::size_t i = 0; i < p.n; ++i) {
            const std::vector<double> f = phi(p.at(i, j), atoms);
            const double dx = p.at(i, j + 1) - p.at(i, j);
            for (std::size_t r = 0; r < dim_theta; ++r) {
                for (std::size_t c = 0; c < dim_theta; ++c) a[r][c] += f[r] * f[c] * dt;
                b[r] += f[r] * dx;
            }
        }
    }
    return solve(a, b);
}

// McKean-OU limit information from the moment ODEs:
//   E[phi phi^T] with phi = (x, 1, -(x - m)) and x ~ N(m, V), trapezoid in time.
inline std::array<std::array<double, 3>, 3> ou_information(const std::array<double, 3>& th, double m0, double v0,
                                                         double sigma, double horizon, std::size_t steps) {
    std::array<std::array<double, 3>, 3> out{};
    const double dt = horizon / static_cast<double>(steps);
    for (std::size_t j = 0; j <= steps; ++j) {
        const double t = (j == steps) ? horizon : static_cast<double>(j) * dt;
        const double w = (j == 0 || j == steps) ? 0.5 * dt : dt;
        const double m = ou_mean(th[0], th[1], m0, t);
        const double v = ou_var(th[0], th[2], v0, sigma, t);
        const double e[3][3] = {{m * m + v, m, -v}, {m, 1.0, 0.0}, {-v, 0.0, v}};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) out[r][c] += w * e[r][c] / (sigma * sigma);
        }
    }
    return out;
}

// The determinant written as a product of time integrals, trapezoid-consistent.
inline double ou_information_det_display(const std::array<double, 3>& th, double m0, double v0, double sigma,
                                         double horizon, std::size_t steps) {
    const double dt = horizon / static_cast<double>(steps);
    double iv = 0.0, im = 0.0, im2 = 0.0;
    for (std::size_t j = 0; j <= steps; ++j) {
        const double t = (j == steps) ? horizon : static_cast<double>(j) * dt;
        const double w = (j == 0 || j == steps) ? 0.5 * dt : dt;
        const double m = ou_mean(th[0], th[1], m0, t);
        iv += w * ou_var(th[0], th[2], v0, sigma, t);
        im += w * m;
        im2 += w * m * m;
    }
    const double s6 = std::pow(sigma, 6);
    return iv * (horizon * im2 - im * im) / s6;
}

inline double det3(const std::array<std::array<double, 3>, 3>& a) {
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Kolmogorov-Smirnov against N(0,1): sup distance and the asymptotic series p-value.
struct Ks {
    double d = 0.0;
    double p = 1.0;
};
inline Ks ks_normal(std::vector<double> s) {
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double f = normal_cdf(s[k]);
        d = std::max({d, static_cast<double>(k + 1) / n - f, f - static_cast<double>(k) / n});
    }
    const double lam = std::sqrt(n) * d;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k) {
        p += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lam * lam);
    }
    return {d, std::clamp(p, 0.0, 1.0)};
}

// W1 between two equal-size samples by explicit CDF integration over the merged support.
inline double w1_cdf_integral(std::vector<double> a, std::vector<double> b) {
    std::vector<double> pts(a);
    pts.insert(pts.end(), b.begin(), b.end());
    std::sort(pts.begin(), pts.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double total = 0.0;
    std::size_t ia = 0, ib = 0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        while (ia < a.size() && a[ia] <= pts[k]) ++ia;
        while (ib < b.size() && b[ib] <= pts[k]) ++ib;
        const double fa = static_cast<double>(ia) / static_cast<double>(a.size());
        const double fb = static_cast<double>(ib) / static_cast<double>(b.size());
        total += std::abs(fa - fb) * (pts[k + 1] - pts[k]);
    }
    return total;
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Ordinary least-squares slope.
inline double slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sx += x[k];
        sy += y[k];
        sxx += x[k] * x[k];
        sxy += x[k] * y[k];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracle
