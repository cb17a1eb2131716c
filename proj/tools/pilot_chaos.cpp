// Pilot for the chaos-rate band: simulates the McKean-OU system at several N and
// seeds, measures W1(mu^N_T, exact Gaussian law) by direct CDF integration and
// prints the fitted log-log slope per seed.
//
//   pilot_chaos [--seeds 8] [--reps 20] [--steps 200] [--levels 100,1000,10000]

#include "mfl/rng.hpp"
#include "mfl/simulate.hpp"

#include <CLI11.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

namespace {

constexpr double kTheta1 = -1.0, kTheta2 = 1.0, kTheta3 = 0.5;
constexpr double kMean0 = 1.0, kVar0 = 0.5, kHorizon = 1.0;

double law_mean(double t) { return (kMean0 + kTheta2 / kTheta1) * std::exp(kTheta1 * t) - kTheta2 / kTheta1; }

double law_var(double t) {
    const double a = kTheta1 - kTheta3;
    const double e = std::exp(2 * a * t);
    return e * kVar0 + (e - 1) / (2 * a);
}

// Integral of |F_N - Phi((x - mu) / s)| over the real line, exact piece by piece.
double w1_to_gaussian(std::vector<double> x, double mu, double s) {
    std::sort(x.begin(), x.end());
    const boost::math::normal unit;
    const auto phi = [&](double v) { return boost::math::pdf(unit, (v - mu) / s); };
    const auto cdf = [&](double v) { return boost::math::cdf(unit, (v - mu) / s); };
    const auto prim = [&](double v) { return (v - mu) * cdf(v) + s * phi(v); };
    // |c - Phi| on [a, b] where Phi - c changes sign at most once
    const auto piece = [&](double a, double b, double c) {
        double cut = mu + s * boost::math::quantile(unit, c);
        cut = std::clamp(cut, a, b);
        const double below = c * (cut - a) - (prim(cut) - prim(a));
        const double above = (prim(b) - prim(cut)) - c * (b - cut);
        return below + above;
    };
    const double n = static_cast<double>(x.size());
    double total = prim(x.front());
    for (std::size_t k = 1; k < x.size(); ++k) total += piece(x[k - 1], x[k], static_cast<double>(k) / n);
    total += s * phi(x.back()) - (x.back() - mu) * (1 - cdf(x.back()));
    return total;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < x.size(); ++k) mx += x[k], my += y[k];
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < x.size(); ++k) sxy += (x[k] - mx) * (y[k] - my), sxx += (x[k] - mx) * (x[k] - mx);
    return sxy / sxx;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"chaos-rate pilot"};
    std::size_t seeds = 8, reps = 20, steps = 200;
    std::vector<std::size_t> levels{100, 1000, 10000};
    app.add_option("--seeds", seeds);
    app.add_option("--reps", reps);
    app.add_option("--steps", steps);
    app.add_option("--levels", levels)->delimiter(',');
    CLI11_PARSE(app, argc, argv);

    const auto model = mfl::DriftModel::mckean_ou(
        {(mfl::Vec(3) << -3, -5, 0).finished(), (mfl::Vec(3) << -0.25, 5, 2).finished()});
    const mfl::ParamVector theta{kTheta1, kTheta2, kTheta3};
    const mfl::TimeGrid grid(kHorizon, steps);
    const auto init = mfl::InitialLaw::gaussian(kMean0, kVar0);
    const double mu = law_mean(kHorizon), sd = std::sqrt(law_var(kHorizon));

    std::vector<double> slopes;
    for (std::uint64_t s = 1; s <= seeds; ++s) {
        std::vector<double> lx, ly;
        std::printf("seed %llu:", static_cast<unsigned long long>(s));
        for (std::size_t n : levels) {
            std::vector<double> d;
            for (std::size_t r = 0; r < reps; ++r) {
                const auto paths =
                    mfl::simulate_particles(model, theta, n, grid, init, mfl::derive_seed(s, {7, n, r}));
                std::vector<double> xt(n);
                for (std::size_t i = 0; i < n; ++i) xt[i] = paths.at(i, steps);
                d.push_back(w1_to_gaussian(std::move(xt), mu, sd));
            }
            const double med = median(d);
            std::printf("  N=%zu %.5f", n, med);
            lx.push_back(std::log(static_cast<double>(n)));
            ly.push_back(std::log(med));
        }
        slopes.push_back(fit_slope(lx, ly));
        std::printf("  slope %.4f\n", slopes.back());
    }
    const auto [lo, hi] = std::minmax_element(slopes.begin(), slopes.end());
    std::printf("slopes: median %.4f min %.4f max %.4f\n", median(slopes), *lo, *hi);
    return 0;
}
