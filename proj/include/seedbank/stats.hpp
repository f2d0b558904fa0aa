#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "seedbank/errors.hpp"

namespace seedbank {

struct MeanSE {
    double mean = 0;
    double se = 0;
    std::int64_t n = 0;
};

// Two-pass mean and standard error of the mean.
inline MeanSE mean_se(const std::vector<double>& xs) {
    MeanSE r;
    r.n = static_cast<std::int64_t>(xs.size());
    if (r.n == 0) return r;
    double s = 0;
    for (double x : xs) s += x;
    r.mean = s / static_cast<double>(r.n);
    if (r.n < 2) return r;
    double ss = 0;
    for (double x : xs) {
        const double d = x - r.mean;
        ss += d * d;
    }
    const double var = ss / static_cast<double>(r.n - 1);
    r.se = std::sqrt(var / static_cast<double>(r.n));
    return r;
}

// Wasserstein-1 distance between two equal-size empirical laws on R:
// mean absolute difference of order statistics.
inline double wasserstein1(std::vector<double> a, std::vector<double> b) {
    if (a.size() != b.size() || a.empty())
        throw NumericError("wasserstein1: samples must be non-empty and of equal size");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s / static_cast<double>(a.size());
}

// Kolmogorov-Smirnov distance sqrt(n) * sup |F_hat - F| against a fully
// specified continuous law; caller supplies F(sample). At the 1% level the
// critical value of the scaled statistic is 1.628.
inline constexpr double ks_critical_1pc = 1.628;

template <class CDF>
double ks_statistic(std::vector<double> xs, CDF&& cdf) {
    if (xs.empty()) throw NumericError("ks_statistic: empty sample");
    std::sort(xs.begin(), xs.end());
    const auto n = static_cast<double>(xs.size());
    double worst = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double F = cdf(xs[i]);
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        worst = std::max({worst, std::abs(F - lo), std::abs(hi - F)});
    }
    return std::sqrt(n) * worst;
}

// Dvoretzky-Kiefer-Wolfowitz envelope half-width for confidence 1 - alpha.
inline double dkw_band(std::int64_t n, double alpha) {
    return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

struct LogLogFit {
    double slope = 0;       // d log y / d log t
    double intercept = 0;   // log-amplitude
    double rmse = 0;        // residual RMS in log space
    int points = 0;
};

// Least-squares line through (log t, log y); points with y <= floor are skipped.
inline LogLogFit loglog_fit(const std::vector<double>& t, const std::vector<double>& y,
                            double floor = 1e-300) {
    if (t.size() != y.size()) throw NumericError("loglog_fit: size mismatch");
    LogLogFit f;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(y[i] > floor) || !(t[i] > 0)) continue;
        const double lx = std::log(t[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++f.points;
    }
    if (f.points < 2) return f;
    const double n = f.points;
    const double denom = n * sxx - sx * sx;
    if (denom <= 0) return f;
    f.slope = (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    double ss = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(y[i] > floor) || !(t[i] > 0)) continue;
        const double r = std::log(y[i]) - (f.intercept + f.slope * std::log(t[i]));
        ss += r * r;
    }
    f.rmse = std::sqrt(ss / n);
    return f;
}

} // namespace seedbank
