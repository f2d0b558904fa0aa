#include "seedbank/quadrature.hpp"

#include <cmath>
#include <limits>

#include "seedbank/errors.hpp"

namespace seedbank {

std::string to_string(Finiteness f) {
    switch (f) {
        case Finiteness::Finite: return "finite";
        case Finiteness::Divergent: return "divergent";
        default: return "inconclusive";
    }
}

IntegralVerdict integrate_tail(const std::function<double(double)>& h,
                               const IntegrateOptions& opts) {
    if (opts.tmax <= 1 || opts.nodesPerDecade < 4)
        throw ConfigError("integrate_tail: need tmax > 1 and >= 4 nodes per decade");

    const double decades = std::log10(opts.tmax);
    const int n = static_cast<int>(std::ceil(decades * opts.nodesPerDecade));
    std::vector<double> ts(n + 1), hs(n + 1);
    for (int i = 0; i <= n; ++i) {
        ts[i] = std::pow(10.0, decades * i / n);
        hs[i] = h(ts[i]);
        if (!std::isfinite(hs[i]))
            throw NumericError("integrate_tail: integrand not finite at t=" + std::to_string(ts[i]));
        if (hs[i] < 0)
            throw NumericError("integrate_tail: integrand negative at t=" + std::to_string(ts[i]));
    }

    IntegralVerdict out;
    for (int i = 0; i < n; ++i)
        out.quadPart += 0.5 * (hs[i] + hs[i + 1]) * (ts[i + 1] - ts[i]);

    // Tail window: the last fitDecades of the grid.
    const int wn = std::min(n, static_cast<int>(std::ceil(opts.fitDecades * opts.nodesPerDecade)));
    std::vector<double> wt(ts.end() - wn - 1, ts.end());
    std::vector<double> wh(hs.end() - wn - 1, hs.end());

    bool allZero = true;
    for (double v : wh)
        if (v > opts.floor) allZero = false;
    if (allZero) {
        out.collapsed = true;
        out.verdict = Finiteness::Finite;
        out.value = out.quadPart;
        return out;
    }

    const LogLogFit f = loglog_fit(wt, wh, opts.floor);
    out.fit.exponent = -f.slope;
    out.fit.amplitude = std::exp(f.intercept);
    out.fit.rmse = f.rmse;
    out.fit.points = f.points;
    const double p = out.fit.exponent;
    out.nearBoundary = std::abs(p - 1.0) <= opts.boundaryTol;

    if (p > 1.0) {
        out.verdict = Finiteness::Finite;
        out.tailPart = out.fit.amplitude * std::pow(opts.tmax, 1.0 - p) / (p - 1.0);
        out.value = out.quadPart + out.tailPart;
    } else if (p < 1.0 - opts.boundaryTol) {
        out.verdict = Finiteness::Divergent;
        out.value = out.quadPart;
    } else {
        out.verdict = Finiteness::Inconclusive;
        out.value = out.quadPart;
    }
    return out;
}

DegreeBracket walk_degree(const std::function<double(double)>& h,
                          const std::vector<double>& zetas, const IntegrateOptions& opts) {
    DegreeBracket b;
    b.divergentMin = std::numeric_limits<double>::infinity();
    for (double z : zetas) {
        auto weighted = [&](double t) { return std::pow(t, z) * h(t); };
        const auto v = integrate_tail(weighted, opts);
        b.table.emplace_back(z, v.verdict);
        if (v.verdict == Finiteness::Finite && z > b.finiteMax) b.finiteMax = z;
        if (v.verdict == Finiteness::Divergent && z < b.divergentMin) b.divergentMin = z;
        if (v.verdict == Finiteness::Inconclusive) b.anyInconclusive = true;
    }
    return b;
}

} // namespace seedbank
