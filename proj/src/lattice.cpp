#include "seedbank/lattice.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>

#include <cmath>
#include <complex>

namespace seedbank {

namespace {

// GSL's default handler aborts on underflow; special-function underflow is
// benign here (tail weights drop to zero).
const auto gslQuiet = [] { return gsl_set_error_handler_off(); }();

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Complex symbol s(phi) = sum_o rate(o) e^{i phi . o} at frequency index f.
std::complex<double> symbol_at(const WalkKernel& k, const int* f) {
    std::complex<double> s = 0;
    for (std::size_t o = 0; o < k.offsets.size(); ++o) {
        double phase = 0;
        for (int c = 0; c < k.torus.dim; ++c)
            phase += kTwoPi * f[c] * k.offsets[o][c] / k.torus.side;
        s += k.rates[o] * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    return s;
}

// Per-axis complex factors for separable kernels:
// factor_ax(c) = exp(-t (R_ax - s_ax(c)) / norm) * e^{-i 2 pi c delta_ax / L}.
// Zero offsets drop out of R - s entirely.
std::vector<std::vector<std::complex<double>>> axis_factors(const WalkKernel& k, double t,
                                                            const std::vector<int>& delta,
                                                            double norm) {
    const int L = k.torus.side;
    const int d = k.torus.dim;
    std::vector<std::vector<std::complex<double>>> fac(d);
    for (int ax = 0; ax < d; ++ax) {
        fac[ax].resize(L);
        for (int c = 0; c < L; ++c) {
            std::complex<double> s = 0;
            double R = 0;
            for (std::size_t o = 0; o < k.offsets.size(); ++o) {
                const int oc = k.offsets[o][ax];
                if (oc == 0) continue;
                R += k.rates[o];
                const double phase = kTwoPi * c * oc / L;
                s += k.rates[o] * std::complex<double>(std::cos(phase), std::sin(phase));
            }
            const double dphase = delta.empty() ? 0.0 : kTwoPi * c * delta[ax] / L;
            fac[ax][c] = std::exp(-t * (R - s) / norm) *
                         std::complex<double>(std::cos(dphase), -std::sin(dphase));
        }
    }
    return fac;
}

double separable_sum(const std::vector<std::vector<std::complex<double>>>& fac, int L) {
    std::complex<double> prod = 1;
    for (const auto& ax : fac) {
        std::complex<double> s = 0;
        for (int c = 0; c < L; ++c) s += ax[c];
        prod *= s / static_cast<double>(L);
    }
    return prod.real();
}

} // namespace

double transition_probability(const WalkKernel& k, double t,
                              const std::vector<int>& displacement) {
    const Torus& T = k.torus;
    if (!displacement.empty() && static_cast<int>(displacement.size()) != T.dim)
        throw ConfigError("transition_probability: displacement dimension mismatch");

    if (k.separable()) {
        auto fac = axis_factors(k, t, displacement, 1.0);
        return separable_sum(fac, T.side);
    }

    const std::int64_t V = T.sites();
    int f[6];
    std::complex<double> acc = 0;
    for (std::int64_t idx = 0; idx < V; ++idx) {
        T.coords(idx, f);
        const std::complex<double> s = symbol_at(k, f);
        double dphase = 0;
        if (!displacement.empty())
            for (int c = 0; c < T.dim; ++c) dphase += kTwoPi * f[c] * displacement[c] / T.side;
        acc += std::exp(-t * (k.totalRate - s)) *
               std::complex<double>(std::cos(dphase), -std::sin(dphase));
    }
    return acc.real() / static_cast<double>(V);
}

double return_probability(const WalkKernel& k, double t) {
    return transition_probability(k, t, {});
}

double convolved_return(const WalkKernel& a, const WalkKernel& b, double t) {
    if (a.torus != b.torus) throw ConfigError("convolved_return: kernels on different tori");
    if (!a.symmetric() || !b.symmetric())
        throw ConfigError("convolved_return: kernels must be symmetric");

    const Torus& T = a.torus;
    if (a.separable() && b.separable()) {
        auto fa = axis_factors(a, t, {}, a.totalRate);
        auto fb = axis_factors(b, t, {}, b.totalRate);
        std::complex<double> prod = 1;
        for (int ax = 0; ax < T.dim; ++ax) {
            std::complex<double> s = 0;
            for (int c = 0; c < T.side; ++c) s += fa[ax][c] * fb[ax][c];
            prod *= s / static_cast<double>(T.side);
        }
        return prod.real();
    }

    const std::int64_t V = T.sites();
    int f[6];
    double acc = 0;
    for (std::int64_t idx = 0; idx < V; ++idx) {
        T.coords(idx, f);
        const double la = 1.0 - symbol_at(a, f).real() / a.totalRate;
        const double lb = 1.0 - symbol_at(b, f).real() / b.totalRate;
        acc += std::exp(-t * (la + lb));
    }
    return acc / static_cast<double>(V);
}

double simple_walk_return_infinite(int dim, double t, double rate) {
    const double x = rate * t / dim;
    const double axis = gsl_sf_bessel_I0_scaled(x); // e^{-x} I_0(x)
    return std::pow(axis, dim);
}

void SparseCtmc::add(std::int64_t from, std::int64_t to, double rate) {
    if (from == to || !(rate > 0)) return;
    rows[from].emplace_back(static_cast<std::int32_t>(to), rate);
}

void SparseCtmc::finalize() {
    maxExit = 0;
    for (auto& r : rows) {
        double exit = 0;
        for (auto& [to, rate] : r) exit += rate;
        if (exit > maxExit) maxExit = exit;
    }
}

std::vector<double> SparseCtmc::propagate(const std::vector<double>& p0, double t,
                                          double tol) const {
    // Uniformization: p_t = sum_k Pois(Lambda t, k) p0 P^k with
    // P = I + Q / Lambda. Time is chunked so Lambda * chunk <= 200 and the
    // Poisson weights stay representable.
    std::vector<double> p = p0;
    if (t <= 0 || maxExit <= 0) return p;
    const double lambda = maxExit * 1.000000001;
    const int chunks = static_cast<int>(std::ceil(lambda * t / 200.0));
    const double dt = t / chunks;

    std::vector<double> v(n), next(n);
    for (int chunk = 0; chunk < chunks; ++chunk) {
        const double a = lambda * dt;
        double w = std::exp(-a);
        double cum = w;
        v = p;
        std::vector<double> acc(n, 0.0);
        for (std::int64_t i = 0; i < n; ++i) acc[i] = w * v[i];
        int k = 0;
        while (cum < 1.0 - tol) {
            ++k;
            // next = v P
            std::fill(next.begin(), next.end(), 0.0);
            for (std::int64_t i = 0; i < n; ++i) {
                const double vi = v[i];
                if (vi == 0) continue;
                double exit = 0;
                for (const auto& [to, rate] : rows[i]) {
                    next[to] += vi * rate / lambda;
                    exit += rate;
                }
                next[i] += vi * (1.0 - exit / lambda);
            }
            v.swap(next);
            w *= a / k;
            cum += w;
            for (std::int64_t i = 0; i < n; ++i) acc[i] += w * v[i];
            if (k > 1000000) throw NumericError("SparseCtmc::propagate: truncation overflow");
        }
        // Renormalize the truncated Poisson mass so probability is conserved.
        for (auto& x : acc) x /= cum;
        p = acc;
    }
    return p;
}

SparseCtmc walk_ctmc(const WalkKernel& k) {
    SparseCtmc c;
    c.n = k.torus.sites();
    c.rows.resize(c.n);
    for (std::int64_t i = 0; i < c.n; ++i)
        for (std::size_t o = 0; o < k.offsets.size(); ++o)
            c.add(i, k.torus.shift(i, k.offsets[o]), k.rates[o]);
    c.finalize();
    return c;
}

} // namespace seedbank
