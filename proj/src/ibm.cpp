#include "seedbank/ibm.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include <gsl/gsl_randist.h>
#include <gsl/gsl_rng.h>

#include "seedbank/errors.hpp"
#include "seedbank/forward.hpp"
#include "seedbank/kernel.hpp"
#include "seedbank/lattice.hpp"
#include "seedbank/parallel.hpp"
#include "seedbank/seedbank_spec.hpp"
#include "seedbank/torus.hpp"

namespace seedbank {

namespace {

// Adapter exposing our counter-split streams to gsl's exact discrete
// samplers. The state cell holds a pointer to the caller's Rng, so the draws
// land in the same per-replica stream as everything else.
unsigned long bridge_get(void* vstate) {
    return static_cast<unsigned long>((*static_cast<Rng**>(vstate))->u64() >> 32);
}

double bridge_get_double(void* vstate) { return (*static_cast<Rng**>(vstate))->uniform(); }

void bridge_set(void*, unsigned long) {}

const gsl_rng_type bridge_type = {
    "seedbank-bridge", // name
    0xffffffffUL,      // max (get returns the top 32 bits)
    0,                 // min
    sizeof(Rng*),      // size
    &bridge_set,
    &bridge_get,
    &bridge_get_double,
};

gsl_rng* bound_rng(Rng& src) {
    struct Holder {
        gsl_rng* r = gsl_rng_alloc(&bridge_type);
        ~Holder() { gsl_rng_free(r); }
    };
    thread_local Holder h;
    *static_cast<Rng**>(h.r->state) = &src;
    return h.r;
}

unsigned int as_uint(std::int64_t v) { return static_cast<unsigned int>(v); }

double lchoose(std::int64_t n, std::int64_t k) {
    return std::lgamma(static_cast<double>(n + 1)) - std::lgamma(static_cast<double>(k + 1)) -
           std::lgamma(static_cast<double>(n - k + 1));
}

double binom_pmf(std::int64_t k, std::int64_t n, double p) {
    if (k < 0 || k > n) return 0.0;
    if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
    if (p >= 1.0) return k == n ? 1.0 : 0.0;
    return std::exp(lchoose(n, k) + static_cast<double>(k) * std::log(p) +
                    static_cast<double>(n - k) * std::log1p(-p));
}

// P(Z = z) when t draws without replacement come from n1 + n2 items.
double hyper_pmf(std::int64_t z, std::int64_t n1, std::int64_t n2, std::int64_t t) {
    if (z < 0 || z > n1 || t - z < 0 || t - z > n2) return 0.0;
    return std::exp(lchoose(n1, z) + lchoose(n2, t - z) - lchoose(n1 + n2, t));
}

} // namespace

void DiscreteColony::validate() const {
    if (N < 1 || M < 1) throw ConfigError("DiscreteColony: both population sizes must be >= 1");
    if (c < 0 || c > std::min(N, M))
        throw ConfigError("DiscreteColony: swap count c must lie in [0, min(N, M)]");
    if (heartsActive < 0 || heartsActive > N)
        throw ConfigError("DiscreteColony: active heart count out of range");
    if (heartsDormant < 0 || heartsDormant > M)
        throw ConfigError("DiscreteColony: dormant heart count out of range");
}

void fw_step(DiscreteColony& col, Rng& rng) {
    col.validate();
    gsl_rng* r = bound_rng(rng);
    const double x = col.x();
    // Z: hearts among the c dormant slots that wake; U: hearts among the
    // N - c active slots that resample; V: hearts among the c fresh seeds.
    const std::int64_t Z =
        gsl_ran_hypergeometric(r, as_uint(col.heartsDormant), as_uint(col.M - col.heartsDormant),
                               as_uint(col.c));
    const std::int64_t U = gsl_ran_binomial(r, x, as_uint(col.N - col.c));
    const std::int64_t V = gsl_ran_binomial(r, x, as_uint(col.c));
    col.heartsActive = U + Z;
    col.heartsDormant = col.heartsDormant + V - Z;
}

std::vector<double> fw_step_distribution(const DiscreteColony& col) {
    col.validate();
    const std::int64_t N = col.N, M = col.M, c = col.c;
    const std::int64_t hd = col.heartsDormant;
    const double x = col.x();
    std::vector<double> law(static_cast<size_t>((N + 1) * (M + 1)), 0.0);
    const std::int64_t zLo = std::max<std::int64_t>(0, c - (M - hd));
    const std::int64_t zHi = std::min(c, hd);
    for (std::int64_t z = zLo; z <= zHi; ++z) {
        const double pz = hyper_pmf(z, hd, M - hd, c);
        for (std::int64_t u = 0; u <= N - c; ++u) {
            const double pu = binom_pmf(u, N - c, x);
            if (pu == 0.0) continue;
            for (std::int64_t v = 0; v <= c; ++v) {
                const double pv = binom_pmf(v, c, x);
                law[static_cast<size_t>((u + z) * (M + 1) + (hd + v - z))] += pz * pu * pv;
            }
        }
    }
    return law;
}

FwLimitResult fw_diffusion_limit_check(const std::vector<std::int64_t>& Ns, double K,
                                       std::int64_t c, double t, double x0, double y0,
                                       std::int64_t replicas, std::uint64_t masterSeed,
                                       int threads) {
    if (Ns.empty()) throw ConfigError("fw_diffusion_limit_check: need at least one N");
    if (!(K > 0)) throw ConfigError("fw_diffusion_limit_check: K must be positive");
    if (!(t > 0)) throw ConfigError("fw_diffusion_limit_check: t must be positive");
    if (!(x0 >= 0 && x0 <= 1 && y0 >= 0 && y0 <= 1))
        throw ConfigError("fw_diffusion_limit_check: fractions must lie in [0,1]");
    if (replicas < 2) throw ConfigError("fw_diffusion_limit_check: need replicas >= 2");

    FwLimitResult out;
    out.Ns = Ns;
    out.replicas = replicas;

    // Limiting system: one colony, seed bank (K, e = c/K), unit resampling
    // noise. The exchange drift c (y - x) matches K e = c.
    ModelParams p;
    p.model = 1;
    p.mig = WalkKernel::point_mass(Torus(1, 1), {0}, 1.0);
    p.sb = SeedBankSpec::single(K, static_cast<double>(c) / K);
    p.g = DiffusionFunction::fisher_wright(1.0);
    p.validate();
    const Torus torus(1, 1);
    const DriftPlan plan = DriftPlan::build(p, torus);
    const double dt = std::min(1e-3, 0.5 * stable_dt(p));
    const auto sdeSteps = static_cast<std::int64_t>(std::ceil(t / dt - 1e-9));
    const double h = t / static_cast<double>(sdeSteps);

    std::vector<double> sde(static_cast<size_t>(replicas));
    run_replicas(replicas, threads, [&](std::int64_t r) {
        Rng init = make_stream(masterSeed, static_cast<std::uint64_t>(r), stream_tag::forward_init);
        Rng noise =
            make_stream(masterSeed, static_cast<std::uint64_t>(r), stream_tag::forward_noise);
        SystemState s = init_state(p, InitSpec::explicit_values({x0}, {y0}), init);
        EmWorkspace w;
        for (std::int64_t k = 0; k < sdeSteps; ++k) em_step(s, p, plan, h, noise, w);
        sde[static_cast<size_t>(r)] = s.x[0];
    });

    for (std::int64_t N : Ns) {
        const std::int64_t M = std::llround(K * static_cast<double>(N));
        if (M < 1 || c > std::min(N, M))
            throw ConfigError("fw_diffusion_limit_check: N = " + std::to_string(N) +
                              " leaves no room for c swaps");
        const auto gens = static_cast<std::int64_t>(std::floor(static_cast<double>(N) * t + 1e-9));
        const std::int64_t ha0 = std::llround(x0 * static_cast<double>(N));
        const std::int64_t hd0 = std::llround(y0 * static_cast<double>(M));

        // The chain's one-step mean map is exactly linear, so the mean after
        // any number of generations is this recursion, free of sampling noise.
        double mx = static_cast<double>(ha0) / static_cast<double>(N);
        double my = static_cast<double>(hd0) / static_cast<double>(M);
        for (std::int64_t k = 0; k < gens; ++k) {
            const double nx = mx + (static_cast<double>(c) / static_cast<double>(N)) * (my - mx);
            const double ny = my + (static_cast<double>(c) / static_cast<double>(M)) * (mx - my);
            mx = nx;
            my = ny;
        }
        const double w0 = (x0 + K * y0) / (1 + K);
        const double lam = static_cast<double>(c) * (1 + K) / K;
        const double ode =
            w0 + (x0 - w0) * std::exp(-lam * static_cast<double>(gens) / static_cast<double>(N));
        out.meanErr.push_back(std::abs(mx - ode));

        std::vector<double> chain(static_cast<size_t>(replicas));
        run_replicas(replicas, threads, [&](std::int64_t r) {
            Rng rng =
                make_stream(masterSeed, static_cast<std::uint64_t>(r), stream_tag::discrete_colony);
            DiscreteColony col{N, M, c, ha0, hd0};
            col.validate();
            for (std::int64_t k = 0; k < gens; ++k) fw_step(col, rng);
            chain[static_cast<size_t>(r)] = col.x();
        });
        out.wasserstein.push_back(wasserstein1(chain, sde));
        out.chainMeans.push_back(mean_se(chain));
        if (N == Ns.back()) {
            out.chainMean = out.chainMeans.back();
            out.recursionMean = mx;
            out.odeMean = ode;
        }
    }

    std::vector<double> NsAsT;
    NsAsT.reserve(Ns.size());
    for (std::int64_t N : Ns) NsAsT.push_back(static_cast<double>(N));
    out.meanSlope = loglog_fit(NsAsT, out.meanErr).slope;
    return out;
}

void MoranRates::validate() const {
    if (cA.empty() || cA.size() != cD.size())
        throw ConfigError("MoranRates: need matching non-empty cA and cD lists");
    for (size_t m = 0; m < cA.size(); ++m)
        if (!(cA[m] > 0) || !(cD[m] > 0) || !std::isfinite(cA[m]) || !std::isfinite(cD[m]))
            throw ConfigError("MoranRates: all rates must be positive and finite");
}

double MoranRates::sumK() const {
    double s = 0;
    for (size_t m = 0; m < cA.size(); ++m) s += cA[m] / cD[m];
    return s;
}

std::int64_t MoranState::ZA() const {
    std::int64_t s = N;
    for (std::int64_t z : ZD) s -= z;
    return s;
}

void MoranState::validate() const {
    if (N < 1) throw ConfigError("MoranState: N must be >= 1");
    if (Y.size() != ZD.size()) throw ConfigError("MoranState: Y and ZD must have equal length");
    std::int64_t dormant = 0;
    for (size_t m = 0; m < ZD.size(); ++m) {
        if (ZD[m] < 0) throw ConfigError("MoranState: negative dormant pool");
        if (Y[m] < 0 || Y[m] > ZD[m])
            throw ConfigError("MoranState: dormant heart count exceeds its pool");
        dormant += ZD[m];
    }
    if (dormant > N) throw ConfigError("MoranState: dormant pools exceed the population");
    if (X < 0 || X > N - dormant)
        throw ConfigError("MoranState: active heart count exceeds the active pool");
}

MoranState MoranState::equilibrium_start(std::int64_t N, const MoranRates& r, double x0Active,
                                         double y0Dormant) {
    r.validate();
    if (N < 2) throw ConfigError("MoranState: need N >= 2");
    if (!(x0Active >= 0 && x0Active <= 1 && y0Dormant >= 0 && y0Dormant <= 1))
        throw ConfigError("MoranState: heart fractions must lie in [0,1]");
    const int C = r.colours();
    MoranState s;
    s.N = N;
    s.Y.resize(static_cast<size_t>(C));
    s.ZD.resize(static_cast<size_t>(C));
    const double scale = r.timeScale();
    std::int64_t dormant = 0;
    for (int m = 0; m < C; ++m) {
        s.ZD[static_cast<size_t>(m)] =
            std::llround(static_cast<double>(N) * r.Km(m) / scale);
        dormant += s.ZD[static_cast<size_t>(m)];
    }
    if (dormant >= N)
        throw ConfigError("MoranState: population too small for the dormant load");
    s.X = std::llround(x0Active * static_cast<double>(N - dormant));
    for (int m = 0; m < C; ++m)
        s.Y[static_cast<size_t>(m)] =
            std::llround(y0Dormant * static_cast<double>(s.ZD[static_cast<size_t>(m)]));
    s.validate();
    return s;
}

MoranEventType moran_gillespie_step(MoranState& s, const MoranRates& r, Rng& rng, double tMax) {
    if (s.t >= tMax) return MoranEventType::None;
    const int C = r.colours();
    const double N = static_cast<double>(s.N);
    const std::int64_t zA = s.ZA();

    // Event order: resample up, resample down, then per colour heart
    // dormancy, heart wake, other dormancy, other wake.
    static thread_local std::vector<double> w;
    w.assign(static_cast<size_t>(2 + 4 * C), 0.0);
    const double resample =
        zA > 0 ? static_cast<double>(s.X) * static_cast<double>(zA - s.X) / static_cast<double>(zA)
               : 0.0;
    w[0] = resample;
    w[1] = resample;
    double total = 2 * resample;
    for (int m = 0; m < C; ++m) {
        const double eps = r.cA[static_cast<size_t>(m)] / N;
        const double del = r.cD[static_cast<size_t>(m)] / N;
        const size_t base = static_cast<size_t>(2 + 4 * m);
        w[base + 0] = eps * static_cast<double>(s.X);
        w[base + 1] = del * static_cast<double>(s.Y[static_cast<size_t>(m)]);
        w[base + 2] = eps * static_cast<double>(zA - s.X);
        w[base + 3] =
            del * static_cast<double>(s.ZD[static_cast<size_t>(m)] - s.Y[static_cast<size_t>(m)]);
        total += w[base + 0] + w[base + 1] + w[base + 2] + w[base + 3];
    }
    if (total <= 0) {
        s.t = tMax;
        return MoranEventType::None;
    }
    const double dt = rng.exponential(total);
    if (s.t + dt > tMax) {
        s.t = tMax;
        return MoranEventType::None;
    }
    s.t += dt;

    double u = rng.uniform() * total;
    size_t pick = 0;
    bool found = false;
    for (size_t k = 0; k < w.size(); ++k) {
        if (w[k] <= 0) continue;
        pick = k;
        u -= w[k];
        if (u < 0) {
            found = true;
            break;
        }
    }
    // roundoff can push u past the last strictly positive entry; keep it
    (void)found;

    if (pick == 0) {
        ++s.X;
        return MoranEventType::ResampleUp;
    }
    if (pick == 1) {
        --s.X;
        return MoranEventType::ResampleDown;
    }
    const auto m = static_cast<size_t>((pick - 2) / 4);
    switch ((pick - 2) % 4) {
        case 0:
            --s.X;
            ++s.Y[m];
            ++s.ZD[m];
            return MoranEventType::HeartDormancy;
        case 1:
            ++s.X;
            --s.Y[m];
            --s.ZD[m];
            return MoranEventType::HeartWake;
        case 2:
            ++s.ZD[m];
            return MoranEventType::OtherDormancy;
        default:
            --s.ZD[m];
            return MoranEventType::OtherWake;
    }
}

void run_moran(MoranState& s, const MoranRates& r, double tMax, Rng& rng) {
    r.validate();
    s.validate();
    if (static_cast<int>(s.Y.size()) != r.colours())
        throw ConfigError("run_moran: state and rates disagree on the colour count");
    while (s.t < tMax) {
        if (moran_gillespie_step(s, r, rng, tMax) == MoranEventType::None) break;
    }
}

MoranOdeResult moran_ode(const MoranRates& r, const std::vector<double>& times,
                         const std::vector<double>& z0) {
    r.validate();
    const int C = r.colours();
    if (static_cast<int>(z0.size()) != C + 1)
        throw ConfigError("moran_ode: z0 must have one entry per layer");
    for (double v : z0)
        if (!(v >= 0) || !std::isfinite(v))
            throw ConfigError("moran_ode: z0 entries must be non-negative and finite");
    if (times.empty()) throw ConfigError("moran_ode: need at least one output time");
    for (size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0) || (i > 0 && times[i] < times[i - 1]))
            throw ConfigError("moran_ode: times must be non-negative and non-decreasing");
    }

    // The pool-size law is the forward equation of one individual switching
    // between active and the dormant layers, so the uniformized semigroup
    // gives the exact solution.
    SparseCtmc q;
    q.n = C + 1;
    q.rows.resize(static_cast<size_t>(C + 1));
    for (int m = 0; m < C; ++m) {
        q.add(0, m + 1, r.cA[static_cast<size_t>(m)]);
        q.add(m + 1, 0, r.cD[static_cast<size_t>(m)]);
    }
    q.finalize();

    MoranOdeResult out;
    out.times = times;
    std::vector<double> cur = z0;
    double prev = 0;
    for (double t : times) {
        cur = q.propagate(cur, t - prev);
        prev = t;
        out.z.push_back(cur);
    }
    const double scale = r.timeScale();
    out.fixedPoint.assign(static_cast<size_t>(C + 1), 0.0);
    out.fixedPoint[0] = 1.0 / scale;
    for (int m = 0; m < C; ++m) out.fixedPoint[static_cast<size_t>(m + 1)] = r.Km(m) / scale;
    return out;
}

double moran_transform_x(double x, const MoranRates& r) { return r.timeScale() * x; }

double moran_transform_y(double y, int m, const MoranRates& r) {
    if (m < 0 || m >= r.colours()) throw ConfigError("moran_transform_y: colour out of range");
    return r.timeScale() * (r.cD[static_cast<size_t>(m)] / r.cA[static_cast<size_t>(m)]) * y;
}

double moran_time(double fwTime, const MoranRates& r) { return fwTime / r.timeScale(); }

TransformedMoran moran_transformed_moments(const MoranRates& r, std::int64_t N, double x0Active,
                                           double y0Dormant, const std::vector<double>& outTimes,
                                           std::int64_t replicas, std::uint64_t masterSeed,
                                           int threads) {
    r.validate();
    if (replicas < 2) throw ConfigError("moran_transformed_moments: need replicas >= 2");
    if (outTimes.empty()) throw ConfigError("moran_transformed_moments: need output times");
    for (size_t i = 0; i < outTimes.size(); ++i) {
        if (!(outTimes[i] >= 0) || (i > 0 && outTimes[i] < outTimes[i - 1]))
            throw ConfigError(
                "moran_transformed_moments: times must be non-negative and non-decreasing");
    }
    const int C = r.colours();
    const auto T = static_cast<std::int64_t>(outTimes.size());
    const auto R = static_cast<size_t>(replicas);

    // comparison clock t -> native chain clock N t / (1 + sum K)
    std::vector<double> native(outTimes.size());
    for (size_t i = 0; i < outTimes.size(); ++i)
        native[i] = static_cast<double>(N) * moran_time(outTimes[i], r);

    std::vector<double> xs(static_cast<size_t>(T) * R);
    std::vector<double> ys(static_cast<size_t>(C * T) * R);
    run_replicas(replicas, threads, [&](std::int64_t rep) {
        Rng rng = make_stream(masterSeed, static_cast<std::uint64_t>(rep), stream_tag::moran);
        MoranState st = MoranState::equilibrium_start(N, r, x0Active, y0Dormant);
        for (std::int64_t i = 0; i < T; ++i) {
            run_moran(st, r, native[static_cast<size_t>(i)], rng);
            const double x = static_cast<double>(st.X) / static_cast<double>(N);
            xs[static_cast<size_t>(i) * R + static_cast<size_t>(rep)] = moran_transform_x(x, r);
            for (int m = 0; m < C; ++m) {
                const double y = static_cast<double>(st.Y[static_cast<size_t>(m)]) /
                                 static_cast<double>(N);
                ys[(static_cast<size_t>(m * T + i)) * R + static_cast<size_t>(rep)] =
                    moran_transform_y(y, m, r);
            }
        }
    });

    TransformedMoran out;
    out.times = outTimes;
    out.replicas = replicas;
    out.timeScale = r.timeScale();
    for (int m = 0; m < C; ++m) {
        out.Km.push_back(r.Km(m));
        out.em.push_back(r.em(m));
    }
    std::vector<double> slot(R);
    for (std::int64_t i = 0; i < T; ++i) {
        std::copy_n(xs.begin() + static_cast<std::ptrdiff_t>(static_cast<size_t>(i) * R),
                    static_cast<std::ptrdiff_t>(R), slot.begin());
        out.xbar.push_back(mean_se(slot));
    }
    out.ybar.resize(static_cast<size_t>(C));
    for (int m = 0; m < C; ++m) {
        for (std::int64_t i = 0; i < T; ++i) {
            std::copy_n(ys.begin() + static_cast<std::ptrdiff_t>(static_cast<size_t>(m * T + i) * R),
                        static_cast<std::ptrdiff_t>(R), slot.begin());
            out.ybar[static_cast<size_t>(m)].push_back(mean_se(slot));
        }
    }
    return out;
}

} // namespace seedbank
