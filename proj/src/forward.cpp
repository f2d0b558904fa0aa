#include "seedbank/forward.hpp"

#include <algorithm>
#include <cmath>

#include "seedbank/parallel.hpp"

namespace seedbank {

void ModelParams::validate() const {
    if (model < 1 || model > 3) throw ConfigError("model must be 1, 2 or 3");
    mig.validate();
    sb.validate();
    g.validate();
    if (model == 1 && sb.kind != SeedBankSpec::Kind::Single)
        throw ConfigError("model 1 has a single colour; use SeedBankSpec::single");
    if (model == 3) {
        if (!disp) throw ConfigError("model 3 needs a displacement kernel");
        disp->validate();
        if (disp->torus != mig.torus)
            throw ConfigError("displacement kernel must live on the migration torus");
    } else if (disp) {
        throw ConfigError("displacement kernel is only meaningful for model 3");
    }
}

InitSpec InitSpec::constant(double x0, double y0) {
    InitSpec s;
    s.kind = Kind::Constant;
    s.x0 = x0;
    s.y0 = y0;
    if (!(x0 >= 0 && x0 <= 1 && y0 >= 0 && y0 <= 1))
        throw ConfigError("initial frequencies must lie in [0,1]");
    return s;
}

InitSpec InitSpec::iid_uniform() {
    InitSpec s;
    s.kind = Kind::IidUniform;
    return s;
}

InitSpec InitSpec::explicit_values(std::vector<double> x, std::vector<double> y) {
    InitSpec s;
    s.kind = Kind::Explicit;
    s.x = std::move(x);
    s.y = std::move(y);
    for (double v : s.x)
        if (!(v >= 0 && v <= 1)) throw ConfigError("initial frequencies must lie in [0,1]");
    for (double v : s.y)
        if (!(v >= 0 && v <= 1)) throw ConfigError("initial frequencies must lie in [0,1]");
    return s;
}

SystemState init_state(const ModelParams& p, const InitSpec& init, Rng& rng) {
    SystemState s;
    s.torus = p.mig.torus;
    s.colours = p.colours();
    const auto V = s.torus.sites();
    s.x.assign(static_cast<size_t>(V), 0.0);
    s.y.assign(static_cast<size_t>(s.colours) * static_cast<size_t>(V), 0.0);
    switch (init.kind) {
    case InitSpec::Kind::Constant:
        std::fill(s.x.begin(), s.x.end(), init.x0);
        std::fill(s.y.begin(), s.y.end(), init.y0);
        break;
    case InitSpec::Kind::IidUniform:
        for (auto& v : s.x) v = rng.uniform();
        for (auto& v : s.y) v = rng.uniform();
        break;
    case InitSpec::Kind::Explicit:
        if (init.x.size() != s.x.size() || init.y.size() != s.y.size())
            throw ConfigError("explicit initial state has the wrong size for this torus");
        s.x = init.x;
        s.y = init.y;
        break;
    }
    return s;
}

DriftPlan DriftPlan::build(const ModelParams& p, const Torus& torus) {
    DriftPlan plan;
    plan.V = torus.sites();
    const WalkKernel mig = p.mig.torus == torus ? p.mig : p.mig.on_torus(torus);
    plan.migRates = mig.rates;
    plan.mig = neighbor_table(mig);
    if (p.model == 3) {
        const WalkKernel disp = p.disp->torus == torus ? *p.disp : p.disp->on_torus(torus);
        plan.dispProbs = disp.rates;
        for (auto& w : plan.dispProbs) w /= disp.totalRate;
        plan.dispFwd = neighbor_table(disp);
        plan.dispRev = reverse_neighbor_table(disp);
    }
    double maxWake = 0;
    for (int m = 0; m < p.colours(); ++m) maxWake = std::max(maxWake, p.sb.em(m));
    plan.rateScale = std::max(p.mig.totalRate + p.sb.chi(), maxWake);
    return plan;
}

void drift(const ModelParams& p, const DriftPlan& plan, const SystemState& s,
           std::vector<double>& dx, std::vector<double>& dy) {
    const auto V = static_cast<size_t>(plan.V);
    const int C = s.colours;
    dx.assign(V, 0.0);
    dy.assign(V * static_cast<size_t>(C), 0.0);

    // migration: sum_o rate(o) (x_{i+o} - x_i)
    for (size_t k = 0; k < plan.migRates.size(); ++k) {
        const double r = plan.migRates[k];
        const std::int32_t* nb = plan.mig.data() + k * V;
        for (size_t i = 0; i < V; ++i)
            dx[i] += r * (s.x[static_cast<size_t>(nb[i])] - s.x[i]);
    }

    if (p.model == 3) {
        // active components read the dormant field through the reversed
        // kernel, dormant components read the active field forward; this
        // adjointness is what makes the preserved mixture a martingale.
        for (int m = 0; m < C; ++m) {
            const double Ke = p.sb.Km(m) * p.sb.em(m);
            const double e = p.sb.em(m);
            const double* ym = s.y.data() + static_cast<size_t>(m) * V;
            double* dym = dy.data() + static_cast<size_t>(m) * V;
            for (size_t i = 0; i < V; ++i) {
                double cy = 0, cx = 0;
                for (size_t k = 0; k < plan.dispProbs.size(); ++k) {
                    const double w = plan.dispProbs[k];
                    cy += w * ym[plan.dispRev[k * V + i]];
                    cx += w * s.x[static_cast<size_t>(plan.dispFwd[k * V + i])];
                }
                dx[i] += Ke * (cy - s.x[i]);
                dym[i] = e * (cx - ym[i]);
            }
        }
    } else {
        for (int m = 0; m < C; ++m) {
            const double Ke = p.sb.Km(m) * p.sb.em(m);
            const double e = p.sb.em(m);
            const double* ym = s.y.data() + static_cast<size_t>(m) * V;
            double* dym = dy.data() + static_cast<size_t>(m) * V;
            for (size_t i = 0; i < V; ++i) {
                dx[i] += Ke * (ym[i] - s.x[i]);
                dym[i] = e * (s.x[i] - ym[i]);
            }
        }
    }
}

double rate_scale(const ModelParams& p) {
    double maxWake = 0;
    for (int m = 0; m < p.colours(); ++m) maxWake = std::max(maxWake, p.sb.em(m));
    return std::max(p.mig.totalRate + p.sb.chi(), maxWake);
}

double stable_dt(const ModelParams& p) {
    return 0.01 / (rate_scale(p) + p.g.max_slope());
}

void em_step(SystemState& s, const ModelParams& p, const DriftPlan& plan,
             double dt, Rng& rng, EmWorkspace& w, std::int64_t* clampEvents) {
    if (!(dt > 0)) throw ConfigError("em_step: dt must be positive");
    if (dt * plan.rateScale > 0.1 * (1 + 1e-9))
        throw NumericError("em_step: dt too coarse for the jump rates (dt * rate > 0.1)");
    drift(p, plan, s, w.dx, w.dy);
    const auto V = static_cast<size_t>(plan.V);
    const double sq = std::sqrt(dt);
    for (size_t i = 0; i < V; ++i) {
        const double gx = p.g(s.x[i]);
        double nx = s.x[i] + dt * w.dx[i] + sq * std::sqrt(std::max(gx, 0.0)) * rng.normal();
        if (nx < 0.0 || nx > 1.0) {
            nx = std::clamp(nx, 0.0, 1.0);
            if (clampEvents) ++*clampEvents;
        }
        s.x[i] = nx;
    }
    for (size_t j = 0; j < s.y.size(); ++j) s.y[j] += dt * w.dy[j];
    s.t += dt;
}

double theta_of_state(const ModelParams& p, const SystemState& s) {
    const auto V = static_cast<size_t>(s.torus.sites());
    double xbar = 0;
    for (double v : s.x) xbar += v;
    xbar /= static_cast<double>(V);
    double acc = xbar;
    for (int m = 0; m < s.colours; ++m) {
        double ybar = 0;
        const double* ym = s.y.data() + static_cast<size_t>(m) * V;
        for (size_t i = 0; i < V; ++i) ybar += ym[i];
        acc += p.sb.Km(m) * ybar / static_cast<double>(V);
    }
    return acc / (1.0 + p.sb.rho_truncated());
}

namespace {

void check_out_times(const std::vector<double>& outTimes) {
    if (outTimes.empty()) throw ConfigError("need at least one output time");
    double prev = -1;
    for (double t : outTimes) {
        if (!(t >= 0) || !std::isfinite(t)) throw ConfigError("output times must be finite and >= 0");
        if (t <= prev) throw ConfigError("output times must be strictly increasing");
        prev = t;
    }
}

// Advances the state to `target` in uniform sub-steps no longer than dt.
void advance_to(SystemState& s, const ModelParams& p, const DriftPlan& plan,
                double dt, double target, Rng& rng, EmWorkspace& w,
                std::int64_t* clamps) {
    const double gap = target - s.t;
    if (gap <= 1e-12) return;
    const auto n = static_cast<std::int64_t>(std::ceil(gap / dt - 1e-9));
    const double h = gap / static_cast<double>(std::max<std::int64_t>(n, 1));
    for (std::int64_t k = 0; k < std::max<std::int64_t>(n, 1); ++k)
        em_step(s, p, plan, h, rng, w, clamps);
    s.t = target; // absorb roundoff
}

double heterozygosity_avg(const SystemState& s) {
    double acc = 0;
    for (double v : s.x) acc += v * (1 - v);
    return acc / static_cast<double>(s.x.size());
}

double mean_x(const SystemState& s) {
    double acc = 0;
    for (double v : s.x) acc += v;
    return acc / static_cast<double>(s.x.size());
}

} // namespace

ForwardObservables simulate(const ModelParams& p, const Torus& torus,
                            const InitSpec& init,
                            const std::vector<double>& outTimes,
                            std::int64_t replicas, std::uint64_t masterSeed,
                            const ForwardRunOptions& opts) {
    p.validate();
    check_out_times(outTimes);
    if (replicas < 1) throw ConfigError("need at least one replica");
    ModelParams pl = p;
    pl.mig = p.mig.on_torus(torus);
    if (p.disp) pl.disp = p.disp->on_torus(torus);
    const DriftPlan plan = DriftPlan::build(pl, torus);
    const double dt = opts.dt > 0 ? opts.dt : stable_dt(pl);
    if (dt * plan.rateScale > 0.1 * (1 + 1e-9))
        throw NumericError("simulate: requested dt too coarse for the jump rates");

    const auto T = outTimes.size();
    constexpr int nEst = 5; // theta, het0, hetAvg, x0, xAvg
    std::vector<double> slots(static_cast<size_t>(replicas) * T * nEst, 0.0);
    std::vector<std::int64_t> clamps(static_cast<size_t>(replicas), 0);

    run_replicas(replicas, opts.threads, [&](std::int64_t r) {
        Rng rInit = make_stream(masterSeed, static_cast<std::uint64_t>(r), stream_tag::forward_init);
        Rng rNoise = make_stream(masterSeed, static_cast<std::uint64_t>(r), stream_tag::forward_noise);
        SystemState s = init_state(pl, init, rInit);
        EmWorkspace w;
        double* out = slots.data() + static_cast<size_t>(r) * T * nEst;
        for (size_t ti = 0; ti < T; ++ti) {
            advance_to(s, pl, plan, dt, outTimes[ti], rNoise, w, &clamps[static_cast<size_t>(r)]);
            out[ti * nEst + 0] = theta_of_state(pl, s);
            out[ti * nEst + 1] = s.x[0] * (1 - s.x[0]);
            out[ti * nEst + 2] = heterozygosity_avg(s);
            out[ti * nEst + 3] = s.x[0];
            out[ti * nEst + 4] = mean_x(s);
        }
    });

    ForwardObservables obs;
    obs.times = outTimes;
    obs.dt = dt;
    obs.replicas = replicas;
    for (auto c : clamps) obs.clampEvents += c;
    std::vector<double> col(static_cast<size_t>(replicas));
    auto reduce = [&](int est) {
        std::vector<MeanSE> v(T);
        for (size_t ti = 0; ti < T; ++ti) {
            for (std::int64_t r = 0; r < replicas; ++r)
                col[static_cast<size_t>(r)] =
                    slots[static_cast<size_t>(r) * T * nEst + ti * nEst + static_cast<size_t>(est)];
            v[ti] = mean_se(col);
        }
        return v;
    };
    obs.theta = reduce(0);
    obs.hetSite0 = reduce(1);
    obs.hetAvg = reduce(2);
    obs.xSite0 = reduce(3);
    obs.xAvg = reduce(4);
    return obs;
}

std::vector<double> theta_trajectory(const ModelParams& p, const Torus& torus,
                                     const InitSpec& init,
                                     const std::vector<double>& outTimes,
                                     std::uint64_t seed,
                                     const ForwardRunOptions& opts) {
    p.validate();
    check_out_times(outTimes);
    ModelParams pl = p;
    pl.mig = p.mig.on_torus(torus);
    if (p.disp) pl.disp = p.disp->on_torus(torus);
    const DriftPlan plan = DriftPlan::build(pl, torus);
    const double dt = opts.dt > 0 ? opts.dt : stable_dt(pl);
    Rng rInit = make_stream(seed, 0, stream_tag::forward_init);
    Rng rNoise = make_stream(seed, 0, stream_tag::forward_noise);
    SystemState s = init_state(pl, init, rInit);
    EmWorkspace w;
    std::vector<double> vals;
    vals.reserve(outTimes.size());
    for (double t : outTimes) {
        advance_to(s, pl, plan, dt, t, rNoise, w, nullptr);
        vals.push_back(theta_of_state(pl, s));
    }
    return vals;
}

CoupledResult coupled_simulate(const ModelParams& p, const Torus& torus,
                               const InitSpec& initA, const InitSpec& initB,
                               const std::vector<double>& outTimes,
                               std::int64_t replicas, std::uint64_t masterSeed,
                               const ForwardRunOptions& opts) {
    p.validate();
    check_out_times(outTimes);
    if (replicas < 1) throw ConfigError("need at least one replica");
    ModelParams pl = p;
    pl.mig = p.mig.on_torus(torus);
    if (p.disp) pl.disp = p.disp->on_torus(torus);
    const DriftPlan plan = DriftPlan::build(pl, torus);
    const double dt = opts.dt > 0 ? opts.dt : stable_dt(pl);
    if (dt * plan.rateScale > 0.1 * (1 + 1e-9))
        throw NumericError("coupled_simulate: requested dt too coarse for the jump rates");
    const auto V = static_cast<size_t>(plan.V);
    const int C = pl.colours();

    const auto T = outTimes.size();
    std::vector<double> slots(static_cast<size_t>(replicas) * T, 0.0);
    std::vector<std::int64_t> clamps(static_cast<size_t>(replicas), 0);

    auto lyap = [&](const SystemState& a, const SystemState& b) {
        double acc = 0;
        for (size_t i = 0; i < V; ++i) acc += std::abs(a.x[i] - b.x[i]);
        for (int m = 0; m < C; ++m) {
            const double Km = pl.sb.Km(m);
            const double* ya = a.y.data() + static_cast<size_t>(m) * V;
            const double* yb = b.y.data() + static_cast<size_t>(m) * V;
            double colAcc = 0;
            for (size_t i = 0; i < V; ++i) colAcc += std::abs(ya[i] - yb[i]);
            acc += Km * colAcc;
        }
        return acc / static_cast<double>(V);
    };

    run_replicas(replicas, opts.threads, [&](std::int64_t r) {
        Rng rInitA = make_stream(masterSeed, static_cast<std::uint64_t>(r), stream_tag::forward_init);
        Rng rInitB = make_stream(masterSeed, static_cast<std::uint64_t>(r), stream_tag::coupled_init_b);
        Rng rNoise = make_stream(masterSeed, static_cast<std::uint64_t>(r), stream_tag::forward_noise);
        SystemState a = init_state(pl, initA, rInitA);
        SystemState b = init_state(pl, initB, rInitB);
        EmWorkspace wa, wb;
        std::int64_t* cl = &clamps[static_cast<size_t>(r)];
        double* out = slots.data() + static_cast<size_t>(r) * T;
        double t = 0;
        for (size_t ti = 0; ti < T; ++ti) {
            const double gap = outTimes[ti] - t;
            if (gap > 1e-12) {
                const auto n = static_cast<std::int64_t>(std::ceil(gap / dt - 1e-9));
                const double h = gap / static_cast<double>(std::max<std::int64_t>(n, 1));
                const double sq = std::sqrt(h);
                for (std::int64_t k = 0; k < std::max<std::int64_t>(n, 1); ++k) {
                    // one Brownian increment per site drives both copies
                    drift(pl, plan, a, wa.dx, wa.dy);
                    drift(pl, plan, b, wb.dx, wb.dy);
                    for (size_t i = 0; i < V; ++i) {
                        const double z = rNoise.normal();
                        double na = a.x[i] + h * wa.dx[i] +
                                    sq * std::sqrt(std::max(pl.g(a.x[i]), 0.0)) * z;
                        double nb = b.x[i] + h * wb.dx[i] +
                                    sq * std::sqrt(std::max(pl.g(b.x[i]), 0.0)) * z;
                        if (na < 0.0 || na > 1.0) {
                            na = std::clamp(na, 0.0, 1.0);
                            ++*cl;
                        }
                        if (nb < 0.0 || nb > 1.0) {
                            nb = std::clamp(nb, 0.0, 1.0);
                            ++*cl;
                        }
                        a.x[i] = na;
                        b.x[i] = nb;
                    }
                    for (size_t j = 0; j < a.y.size(); ++j) {
                        a.y[j] += h * wa.dy[j];
                        b.y[j] += h * wb.dy[j];
                    }
                }
                t = outTimes[ti];
            }
            out[ti] = lyap(a, b);
        }
    });

    CoupledResult res;
    res.times = outTimes;
    res.dt = dt;
    for (auto c : clamps) res.clampEvents += c;
    std::vector<double> col(static_cast<size_t>(replicas));
    res.lyapunov.resize(T);
    for (size_t ti = 0; ti < T; ++ti) {
        for (std::int64_t r = 0; r < replicas; ++r)
            col[static_cast<size_t>(r)] = slots[static_cast<size_t>(r) * T + ti];
        res.lyapunov[ti] = mean_se(col);
    }
    return res;
}

} // namespace seedbank
