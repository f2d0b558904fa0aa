#include "seedbank/duality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "seedbank/errors.hpp"
#include "seedbank/parallel.hpp"

namespace seedbank {

namespace {

double ipow(double v, int n) {
    double r = 1;
    for (int i = 0; i < n; ++i) r *= v;
    return r;
}

double component_value(const SystemState& s, std::int64_t key) {
    const int Cp1 = s.colours + 1;
    const std::int64_t site = key / Cp1;
    const int layer = static_cast<int>(key % Cp1);
    if (layer == 0) return s.x[static_cast<size_t>(site)];
    const std::int64_t V = s.torus.sites();
    return s.y[static_cast<size_t>((layer - 1) * V + site)];
}

// Number of uniform Euler steps that lands exactly on the horizon.
std::int64_t step_count(double span, double dt) {
    if (span <= 0) return 0;
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(span / dt - 1e-9)));
}

void advance(SystemState& s, const ModelParams& p, const DriftPlan& plan, double target,
             double dt, Rng& rng, EmWorkspace& w, std::int64_t* clamps) {
    const double span = target - s.t;
    const std::int64_t n = step_count(span, dt);
    if (n == 0) {
        s.t = target;
        return;
    }
    const double h = span / static_cast<double>(n);
    for (std::int64_t i = 0; i < n; ++i) em_step(s, p, plan, h, rng, w, clamps);
    s.t = target;
}

// Offset table index of (coords(j) - coords(i)) on the torus, so a single
// propagated row from site 0 serves every start site.
std::vector<std::int64_t> difference_map(const Torus& torus) {
    const std::int64_t V = torus.sites();
    std::vector<int> cs(static_cast<size_t>(V) * 6);
    for (std::int64_t i = 0; i < V; ++i) torus.coords(i, cs.data() + i * 6);
    std::vector<std::int64_t> dmap(static_cast<size_t>(V * V));
    int diff[6];
    for (std::int64_t i = 0; i < V; ++i)
        for (std::int64_t j = 0; j < V; ++j) {
            for (int a = 0; a < torus.dim; ++a)
                diff[a] = torus.wrap(cs[static_cast<size_t>(j * 6 + a)] -
                                     cs[static_cast<size_t>(i * 6 + a)]);
            dmap[static_cast<size_t>(i * V + j)] = torus.index(diff);
        }
    return dmap;
}

// b rows from (site 0, layer 0) at every node of a uniform grid, computed by
// stepping the semigroup one increment at a time.
std::vector<std::vector<double>> grid_rows_from_origin(const SparseCtmc& b, double h, int n) {
    std::vector<std::vector<double>> rows(static_cast<size_t>(n + 1));
    std::vector<double> cur(static_cast<size_t>(b.n), 0.0);
    cur[0] = 1.0; // (site 0, active) is component key 0 for any colour count
    rows[0] = cur;
    for (int u = 1; u <= n; ++u) {
        cur = b.propagate(cur, h);
        rows[static_cast<size_t>(u)] = cur;
    }
    return rows;
}

} // namespace

MomentSpec MomentSpec::from_lineages(const Torus& torus, int colours,
                                     const std::vector<std::pair<std::int64_t, int>>& lineages,
                                     int cap) {
    MomentSpec s;
    s.degreeCap = cap;
    const std::int64_t Cp1 = colours + 1;
    for (const auto& [site, layer] : lineages) {
        if (site < 0 || site >= torus.sites())
            throw ConfigError("moment lineage site out of range");
        if (layer < 0 || layer > colours)
            throw ConfigError("moment lineage layer out of range");
        s.powers[site * Cp1 + layer] += 1;
    }
    s.validate(torus, colours);
    return s;
}

std::vector<std::pair<std::int64_t, int>> MomentSpec::lineages(int colours) const {
    std::vector<std::pair<std::int64_t, int>> out;
    const std::int64_t Cp1 = colours + 1;
    for (const auto& [k, n] : powers) {
        const std::int64_t site = k / Cp1;
        const int layer = static_cast<int>(k % Cp1);
        for (int i = 0; i < n; ++i) out.emplace_back(site, layer);
    }
    return out;
}

int MomentSpec::degree() const {
    int d = 0;
    for (const auto& [k, n] : powers) d += n;
    return d;
}

void MomentSpec::validate(const Torus& torus, int colours) const {
    if (degreeCap < 1) throw ConfigError("moment degree cap must be at least 1");
    if (powers.empty()) throw ConfigError("moment spec needs at least one component");
    const std::int64_t nComp = torus.sites() * (colours + 1);
    for (const auto& [k, n] : powers) {
        if (k < 0 || k >= nComp) throw ConfigError("moment component key out of range");
        if (n < 1) throw ConfigError("moment exponents must be positive");
    }
    if (degree() > degreeCap)
        throw ConfigError("moment degree " + std::to_string(degree()) + " exceeds cap " +
                          std::to_string(degreeCap));
}

SparseCtmc bkernel_ctmc(const ModelParams& p) {
    p.validate();
    // The lineage kernel carries migration, dormancy and wake moves only; a
    // single lineage never coalesces, so the diffusion never enters. Swap in
    // the canonical noise to satisfy the dual plan constructor.
    ModelParams q = p;
    q.g = DiffusionFunction::fisher_wright(1.0);
    const DualPlan plan = DualPlan::build(q);
    const Torus& torus = p.mig.torus;
    const std::int64_t nComp = torus.sites() * (p.colours() + 1);
    SparseCtmc b;
    b.n = nComp;
    b.rows.resize(static_cast<size_t>(nComp));
    for (std::int64_t comp = 0; comp < nComp; ++comp) {
        std::map<std::int64_t, std::int64_t> counts{{comp, 1}};
        for_each_dual_move(counts, torus, plan,
                           [&](std::int64_t from, std::int64_t to, double rate, bool coal) {
                               if (!coal) b.add(from, to, rate);
                           });
    }
    b.finalize();
    return b;
}

std::vector<double> bkernel_row(const ModelParams& p, double t, std::int64_t site, int layer) {
    const Torus& torus = p.mig.torus;
    const int Cp1 = p.colours() + 1;
    if (site < 0 || site >= torus.sites()) throw ConfigError("lineage site out of range");
    if (layer < 0 || layer >= Cp1) throw ConfigError("lineage layer out of range");
    if (!(t >= 0)) throw ConfigError("lineage kernel time must be nonnegative");
    const SparseCtmc b = bkernel_ctmc(p);
    std::vector<double> delta(static_cast<size_t>(b.n), 0.0);
    delta[static_cast<size_t>(site * Cp1 + layer)] = 1.0;
    return b.propagate(delta, t);
}

MeanField first_moment(const ModelParams& p, const std::vector<double>& x0,
                       const std::vector<double>& y0, double t) {
    p.validate();
    const Torus& torus = p.mig.torus;
    const std::int64_t V = torus.sites();
    const int C = p.colours();
    const int Cp1 = C + 1;
    if (static_cast<std::int64_t>(x0.size()) != V ||
        static_cast<std::int64_t>(y0.size()) != V * C)
        throw ConfigError("initial profile sizes do not match the torus");
    if (!(t >= 0)) throw ConfigError("time must be nonnegative");

    const SparseCtmc b = bkernel_ctmc(p);
    const std::vector<std::int64_t> dmap = difference_map(torus);

    // One propagated row per start layer; all start sites are translates.
    std::vector<std::vector<double>> rowByLayer(static_cast<size_t>(Cp1));
    for (int lam = 0; lam < Cp1; ++lam) {
        std::vector<double> delta(static_cast<size_t>(b.n), 0.0);
        delta[static_cast<size_t>(lam)] = 1.0; // (site 0, layer lam)
        rowByLayer[static_cast<size_t>(lam)] = b.propagate(delta, t);
    }

    auto expectation = [&](std::int64_t i, int lam) {
        const std::vector<double>& row = rowByLayer[static_cast<size_t>(lam)];
        double acc = 0;
        for (std::int64_t j = 0; j < V; ++j) {
            const std::int64_t rel = dmap[static_cast<size_t>(i * V + j)];
            const size_t base = static_cast<size_t>(rel * Cp1);
            acc += row[base] * x0[static_cast<size_t>(j)];
            for (int m = 0; m < C; ++m)
                acc += row[base + static_cast<size_t>(m) + 1] *
                       y0[static_cast<size_t>(m * V + j)];
        }
        return acc;
    };

    MeanField out;
    out.x.resize(static_cast<size_t>(V));
    out.y.resize(static_cast<size_t>(V * C));
    for (std::int64_t i = 0; i < V; ++i) out.x[static_cast<size_t>(i)] = expectation(i, 0);
    for (int m = 0; m < C; ++m)
        for (std::int64_t i = 0; i < V; ++i)
            out.y[static_cast<size_t>(m * V + i)] = expectation(i, m + 1);
    return out;
}

MeanSE forward_moment(const ModelParams& p, const MomentSpec& spec, double T,
                      const InitSpec& init, std::int64_t replicas, std::uint64_t masterSeed,
                      const ForwardRunOptions& opts) {
    p.validate();
    const Torus& torus = p.mig.torus;
    spec.validate(torus, p.colours());
    if (!p.g.is_fisher_wright())
        throw ConfigError("the moment estimator faces the coalescent dual and needs "
                          "fisher-wright noise; use the mean-field estimator for general g");
    if (!(T >= 0)) throw ConfigError("horizon must be nonnegative");
    if (replicas < 2) throw ConfigError("need at least two replicas");

    const double dt = opts.dt > 0 ? opts.dt : stable_dt(p);
    const DriftPlan plan = DriftPlan::build(p, torus);
    std::vector<double> slots(static_cast<size_t>(replicas), 0.0);

    run_replicas(replicas, opts.threads, [&](std::int64_t r) {
        Rng ri = make_stream(masterSeed, static_cast<std::uint64_t>(r), stream_tag::forward_init);
        Rng rn = make_stream(masterSeed, static_cast<std::uint64_t>(r), stream_tag::forward_noise);
        SystemState s = init_state(p, init, ri);
        EmWorkspace w;
        advance(s, p, plan, T, dt, rn, w, nullptr);
        double prod = 1;
        for (const auto& [k, n] : spec.powers) prod *= ipow(component_value(s, k), n);
        slots[static_cast<size_t>(r)] = prod;
    });
    return mean_se(slots);
}

MeanFieldEstimate forward_mean_field(const ModelParams& p, const InitSpec& init, double t,
                                     std::int64_t replicas, std::uint64_t masterSeed,
                                     const ForwardRunOptions& opts) {
    p.validate();
    if (!(t >= 0)) throw ConfigError("horizon must be nonnegative");
    if (replicas < 2) throw ConfigError("need at least two replicas");
    const Torus& torus = p.mig.torus;
    const std::int64_t V = torus.sites();
    const int C = p.colours();
    const std::int64_t nComp = V * (1 + C);

    const double dt = opts.dt > 0 ? opts.dt : stable_dt(p);
    const DriftPlan plan = DriftPlan::build(p, torus);
    std::vector<double> slots(static_cast<size_t>(replicas * nComp), 0.0);
    std::vector<std::int64_t> clamps(static_cast<size_t>(replicas), 0);

    run_replicas(replicas, opts.threads, [&](std::int64_t r) {
        Rng ri = make_stream(masterSeed, static_cast<std::uint64_t>(r), stream_tag::forward_init);
        Rng rn = make_stream(masterSeed, static_cast<std::uint64_t>(r), stream_tag::forward_noise);
        SystemState s = init_state(p, init, ri);
        EmWorkspace w;
        advance(s, p, plan, t, dt, rn, w, &clamps[static_cast<size_t>(r)]);
        double* row = slots.data() + static_cast<size_t>(r * nComp);
        for (std::int64_t i = 0; i < V; ++i) row[i] = s.x[static_cast<size_t>(i)];
        for (std::int64_t i = 0; i < V * C; ++i) row[V + i] = s.y[static_cast<size_t>(i)];
    });

    MeanFieldEstimate out;
    out.replicas = replicas;
    for (auto c : clamps) out.clampEvents += c;
    std::vector<double> col(static_cast<size_t>(replicas));
    auto reduce = [&](std::int64_t comp) {
        for (std::int64_t r = 0; r < replicas; ++r)
            col[static_cast<size_t>(r)] = slots[static_cast<size_t>(r * nComp + comp)];
        return mean_se(col);
    };
    out.x.resize(static_cast<size_t>(V));
    out.y.resize(static_cast<size_t>(V * C));
    for (std::int64_t i = 0; i < V; ++i) out.x[static_cast<size_t>(i)] = reduce(i);
    for (std::int64_t i = 0; i < V * C; ++i) out.y[static_cast<size_t>(i)] = reduce(V + i);
    return out;
}

DualityOutcome duality_gap(const ModelParams& p, const MomentSpec& spec, double T,
                           const InitSpec& init, std::int64_t replicasForward,
                           std::int64_t replicasDual, std::uint64_t masterSeed,
                           const ForwardRunOptions& fopts, int dualThreads) {
    DualityOutcome o;
    o.forward = forward_moment(p, spec, T, init, replicasForward, masterSeed, fopts);
    o.dual = dual_moment(p, spec.lineages(p.colours()), T, init, replicasDual, masterSeed,
                         dualThreads);
    o.gap = o.forward.mean - o.dual.mean;
    o.sigma = std::sqrt(o.forward.se * o.forward.se + o.dual.se * o.dual.se);
    if (o.sigma > 0)
        o.zscore = o.gap / o.sigma;
    else
        o.zscore = o.gap == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    return o;
}

LocalTestFunction monomial_function(const MomentSpec& spec) {
    LocalTestFunction f;
    std::vector<int> pw;
    for (const auto& [k, n] : spec.powers) {
        f.comps.push_back(k);
        pw.push_back(n);
    }
    f.value = [pw](const std::vector<double>& v) {
        double r = 1;
        for (size_t a = 0; a < pw.size(); ++a) r *= ipow(v[a], pw[a]);
        return r;
    };
    auto rest = [pw](const std::vector<double>& v, int skip) {
        double r = 1;
        for (size_t b = 0; b < pw.size(); ++b)
            if (static_cast<int>(b) != skip) r *= ipow(v[b], pw[b]);
        return r;
    };
    f.d1 = [pw, rest](const std::vector<double>& v, int a) {
        const int n = pw[static_cast<size_t>(a)];
        return n * ipow(v[static_cast<size_t>(a)], n - 1) * rest(v, a);
    };
    f.d2 = [pw, rest](const std::vector<double>& v, int a) {
        const int n = pw[static_cast<size_t>(a)];
        if (n < 2) return 0.0;
        return static_cast<double>(n) * (n - 1) * ipow(v[static_cast<size_t>(a)], n - 2) *
               rest(v, a);
    };
    return f;
}

double generator_apply(const ModelParams& p, const SystemState& s, const LocalTestFunction& f) {
    p.validate();
    const std::int64_t V = s.torus.sites();
    const int Cp1 = s.colours + 1;
    const DriftPlan plan = DriftPlan::build(p, s.torus);
    std::vector<double> dx, dy;
    drift(p, plan, s, dx, dy);

    std::vector<double> vals(f.comps.size());
    for (size_t a = 0; a < f.comps.size(); ++a) vals[a] = component_value(s, f.comps[a]);

    double acc = 0;
    for (size_t a = 0; a < f.comps.size(); ++a) {
        const std::int64_t k = f.comps[a];
        const std::int64_t site = k / Cp1;
        const int layer = static_cast<int>(k % Cp1);
        const double dv = layer == 0
                              ? dx[static_cast<size_t>(site)]
                              : dy[static_cast<size_t>((layer - 1) * V + site)];
        acc += dv * f.d1(vals, static_cast<int>(a));
        if (layer == 0)
            acc += 0.5 * p.g(s.x[static_cast<size_t>(site)]) * f.d2(vals, static_cast<int>(a));
    }
    return acc;
}

double dual_generator_apply(const ModelParams& p, const SystemState& s, const MomentSpec& spec) {
    p.validate();
    spec.validate(s.torus, p.colours());
    const DualPlan plan = DualPlan::build(p);

    std::map<std::int64_t, std::int64_t> counts;
    for (const auto& [k, n] : spec.powers) counts[k] = n;
    auto payoff = [&](const std::map<std::int64_t, std::int64_t>& c) {
        double r = 1;
        for (const auto& [k, n] : c) r *= ipow(component_value(s, k), static_cast<int>(n));
        return r;
    };
    const double base = payoff(counts);

    double acc = 0;
    for_each_dual_move(counts, s.torus, plan,
                       [&](std::int64_t from, std::int64_t to, double rate, bool coal) {
                           auto nc = counts;
                           auto it = nc.find(from);
                           if (--(it->second) == 0) nc.erase(it);
                           if (!coal) nc[to] += 1;
                           acc += rate * (payoff(nc) - base);
                       });
    return acc;
}

GeneratorCheckReport generator_identity_check(const ModelParams& p, int probes,
                                              std::uint64_t seed, int maxDegree) {
    p.validate();
    if (probes < 1) throw ConfigError("need at least one probe");
    if (maxDegree < 1) throw ConfigError("probe degree must be at least 1");
    const Torus& torus = p.mig.torus;
    const std::int64_t V = torus.sites();
    const int C = p.colours();

    Rng rng = make_stream(seed, 0, stream_tag::probe);
    GeneratorCheckReport rep;
    rep.probes = probes;
    for (int i = 0; i < probes; ++i) {
        SystemState s;
        s.torus = torus;
        s.colours = C;
        s.x.resize(static_cast<size_t>(V));
        s.y.resize(static_cast<size_t>(V * C));
        for (auto& v : s.x) v = rng.uniform();
        for (auto& v : s.y) v = rng.uniform();

        const int deg = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(maxDegree)));
        std::vector<std::pair<std::int64_t, int>> lin;
        for (int a = 0; a < deg; ++a)
            lin.emplace_back(static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(V))),
                             static_cast<int>(rng.below(static_cast<std::uint64_t>(C + 1))));
        const MomentSpec spec = MomentSpec::from_lineages(torus, C, lin, maxDegree);

        const double g = generator_apply(p, s, monomial_function(spec));
        const double h = dual_generator_apply(p, s, spec);
        rep.maxResidual = std::max(rep.maxResidual, std::abs(g - h));
    }
    return rep;
}

SecondMomentOracle second_moment_fw(const ModelParams& p, const std::vector<double>& x0,
                                    const std::vector<double>& y0, std::int64_t sitei,
                                    std::int64_t sitej, double t, int gridSteps) {
    p.validate();
    if (!p.g.is_fisher_wright())
        throw ConfigError("the closed moment march needs fisher-wright noise; use the "
                          "plug-in check for general g");
    const Torus& torus = p.mig.torus;
    const std::int64_t V = torus.sites();
    const int C = p.colours();
    const int Cp1 = C + 1;
    if (static_cast<std::int64_t>(x0.size()) != V ||
        static_cast<std::int64_t>(y0.size()) != V * C)
        throw ConfigError("initial profile sizes do not match the torus");
    if (sitei < 0 || sitei >= V || sitej < 0 || sitej >= V)
        throw ConfigError("site out of range");
    if (!(t >= 0)) throw ConfigError("time must be nonnegative");

    SecondMomentOracle out;
    out.gridSteps = gridSteps;
    if (t == 0) {
        out.twoWalk = x0[static_cast<size_t>(sitei)] * x0[static_cast<size_t>(sitej)];
        out.value = out.twoWalk;
        return out;
    }
    if (gridSteps < 2) throw ConfigError("moment march needs at least two grid steps");

    const double d = p.g.d;
    const double h = t / gridSteps;
    const int n = gridSteps;
    const SparseCtmc b = bkernel_ctmc(p);
    const std::vector<std::int64_t> dmap = difference_map(torus);
    const auto rows0 = grid_rows_from_origin(b, h, n);

    // Active-to-active restriction of each row; index by relative site.
    std::vector<std::vector<double>> act(static_cast<size_t>(n + 1),
                                         std::vector<double>(static_cast<size_t>(V)));
    for (int u = 0; u <= n; ++u)
        for (std::int64_t j = 0; j < V; ++j)
            act[static_cast<size_t>(u)][static_cast<size_t>(j)] =
                rows0[static_cast<size_t>(u)][static_cast<size_t>(j * Cp1)];

    // Exact first moments at every node: translated row against the profile.
    std::vector<std::vector<double>> m1(static_cast<size_t>(n + 1),
                                        std::vector<double>(static_cast<size_t>(V)));
    for (int u = 0; u <= n; ++u) {
        const std::vector<double>& row = rows0[static_cast<size_t>(u)];
        for (std::int64_t k = 0; k < V; ++k) {
            double acc = 0;
            for (std::int64_t j = 0; j < V; ++j) {
                const std::int64_t rel = dmap[static_cast<size_t>(k * V + j)];
                const size_t base = static_cast<size_t>(rel * Cp1);
                acc += row[base] * x0[static_cast<size_t>(j)];
                for (int m = 0; m < C; ++m)
                    acc += row[base + static_cast<size_t>(m) + 1] *
                           y0[static_cast<size_t>(m * V + j)];
            }
            m1[static_cast<size_t>(u)][static_cast<size_t>(k)] = acc;
        }
    }

    // March the diagonal D_k(s) = E[x_k(s)^2]; the trapezoid node at s itself
    // enters through E[g] = d (m1 - D), linear in D, so each step is solved
    // in closed form. With noise amplitude sqrt(g) the covariation source
    // enters the product moment with unit weight.
    std::vector<std::vector<double>> eg(static_cast<size_t>(n + 1),
                                        std::vector<double>(static_cast<size_t>(V)));
    for (std::int64_t k = 0; k < V; ++k) {
        const double x = x0[static_cast<size_t>(k)];
        eg[0][static_cast<size_t>(k)] = d * (x - x * x);
    }
    for (int u = 1; u <= n; ++u) {
        for (std::int64_t k = 0; k < V; ++k) {
            double known = 0;
            for (int v = 0; v < u; ++v) {
                const double w = v == 0 ? 0.5 * h : h;
                const std::vector<double>& a = act[static_cast<size_t>(u - v)];
                double s1 = 0;
                for (std::int64_t l = 0; l < V; ++l) {
                    const double bb = a[static_cast<size_t>(dmap[static_cast<size_t>(k * V + l)])];
                    s1 += bb * bb * eg[static_cast<size_t>(v)][static_cast<size_t>(l)];
                }
                known += w * s1;
            }
            const double m = m1[static_cast<size_t>(u)][static_cast<size_t>(k)];
            const double D = (m * m + known + 0.5 * h * d * m) / (1 + 0.5 * h * d);
            eg[static_cast<size_t>(u)][static_cast<size_t>(k)] = d * (m - D);
        }
    }

    out.twoWalk = m1[static_cast<size_t>(n)][static_cast<size_t>(sitei)] *
                  m1[static_cast<size_t>(n)][static_cast<size_t>(sitej)];
    double integral = 0;
    for (int v = 0; v <= n; ++v) {
        const double w = (v == 0 || v == n) ? 0.5 * h : h;
        const std::vector<double>& a = act[static_cast<size_t>(n - v)];
        double s1 = 0;
        for (std::int64_t l = 0; l < V; ++l)
            s1 += a[static_cast<size_t>(dmap[static_cast<size_t>(sitei * V + l)])] *
                  a[static_cast<size_t>(dmap[static_cast<size_t>(sitej * V + l)])] *
                  eg[static_cast<size_t>(v)][static_cast<size_t>(l)];
        integral += w * s1;
    }
    out.integral = integral;
    out.value = out.twoWalk + integral;
    return out;
}

PluginMomentCheck second_moment_plugin_check(const ModelParams& p, const InitSpec& init,
                                             std::int64_t sitei, std::int64_t sitej, double t,
                                             std::int64_t replicas, std::uint64_t masterSeed,
                                             int gridSteps, const ForwardRunOptions& opts) {
    p.validate();
    if (init.kind == InitSpec::Kind::IidUniform)
        throw ConfigError("the plug-in moment relation needs a deterministic start");
    const Torus& torus = p.mig.torus;
    const std::int64_t V = torus.sites();
    const int C = p.colours();
    const int Cp1 = C + 1;
    if (sitei < 0 || sitei >= V || sitej < 0 || sitej >= V)
        throw ConfigError("site out of range");
    if (!(t > 0)) throw ConfigError("horizon must be positive");
    if (gridSteps < 2) throw ConfigError("need at least two grid steps");
    if (replicas < 2) throw ConfigError("need at least two replicas");

    // Deterministic initial profile as vectors.
    std::vector<double> x0(static_cast<size_t>(V)), y0(static_cast<size_t>(V * C));
    if (init.kind == InitSpec::Kind::Constant) {
        std::fill(x0.begin(), x0.end(), init.x0);
        std::fill(y0.begin(), y0.end(), init.y0);
    } else {
        x0 = init.x;
        y0 = init.y;
        if (static_cast<std::int64_t>(x0.size()) != V ||
            static_cast<std::int64_t>(y0.size()) != V * C)
            throw ConfigError("explicit initial profile sizes do not match the torus");
    }

    const int n = gridSteps;
    const double h = t / n;
    const SparseCtmc b = bkernel_ctmc(p);
    const std::vector<std::int64_t> dmap = difference_map(torus);
    const auto rows0 = grid_rows_from_origin(b, h, n);

    // Exact two-walk term from the lineage kernel (first moments are
    // noise-free, so this is valid for any diffusion).
    double m1i = 0, m1j = 0;
    {
        const std::vector<double>& row = rows0[static_cast<size_t>(n)];
        auto dot = [&](std::int64_t k) {
            double acc = 0;
            for (std::int64_t j = 0; j < V; ++j) {
                const std::int64_t rel = dmap[static_cast<size_t>(k * V + j)];
                const size_t base = static_cast<size_t>(rel * Cp1);
                acc += row[base] * x0[static_cast<size_t>(j)];
                for (int m = 0; m < C; ++m)
                    acc += row[base + static_cast<size_t>(m) + 1] *
                           y0[static_cast<size_t>(m * V + j)];
            }
            return acc;
        };
        m1i = dot(sitei);
        m1j = dot(sitej);
    }
    const double twoWalk = m1i * m1j;

    // Quadrature weights against g(x_l(s_v)), folded with both kernel rows.
    std::vector<std::vector<double>> W(static_cast<size_t>(n + 1),
                                       std::vector<double>(static_cast<size_t>(V)));
    for (int v = 0; v <= n; ++v) {
        const double wq = (v == 0 || v == n) ? 0.5 * h : h;
        const std::vector<double>& row = rows0[static_cast<size_t>(n - v)];
        for (std::int64_t l = 0; l < V; ++l) {
            const double bi =
                row[static_cast<size_t>(dmap[static_cast<size_t>(sitei * V + l)] * Cp1)];
            const double bj =
                row[static_cast<size_t>(dmap[static_cast<size_t>(sitej * V + l)] * Cp1)];
            W[static_cast<size_t>(v)][static_cast<size_t>(l)] = wq * bi * bj;
        }
    }

    const double dt = opts.dt > 0 ? opts.dt : stable_dt(p);
    const DriftPlan plan = DriftPlan::build(p, torus);
    std::vector<double> mcS(static_cast<size_t>(replicas)), relS(static_cast<size_t>(replicas));

    run_replicas(replicas, opts.threads, [&](std::int64_t r) {
        Rng ri = make_stream(masterSeed, static_cast<std::uint64_t>(r), stream_tag::forward_init);
        Rng rn = make_stream(masterSeed, static_cast<std::uint64_t>(r), stream_tag::forward_noise);
        SystemState s = init_state(p, init, ri);
        EmWorkspace w;
        double integ = 0;
        for (int v = 0; v <= n; ++v) {
            if (v > 0) advance(s, p, plan, v * h, dt, rn, w, nullptr);
            const std::vector<double>& wv = W[static_cast<size_t>(v)];
            double acc = 0;
            for (std::int64_t l = 0; l < V; ++l)
                acc += wv[static_cast<size_t>(l)] * p.g(s.x[static_cast<size_t>(l)]);
            integ += acc;
        }
        mcS[static_cast<size_t>(r)] =
            s.x[static_cast<size_t>(sitei)] * s.x[static_cast<size_t>(sitej)];
        relS[static_cast<size_t>(r)] = twoWalk + integ;
    });

    PluginMomentCheck out;
    out.replicas = replicas;
    out.dt = dt;
    out.twoWalk = twoWalk;
    out.mcMoment = mean_se(mcS);
    out.relation = mean_se(relS);
    std::vector<double> diff(static_cast<size_t>(replicas));
    for (std::int64_t r = 0; r < replicas; ++r)
        diff[static_cast<size_t>(r)] = mcS[static_cast<size_t>(r)] - relS[static_cast<size_t>(r)];
    const MeanSE dm = mean_se(diff);
    out.difference = dm;
    out.zscore = dm.se > 0 ? dm.mean / dm.se
                           : (dm.mean == 0 ? 0.0 : std::numeric_limits<double>::infinity());
    return out;
}

} // namespace seedbank
