#include "seedbank/dual.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <tuple>

#include <Eigen/Dense>

#include "seedbank/lattice.hpp"
#include "seedbank/parallel.hpp"

namespace seedbank {

std::int64_t DualState::total() const {
    std::int64_t n = 0;
    for (const auto& [k, c] : counts) n += c;
    return n;
}

std::int64_t DualState::active_total() const {
    const int Cp1 = colours + 1;
    std::int64_t n = 0;
    for (const auto& [k, c] : counts)
        if (k % Cp1 == 0) n += c;
    return n;
}

DualState DualState::start(const Torus& torus, int colours,
                           const std::vector<std::pair<std::int64_t, int>>& lineages) {
    if (lineages.empty()) throw ConfigError("dual start needs at least one lineage");
    DualState s;
    s.torus = torus;
    s.colours = colours;
    const auto V = torus.sites();
    for (const auto& [site, layer] : lineages) {
        if (site < 0 || site >= V) throw ConfigError("dual lineage site out of range");
        if (layer < 0 || layer > colours) throw ConfigError("dual lineage layer out of range");
        ++s.counts[s.key(site, layer)];
    }
    return s;
}

DualPlan DualPlan::build(const ModelParams& p) {
    p.validate();
    if (!p.g.is_fisher_wright())
        throw ConfigError("the coalescent dual requires fisher-wright noise");
    DualPlan plan;
    plan.colours = p.colours();
    plan.d = p.g.d;
    plan.migOff = p.mig.offsets;
    plan.migRate = p.mig.rates;
    for (int m = 0; m < plan.colours; ++m) {
        plan.Ke.push_back(p.sb.Km(m) * p.sb.em(m));
        plan.e.push_back(p.sb.em(m));
        plan.chi += plan.Ke.back();
    }
    if (p.model == 3) {
        plan.displaced = true;
        plan.dispOff = p.disp->offsets;
        plan.dispProb = p.disp->rates;
        for (auto& w : plan.dispProb) w /= p.disp->totalRate;
        plan.dispOffNeg = plan.dispOff;
        for (auto& off : plan.dispOffNeg)
            for (auto& c : off) c = -c;
    }
    return plan;
}

namespace {

// Enumerates every possible move as cb(fromKey, toKey, rate, isCoalescence);
// the ordered map makes the enumeration order deterministic, which is what
// the two-pass Gillespie selection relies on.
template <class CB>
void for_each_move(const std::map<std::int64_t, std::int64_t>& counts, const Torus& torus,
                   const DualPlan& plan, CB&& cb) {
    const int Cp1 = plan.colours + 1;
    for (const auto& [k, c] : counts) {
        const std::int64_t site = k / Cp1;
        const int layer = static_cast<int>(k % Cp1);
        const double cd = static_cast<double>(c);
        if (layer == 0) {
            for (size_t j = 0; j < plan.migOff.size(); ++j)
                cb(k, torus.shift(site, plan.migOff[j]) * Cp1, cd * plan.migRate[j], false);
            if (c >= 2) cb(k, k, plan.d * cd * (cd - 1) * 0.5, true);
            for (int m = 0; m < plan.colours; ++m) {
                if (plan.displaced) {
                    for (size_t j = 0; j < plan.dispOff.size(); ++j)
                        cb(k, torus.shift(site, plan.dispOffNeg[j]) * Cp1 + m + 1,
                           cd * plan.Ke[m] * plan.dispProb[j], false);
                } else {
                    cb(k, site * Cp1 + m + 1, cd * plan.Ke[m], false);
                }
            }
        } else {
            const int m = layer - 1;
            if (plan.displaced) {
                for (size_t j = 0; j < plan.dispOff.size(); ++j)
                    cb(k, torus.shift(site, plan.dispOff[j]) * Cp1,
                       cd * plan.e[m] * plan.dispProb[j], false);
            } else {
                cb(k, site * Cp1, cd * plan.e[m], false);
            }
        }
    }
}

} // namespace

void for_each_dual_move(const std::map<std::int64_t, std::int64_t>& counts, const Torus& torus,
                        const DualPlan& plan,
                        const std::function<void(std::int64_t, std::int64_t, double, bool)>& cb) {
    for_each_move(counts, torus, plan, cb);
}

DualEventType gillespie_step(DualState& s, const DualPlan& plan, Rng& rng, double tMax) {
    double total = 0;
    for_each_move(s.counts, s.torus, plan,
                  [&](std::int64_t, std::int64_t, double rate, bool) { total += rate; });
    if (!(total > 0)) {
        s.t = tMax;
        return DualEventType::None;
    }
    const double wait = rng.exponential(total);
    if (s.t + wait > tMax) {
        s.t = tMax;
        return DualEventType::None;
    }
    s.t += wait;
    const double u = rng.uniform() * total;
    double acc = 0;
    std::int64_t from = -1, to = -1;
    bool coal = false, found = false;
    for_each_move(s.counts, s.torus, plan,
                  [&](std::int64_t f, std::int64_t t_, double rate, bool isCoal) {
                      if (found) return;
                      acc += rate;
                      if (acc >= u) {
                          from = f;
                          to = t_;
                          coal = isCoal;
                          found = true;
                      }
                  });
    if (!found) { // roundoff straggler: take the last enumerated move
        for_each_move(s.counts, s.torus, plan,
                      [&](std::int64_t f, std::int64_t t_, double, bool isCoal) {
                          from = f;
                          to = t_;
                          coal = isCoal;
                      });
    }
    const int Cp1 = plan.colours + 1;
    const int fromLayer = static_cast<int>(from % Cp1);
    auto it = s.counts.find(from);
    if (--it->second == 0) s.counts.erase(it);
    if (coal) return DualEventType::Coalescence;
    ++s.counts[to];
    const int toLayer = static_cast<int>(to % Cp1);
    if (fromLayer == 0 && toLayer == 0) return DualEventType::Migration;
    if (fromLayer == 0) return DualEventType::Dormancy;
    return DualEventType::Wake;
}

void run_dual(DualState& s, const DualPlan& plan, double tMax, Rng& rng) {
    while (s.t < tMax)
        if (gillespie_step(s, plan, rng, tMax) == DualEventType::None) break;
}

double dual_payoff(const DualState& s, const InitSpec& init) {
    const auto V = s.torus.sites();
    const int Cp1 = s.colours + 1;
    switch (init.kind) {
    case InitSpec::Kind::Constant: {
        double nA = 0, nD = 0;
        for (const auto& [k, c] : s.counts)
            (k % Cp1 == 0 ? nA : nD) += static_cast<double>(c);
        return std::pow(init.x0, nA) * std::pow(init.y0, nD);
    }
    case InitSpec::Kind::IidUniform: {
        double v = 1;
        for (const auto& [k, c] : s.counts) v /= static_cast<double>(c + 1);
        return v;
    }
    case InitSpec::Kind::Explicit: {
        if (init.x.size() != static_cast<size_t>(V) ||
            init.y.size() != static_cast<size_t>(s.colours) * static_cast<size_t>(V))
            throw ConfigError("explicit initial law has the wrong size for the dual payoff");
        double v = 1;
        for (const auto& [k, c] : s.counts) {
            const auto site = static_cast<size_t>(k / Cp1);
            const int layer = static_cast<int>(k % Cp1);
            const double z = layer == 0
                                 ? init.x[site]
                                 : init.y[static_cast<size_t>(layer - 1) * static_cast<size_t>(V) + site];
            v *= std::pow(z, static_cast<double>(c));
        }
        return v;
    }
    }
    return 0;
}

MeanSE dual_moment(const ModelParams& p,
                   const std::vector<std::pair<std::int64_t, int>>& lineages, double T,
                   const InitSpec& init, std::int64_t replicas, std::uint64_t masterSeed,
                   int threads) {
    if (replicas < 1) throw ConfigError("need at least one replica");
    if (!(T >= 0)) throw ConfigError("dual horizon must be nonnegative");
    const DualPlan plan = DualPlan::build(p);
    const DualState anchor = DualState::start(p.mig.torus, plan.colours, lineages);
    std::vector<double> vals(static_cast<size_t>(replicas));
    run_replicas(replicas, threads, [&](std::int64_t r) {
        Rng rng = make_stream(masterSeed, static_cast<std::uint64_t>(r), stream_tag::dual_events);
        DualState s = anchor;
        run_dual(s, plan, T, rng);
        vals[static_cast<size_t>(r)] = dual_payoff(s, init);
    });
    return mean_se(vals);
}

CoalescenceResult coalescence_probability(const ModelParams& p, std::int64_t site0,
                                          std::int64_t site1,
                                          const std::vector<double>& horizons,
                                          std::int64_t replicas, std::uint64_t masterSeed,
                                          int threads) {
    if (horizons.empty()) throw ConfigError("need at least one horizon");
    double prev = 0;
    for (double h : horizons) {
        if (!(h > prev)) throw ConfigError("horizons must be positive and strictly increasing");
        prev = h;
    }
    if (replicas < 1) throw ConfigError("need at least one replica");
    const DualPlan plan = DualPlan::build(p);
    const DualState anchor = DualState::start(p.mig.torus, plan.colours, {{site0, 0}, {site1, 0}});
    const double tEnd = horizons.back();

    std::vector<double> coalTimes(static_cast<size_t>(replicas));
    run_replicas(replicas, threads, [&](std::int64_t r) {
        Rng rng = make_stream(masterSeed, static_cast<std::uint64_t>(r), stream_tag::dual_events);
        DualState s = anchor;
        double ct = std::numeric_limits<double>::infinity();
        for (;;) {
            const DualEventType ev = gillespie_step(s, plan, rng, tEnd);
            if (ev == DualEventType::Coalescence) {
                ct = s.t;
                break;
            }
            if (ev == DualEventType::None) break;
        }
        coalTimes[static_cast<size_t>(r)] = ct;
    });

    CoalescenceResult res;
    res.horizons = horizons;
    res.replicas = replicas;
    std::vector<double> ind(static_cast<size_t>(replicas));
    for (double h : horizons) {
        for (size_t r = 0; r < ind.size(); ++r) ind[r] = coalTimes[r] <= h ? 1.0 : 0.0;
        res.prob.push_back(mean_se(ind));
    }
    res.censoredFraction = 1.0 - res.prob.back().mean;
    return res;
}

namespace {

// colour sampler with cumulative K_m e_m weights
struct ColourPicker {
    std::vector<double> cum;
    std::vector<double> wake;
    double chi = 0;
    explicit ColourPicker(const SeedBankSpec& sb) {
        const int C = sb.colours();
        cum.resize(static_cast<size_t>(C));
        wake.resize(static_cast<size_t>(C));
        for (int m = 0; m < C; ++m) {
            chi += sb.Km(m) * sb.em(m);
            cum[static_cast<size_t>(m)] = chi;
            wake[static_cast<size_t>(m)] = sb.em(m);
        }
    }
    int pick(Rng& rng) const {
        const double u = rng.uniform() * chi;
        const auto it = std::lower_bound(cum.begin(), cum.end(), u);
        return static_cast<int>(std::min<size_t>(
            static_cast<size_t>(it - cum.begin()), cum.size() - 1));
    }
};

} // namespace

std::vector<double> sample_tau(const SeedBankSpec& sb, std::int64_t n, std::uint64_t seed) {
    sb.validate();
    if (n < 1) throw ConfigError("need at least one sample");
    const ColourPicker pick(sb);
    Rng rng = make_stream(seed, 0, stream_tag::renewal);
    std::vector<double> taus(static_cast<size_t>(n));
    for (auto& tau : taus) {
        const int m = pick.pick(rng);
        tau = rng.exponential(pick.wake[static_cast<size_t>(m)]);
    }
    return taus;
}

TauTailReport tau_tail_fit(const SeedBankSpec& sb, std::int64_t n, std::uint64_t seed,
                           std::vector<double> thresholds) {
    if (sb.kind == SeedBankSpec::Kind::Asymptotic && sb.M < 1000)
        throw ConfigError("tail fits need a truncation of at least 1000 colours");
    auto taus = sample_tau(sb, n, seed);
    TauTailReport rep;
    rep.meanTau = mean_se(taus);
    if (auto rho = sb.rho()) rep.predictedMean = *rho / sb.chi();

    if (thresholds.empty()) {
        double tLo = 0, tHi = 0;
        if (sb.kind == SeedBankSpec::Kind::Asymptotic) {
            // power law holds between the fastest and slowest wake scales;
            // stay well clear of the truncation colour
            tLo = 10.0 / sb.em(0);
            tHi = 0.02 / sb.em(sb.colours() - 1);
        } else {
            double eMin = sb.em(0);
            for (int m = 0; m < sb.colours(); ++m) eMin = std::min(eMin, sb.em(m));
            tLo = 0.1 / eMin;
            tHi = 5.0 / eMin;
        }
        if (!(tHi > tLo * 3))
            throw ConfigError("tau tail window is empty; raise the truncation colour");
        const int pts = 9;
        for (int i = 0; i < pts; ++i)
            thresholds.push_back(tLo * std::pow(tHi / tLo, static_cast<double>(i) / (pts - 1)));
    }
    std::sort(taus.begin(), taus.end());
    std::sort(thresholds.begin(), thresholds.end());
    rep.thresholds = thresholds;
    for (double thr : thresholds) {
        const auto it = std::upper_bound(taus.begin(), taus.end(), thr);
        rep.survival.push_back(static_cast<double>(taus.end() - it) /
                               static_cast<double>(taus.size()));
    }
    if (rep.survival.front() * static_cast<double>(n) < 1000.0)
        throw NumericError("tail fit needs at least 1000 samples beyond the fit threshold");
    rep.fit = loglog_fit(rep.thresholds, rep.survival);
    rep.gammaHat = -rep.fit.slope;
    rep.amplitudeHat = std::exp(rep.fit.intercept);
    if (sb.kind == SeedBankSpec::Kind::Asymptotic) {
        const double g = *sb.gamma();
        const double base = sb.A * std::pow(sb.B, 1.0 - g) * std::tgamma(g) / sb.beta;
        rep.tailConstSmall = base / sb.chi();
        rep.tailConstLarge = base * g;
    }
    return rep;
}

ActivityResult activity_time(const SeedBankSpec& sb, const std::vector<double>& times,
                             std::int64_t replicas, std::uint64_t seed, int threads) {
    sb.validate();
    if (times.empty()) throw ConfigError("need at least one output time");
    double prev = 0;
    for (double t : times) {
        if (!(t > prev)) throw ConfigError("output times must be positive and strictly increasing");
        prev = t;
    }
    if (replicas < 1) throw ConfigError("need at least one replica");
    const ColourPicker pick(sb);
    const double chi = pick.chi;

    ActivityResult res;
    res.times = times;
    res.gammaUsed = sb.rho_finite() ? 1.0 : *sb.gamma();
    const auto T = times.size();
    std::vector<double> slots(static_cast<size_t>(replicas) * T * 2, 0.0);

    run_replicas(replicas, threads, [&](std::int64_t r) {
        Rng rng = make_stream(seed, static_cast<std::uint64_t>(r), stream_tag::renewal);
        double* out = slots.data() + static_cast<size_t>(r) * T * 2;
        double tcur = 0, tActive = 0;
        bool active = true; // lineages start active
        size_t ti = 0;
        while (ti < T) {
            const double dur = active ? rng.exponential(chi)
                                      : rng.exponential(pick.wake[static_cast<size_t>(pick.pick(rng))]);
            const double tNext = tcur + dur;
            while (ti < T && times[ti] <= tNext) {
                const double TofT = tActive + (active ? times[ti] - tcur : 0.0);
                out[ti * 2 + 0] = TofT;
                out[ti * 2 + 1] = active ? 1.0 : 0.0;
                ++ti;
            }
            if (active) tActive += dur;
            tcur = tNext;
            active = !active;
        }
    });

    std::vector<double> col(static_cast<size_t>(replicas));
    for (size_t ti = 0; ti < T; ++ti) {
        const double t = times[ti];
        for (std::int64_t r = 0; r < replicas; ++r)
            col[static_cast<size_t>(r)] = slots[static_cast<size_t>(r) * T * 2 + ti * 2] / t;
        res.fractionActive.push_back(mean_se(col));
        const double scale = std::pow(t, res.gammaUsed);
        for (std::int64_t r = 0; r < replicas; ++r)
            col[static_cast<size_t>(r)] = slots[static_cast<size_t>(r) * T * 2 + ti * 2] / scale;
        res.scaled.push_back(mean_se(col));
        for (std::int64_t r = 0; r < replicas; ++r)
            col[static_cast<size_t>(r)] = slots[static_cast<size_t>(r) * T * 2 + ti * 2 + 1];
        res.activeNow.push_back(mean_se(col));
        const double up = std::pow(t, 1.0 - res.gammaUsed);
        MeanSE sc = res.activeNow.back();
        sc.mean *= up;
        sc.se *= up;
        res.scaledActiveProb.push_back(sc);
    }
    return res;
}

DualOracleResult exact_dual_oracle(const ModelParams& p,
                                   const std::vector<std::pair<std::int64_t, int>>& lineages,
                                   double T, const std::vector<double>& z,
                                   std::int64_t maxStates) {
    const DualPlan plan = DualPlan::build(p);
    const Torus torus = p.mig.torus;
    const auto V = torus.sites();
    const int Cp1 = plan.colours + 1;
    if (z.size() != static_cast<size_t>(V) * static_cast<size_t>(Cp1))
        throw ConfigError("z must have one entry per (site, layer) component");

    using StateVec = std::vector<std::int64_t>; // sorted keys with multiplicity
    const DualState s0 = DualState::start(torus, plan.colours, lineages);
    StateVec init;
    for (const auto& [k, c] : s0.counts)
        for (std::int64_t i = 0; i < c; ++i) init.push_back(k);

    std::map<StateVec, std::int32_t> index;
    std::vector<StateVec> states;
    std::deque<std::int32_t> queue;
    auto intern = [&](const StateVec& v) {
        auto [it, fresh] = index.try_emplace(v, static_cast<std::int32_t>(states.size()));
        if (fresh) {
            states.push_back(v);
            if (static_cast<std::int64_t>(states.size()) > maxStates)
                throw NumericError("exact dual oracle: state space exceeds the cap");
            queue.push_back(it->second);
        }
        return it->second;
    };
    intern(init);

    SparseCtmc ctmc;
    std::vector<std::tuple<std::int32_t, std::int32_t, double>> edges;
    while (!queue.empty()) {
        const std::int32_t si = queue.front();
        queue.pop_front();
        const StateVec cur = states[static_cast<size_t>(si)];
        std::map<std::int64_t, std::int64_t> counts;
        for (auto k : cur) ++counts[k];
        for_each_move(counts, torus, plan,
                      [&](std::int64_t from, std::int64_t to, double rate, bool coal) {
                          StateVec nxt = cur;
                          auto it = std::find(nxt.begin(), nxt.end(), from);
                          nxt.erase(it);
                          if (!coal) {
                              nxt.insert(std::upper_bound(nxt.begin(), nxt.end(), to), to);
                          }
                          edges.emplace_back(si, intern(nxt), rate);
                      });
    }
    ctmc.n = static_cast<std::int64_t>(states.size());
    ctmc.rows.resize(static_cast<size_t>(ctmc.n));
    for (const auto& [a, b, r] : edges) ctmc.add(a, b, r);
    ctmc.finalize();

    std::vector<double> p0(static_cast<size_t>(ctmc.n), 0.0);
    p0[0] = 1.0;
    const auto pt = ctmc.propagate(p0, T);

    DualOracleResult res;
    res.states = ctmc.n;
    const auto k0 = static_cast<std::int64_t>(init.size());
    for (size_t s = 0; s < states.size(); ++s) {
        double pay = 1;
        for (auto k : states[s]) pay *= z[static_cast<size_t>(k)];
        res.moment += pt[s] * pay;
        if (static_cast<std::int64_t>(states[s].size()) < k0) res.coalescedProb += pt[s];
    }

    // mean time to the first coalescence: linear solve over the class of
    // states that still hold all k0 lineages (coalescence leaves it forever)
    if (k0 >= 2) {
        std::vector<std::int32_t> trans(states.size(), -1);
        std::int32_t nT = 0;
        for (size_t s = 0; s < states.size(); ++s)
            if (static_cast<std::int64_t>(states[s].size()) == k0)
                trans[s] = nT++;
        if (nT <= 4000) {
            Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nT, nT);
            Eigen::VectorXd one = Eigen::VectorXd::Ones(nT);
            for (size_t s = 0; s < states.size(); ++s) {
                const std::int32_t i = trans[s];
                if (i < 0) continue;
                double exit = 0;
                for (const auto& [to, rate] : ctmc.rows[s]) {
                    exit += rate;
                    const std::int32_t j = trans[static_cast<size_t>(to)];
                    if (j >= 0) A(i, j) -= rate;
                }
                A(i, i) += exit;
            }
            const Eigen::VectorXd h = A.partialPivLu().solve(one);
            res.meanCoalescenceTime = h(trans[0]); // state 0 is the initial one
        }
    }
    return res;
}

} // namespace seedbank
