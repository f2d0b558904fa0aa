#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "seedbank/forward.hpp"
#include "seedbank/rng.hpp"
#include "seedbank/stats.hpp"

namespace seedbank {

// Block-counting dual: finitely many lineages on the torus, each either
// active (layer 0) or dormant with a colour (layer m+1). Lineages migrate,
// fall dormant, wake, and pairs of active lineages on one site coalesce at
// rate d per pair, where d is the Fisher-Wright multiplier of the forward
// noise. Components are keyed site*(colours+1) + layer; the ordered map
// keeps event enumeration deterministic.
struct DualState {
    Torus torus;
    int colours = 1;
    std::map<std::int64_t, std::int64_t> counts;
    double t = 0;

    std::int64_t key(std::int64_t site, int layer) const {
        return site * (colours + 1) + layer;
    }
    std::int64_t total() const;
    std::int64_t active_total() const;

    // lineages given as (site, layer) pairs
    static DualState start(const Torus& torus, int colours,
                           const std::vector<std::pair<std::int64_t, int>>& lineages);
};

// Per-lineage move rates shared by the sampler and the exact oracle.
struct DualPlan {
    int colours = 1;
    double d = 0;                       // pair coalescence rate
    double chi = 0;                     // total dormancy rate per active lineage
    std::vector<double> Ke, e;          // per colour
    std::vector<std::vector<int>> migOff;
    std::vector<double> migRate;
    std::vector<std::vector<int>> dispOff;    // model 3 displacement, probability weights
    std::vector<std::vector<int>> dispOffNeg; // negated offsets (dormancy moves)
    std::vector<double> dispProb;
    bool displaced = false;             // model 3: dormancy lands at site-o, wake at site+o

    static DualPlan build(const ModelParams& p);
};

enum class DualEventType { Migration, Coalescence, Dormancy, Wake, None };

// Enumerates every enabled move of a lineage-count configuration in a fixed
// deterministic order: cb(fromKey, toKey, rate, isCoalescence). Coalescence
// removes one lineage at fromKey; every other move shifts one lineage from
// fromKey to toKey.
void for_each_dual_move(const std::map<std::int64_t, std::int64_t>& counts, const Torus& torus,
                        const DualPlan& plan,
                        const std::function<void(std::int64_t, std::int64_t, double, bool)>& cb);

// One Gillespie event, clipped at tMax: if the waiting time overshoots, the
// state only advances its clock and None is returned.
DualEventType gillespie_step(DualState& s, const DualPlan& plan, Rng& rng, double tMax);

void run_dual(DualState& s, const DualPlan& plan, double tMax, Rng& rng);

// The moment the dual computes: prod over components of z(v)^{n_v}. The
// initial law of the forward process supplies z: Constant takes powers of
// (x0, y0), IidUniform integrates each component to 1/(n_v+1), Explicit
// reads per-component values.
double dual_payoff(const DualState& s, const InitSpec& init);

// Monte Carlo E[ prod z^{n(T)} ] over independent dual runs.
MeanSE dual_moment(const ModelParams& p,
                   const std::vector<std::pair<std::int64_t, int>>& lineages, double T,
                   const InitSpec& init, std::int64_t replicas, std::uint64_t masterSeed,
                   int threads = 1);

struct CoalescenceResult {
    std::vector<double> horizons;
    std::vector<MeanSE> prob;      // P(pair has coalesced by horizon)
    double censoredFraction = 0;   // still separate at the largest horizon
    std::int64_t replicas = 0;
};

// Two active lineages at the given sites; nested horizons are read off a
// single run per replica.
CoalescenceResult coalescence_probability(const ModelParams& p, std::int64_t site0,
                                          std::int64_t site1,
                                          const std::vector<double>& horizons,
                                          std::int64_t replicas, std::uint64_t masterSeed,
                                          int threads = 1);

// Wake time of one dormancy spell: colour drawn with weight K_m e_m, then an
// exponential holding time with rate e_m.
std::vector<double> sample_tau(const SeedBankSpec& sb, std::int64_t n, std::uint64_t seed);

struct TauTailReport {
    std::vector<double> thresholds;
    std::vector<double> survival;        // empirical P(tau > threshold)
    LogLogFit fit;                       // log survival vs log threshold
    double gammaHat = 0;                 // -slope
    double amplitudeHat = 0;             // exp(intercept)
    MeanSE meanTau;
    std::optional<double> predictedMean; // rho/chi when rho is finite
    // two closed-form candidates for the tail constant of the truncated-free
    // ladder; the empirical amplitude arbitrates between them
    std::optional<double> tailConstSmall; // A B^{1-g} Gamma(g) / (chi beta)
    std::optional<double> tailConstLarge; // A B^{1-g} g Gamma(g) / beta
};

TauTailReport tau_tail_fit(const SeedBankSpec& sb, std::int64_t n, std::uint64_t seed,
                           std::vector<double> thresholds = {});

struct ActivityResult {
    std::vector<double> times;
    std::vector<MeanSE> fractionActive;    // T(t) / t
    std::vector<MeanSE> scaled;            // T(t) / t^gammaUsed
    std::vector<MeanSE> activeNow;         // indicator of being active at t
    std::vector<MeanSE> scaledActiveProb;  // t^(1-gammaUsed) P(active at t)
    double gammaUsed = 1;                  // gamma when rho diverges, else 1
};

// Activity clock of a single lineage: alternating active Exp(chi) and
// dormant Exp(e_m) spells, colour weighted by K_m e_m. The spatial motion
// does not matter for how much time is spent active.
ActivityResult activity_time(const SeedBankSpec& sb, const std::vector<double>& times,
                             std::int64_t replicas, std::uint64_t seed, int threads = 1);

struct DualOracleResult {
    double moment = 0;        // E prod z^{n(T)}, exact up to the semigroup tol
    double coalescedProb = 0; // P(fewer lineages at T than at 0)
    std::int64_t states = 0;  // size of the enumerated state space
    // mean time until the lineage count first drops, by a dense linear solve
    // over the transient states; only filled when that class is small enough
    std::optional<double> meanCoalescenceTime;
};

// Exact distribution of the dual on small systems by enumerating all
// reachable lineage configurations and propagating the CTMC. z is indexed by
// component key, size sites*(colours+1).
DualOracleResult exact_dual_oracle(const ModelParams& p,
                                   const std::vector<std::pair<std::int64_t, int>>& lineages,
                                   double T, const std::vector<double>& z,
                                   std::int64_t maxStates = 20000);

} // namespace seedbank
