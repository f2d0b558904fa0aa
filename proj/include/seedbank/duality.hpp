#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "seedbank/dual.hpp"
#include "seedbank/forward.hpp"
#include "seedbank/lattice.hpp"

namespace seedbank {

// Mixed moment E[ prod_v z_v^{n_v} ] specified as exponents over components.
// A component key is site*(colours+1) + layer, layer 0 active, layer m>0 the
// m-th dormant colour; the same keys index dual lineage counts.
struct MomentSpec {
    std::map<std::int64_t, int> powers;
    int degreeCap = 4;

    static MomentSpec from_lineages(const Torus& torus, int colours,
                                    const std::vector<std::pair<std::int64_t, int>>& lineages,
                                    int cap = 4);
    // expands the exponent map back into a lineage multiset
    std::vector<std::pair<std::int64_t, int>> lineages(int colours) const;
    int degree() const;
    void validate(const Torus& torus, int colours) const;
};

// CTMC of one dual lineage over the V*(colours+1) components. Rows come from
// the same move table the dual sampler uses, so both duality routes share one
// rate source and any disagreement is a real asymmetry, not bookkeeping.
SparseCtmc bkernel_ctmc(const ModelParams& p);

// Distribution row b_t((site, layer), .) of the lineage kernel.
std::vector<double> bkernel_row(const ModelParams& p, double t, std::int64_t site, int layer);

// Exact mean field at time t from a deterministic start: the first moment of
// every component is the lineage kernel applied to the initial profile, for
// any diffusion function (the noise never enters the first moment).
struct MeanField {
    std::vector<double> x; // size V
    std::vector<double> y; // colours*V, colour-major
};
MeanField first_moment(const ModelParams& p, const std::vector<double>& x0,
                       const std::vector<double>& y0, double t);

// Monte Carlo estimate of the mixed moment from forward replicas. The
// diffusion must be the Fisher-Wright family: this estimator exists to face
// the dual sampler, and the matching only holds for that noise.
MeanSE forward_moment(const ModelParams& p, const MomentSpec& spec, double T,
                      const InitSpec& init, std::int64_t replicas, std::uint64_t masterSeed,
                      const ForwardRunOptions& opts = {});

// Per-component forward means at time t, any diffusion; the Monte Carlo side
// of the first-moment identity.
struct MeanFieldEstimate {
    std::vector<MeanSE> x;
    std::vector<MeanSE> y; // colour-major
    std::int64_t clampEvents = 0;
    std::int64_t replicas = 0;
};
MeanFieldEstimate forward_mean_field(const ModelParams& p, const InitSpec& init, double t,
                                     std::int64_t replicas, std::uint64_t masterSeed,
                                     const ForwardRunOptions& opts = {});

// Both routes to the same moment plus their signed normalized gap. The z
// score is (forward - dual) / combined standard error; zero combined error
// with equal means reports zero.
struct DualityOutcome {
    MeanSE forward;
    MeanSE dual;
    double gap = 0;
    double sigma = 0;
    double zscore = 0;
};
DualityOutcome duality_gap(const ModelParams& p, const MomentSpec& spec, double T,
                           const InitSpec& init, std::int64_t replicasForward,
                           std::int64_t replicasDual, std::uint64_t masterSeed,
                           const ForwardRunOptions& fopts = {}, int dualThreads = 1);

// Smooth local function of finitely many components with analytic first and
// diagonal second partials, the class the generator acts on.
struct LocalTestFunction {
    std::vector<std::int64_t> comps;
    std::function<double(const std::vector<double>&)> value;
    std::function<double(const std::vector<double>&, int)> d1; // d/dv_a
    std::function<double(const std::vector<double>&, int)> d2; // d^2/dv_a^2
};

LocalTestFunction monomial_function(const MomentSpec& spec);

// Forward generator on f at state s: drift terms from the exact drift vector
// plus (1/2) g(x_i) times the diagonal second derivative on active
// components. The 1/2 matches noise amplitude sqrt(g) in the SDE.
double generator_apply(const ModelParams& p, const SystemState& s, const LocalTestFunction& f);

// Dual generator on the same monomial read as a duality function of z: sum of
// rate * (payoff after move - payoff before) over the dual move table.
double dual_generator_apply(const ModelParams& p, const SystemState& s, const MomentSpec& spec);

struct GeneratorCheckReport {
    double maxResidual = 0;
    int probes = 0;
};

// Random states and random monomials up to the degree cap; the two generator
// applications must agree to numerical precision. This is the algebraic core
// of the duality, checked without any simulation.
GeneratorCheckReport generator_identity_check(const ModelParams& p, int probes,
                                              std::uint64_t seed, int maxDegree = 4);

// Exact second moment E[x_i(t) x_j(t)] for Fisher-Wright noise from a
// deterministic start: two-walk term plus the diffusion integral, closed by
// marching E[g(x_k(s))] = d (m_k(s) - D_k(s)) on a uniform grid. The last
// grid node enters linearly, so each step is an explicit solve.
struct SecondMomentOracle {
    double value = 0;
    double twoWalk = 0;   // product of exact first moments at t
    double integral = 0;  // accumulated diffusion contribution
    int gridSteps = 0;
};
SecondMomentOracle second_moment_fw(const ModelParams& p, const std::vector<double>& x0,
                                    const std::vector<double>& y0, std::int64_t sitei,
                                    std::int64_t sitej, double t, int gridSteps = 400);

// The same moment relation with the path functional E[g(x_k(s))] estimated
// from the forward replicas themselves, valid for any diffusion. Each replica
// contributes one sample of endpoint-product minus relation, so the reported
// difference carries the exact correlated standard error.
struct PluginMomentCheck {
    MeanSE mcMoment;    // endpoint product
    MeanSE relation;    // two-walk term + plugged-in integral
    MeanSE difference;  // per-replica mcMoment - relation
    double zscore = 0;
    double twoWalk = 0;
    double dt = 0;
    std::int64_t replicas = 0;
};
PluginMomentCheck second_moment_plugin_check(const ModelParams& p, const InitSpec& init,
                                             std::int64_t sitei, std::int64_t sitej, double t,
                                             std::int64_t replicas, std::uint64_t masterSeed,
                                             int gridSteps = 64,
                                             const ForwardRunOptions& opts = {});

} // namespace seedbank
