#pragma once

#include <cstdint>
#include <vector>

#include "seedbank/rng.hpp"
#include "seedbank/stats.hpp"

namespace seedbank {

// Finite colony with N active and M dormant slots; c individuals swap state
// each generation (c = eps N = delta M). Counts track the sweet type.
struct DiscreteColony {
    std::int64_t N = 0, M = 0, c = 0;
    std::int64_t heartsActive = 0;  // 0..N
    std::int64_t heartsDormant = 0; // 0..M

    double x() const { return static_cast<double>(heartsActive) / static_cast<double>(N); }
    double y() const { return static_cast<double>(heartsDormant) / static_cast<double>(M); }
    double K() const { return static_cast<double>(M) / static_cast<double>(N); }

    void validate() const;
};

// One synchronous generation: c dormant wake (hypergeometric in type), the
// other N-c active slots resample from the active pool, c fresh seeds are
// drawn from the active pool. Population sizes never change.
void fw_step(DiscreteColony& col, Rng& rng);

// Exact one-step law of (active hearts, dormant hearts), indexed
// ha * (M+1) + hd. Intended for small colonies (N, M <= 12 or so).
std::vector<double> fw_step_distribution(const DiscreteColony& col);

// Convergence of the discrete colony to its diffusion limit: for each N the
// chain runs floor(N t) generations (M = K N, c fixed) and is compared to the
// limiting single-colony system with seed bank (K, e = c/K) and unit
// Fisher-Wright noise. The mean error uses the chain's exact linear mean
// recursion, so its 1/N decay is measured without Monte Carlo noise.
struct FwLimitResult {
    std::vector<std::int64_t> Ns;
    std::vector<double> wasserstein;  // empirical law of x(t): chain vs diffusion
    std::vector<double> meanErr;      // exact chain mean vs ODE mean, per N
    std::vector<MeanSE> chainMeans;   // sampled chain mean of x(t), per N
    double meanSlope = 0;             // log-log slope of meanErr in N
    MeanSE chainMean;                 // sampled chain mean at the largest N
    double recursionMean = 0;         // exact value the sampler must reproduce
    double odeMean = 0;
    std::int64_t replicas = 0;
};
FwLimitResult fw_diffusion_limit_check(const std::vector<std::int64_t>& Ns, double K,
                                       std::int64_t c, double t, double x0, double y0,
                                       std::int64_t replicas, std::uint64_t masterSeed,
                                       int threads = 1);

// Moran variant: individuals switch state independently, so pool sizes
// fluctuate. Rates are the scaled constants cA_m (dormancy) and cD_m (wake);
// the chain itself runs with eps_m = cA_m / N, delta_m = cD_m / N and unit
// resampling, so scaled observables live at native time N t.
struct MoranRates {
    std::vector<double> cA, cD; // per colour, all > 0

    int colours() const { return static_cast<int>(cA.size()); }
    void validate() const;
    double Km(int m) const { return cA[static_cast<size_t>(m)] / cD[static_cast<size_t>(m)]; }
    double sumK() const;
    double timeScale() const { return 1.0 + sumK(); } // 1 + sum_m K_m
    double em(int m) const { return cD[static_cast<size_t>(m)] / timeScale(); }
};

struct MoranState {
    std::int64_t N = 0;
    std::int64_t X = 0;              // hearts among active
    std::vector<std::int64_t> Y;     // hearts among dormant, per colour
    std::vector<std::int64_t> ZD;    // dormant pool sizes, per colour
    double t = 0;                    // native time

    std::int64_t ZA() const;
    void validate() const;

    // equilibrium pool sizes, hearts at the given fractions per layer
    static MoranState equilibrium_start(std::int64_t N, const MoranRates& r, double x0Active,
                                        double y0Dormant);
};

enum class MoranEventType {
    ResampleUp,
    ResampleDown,
    HeartDormancy,
    HeartWake,
    OtherDormancy,
    OtherWake,
    None
};

// One exact event (or None if nothing can fire before tMax).
MoranEventType moran_gillespie_step(MoranState& s, const MoranRates& r, Rng& rng, double tMax);
void run_moran(MoranState& s, const MoranRates& r, double tMax, Rng& rng);

// Pool-size law z(t) = (z_A, z_{D_1..m}): the autonomous linear system is the
// forward equation of the two-layer switching chain, solved exactly by the
// uniformized semigroup. fixedPoint is (1, K_1, .., K_m)/(1 + sum K).
struct MoranOdeResult {
    std::vector<double> times;
    std::vector<std::vector<double>> z; // one vector (size colours+1) per time
    std::vector<double> fixedPoint;
};
MoranOdeResult moran_ode(const MoranRates& r, const std::vector<double>& times,
                         const std::vector<double>& z0);

// Value maps of the comparison change of variables: active mass and dormant
// masses, measured against total population, are blown up by 1 + sum K (and
// per colour by cD/cA), while time slows by the same factor.
double moran_transform_x(double x, const MoranRates& r);
double moran_transform_y(double y, int m, const MoranRates& r);
double moran_time(double fwTime, const MoranRates& r); // fwTime / (1 + sum K)

// Replica means of the transformed chain observables at comparison times:
// xbar(t) = (1+sumK) X(N t / (1+sumK)) / N and the per-colour ybar. Pools
// start at their equilibrium sizes so no transient has to elapse.
struct TransformedMoran {
    std::vector<double> times; // comparison-clock times
    std::vector<MeanSE> xbar;
    std::vector<std::vector<MeanSE>> ybar; // [colour][time]
    std::vector<double> Km, em;
    double timeScale = 0;
    std::int64_t replicas = 0;
};
TransformedMoran moran_transformed_moments(const MoranRates& r, std::int64_t N, double x0Active,
                                           double y0Dormant, const std::vector<double>& outTimes,
                                           std::int64_t replicas, std::uint64_t masterSeed,
                                           int threads = 1);

} // namespace seedbank
