#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "seedbank/diffusion.hpp"
#include "seedbank/kernel.hpp"
#include "seedbank/rng.hpp"
#include "seedbank/seedbank_spec.hpp"
#include "seedbank/stats.hpp"
#include "seedbank/torus.hpp"

namespace seedbank {

// One forward system: active frequencies x_i on a torus, coupled to dormant
// frequencies y_{i,m} per colour. Model 1 has a single colour, model 2 many
// colours exchanging on site, model 3 additionally displaces the exchange by
// a kernel per direction.
struct ModelParams {
    int model = 1;
    WalkKernel mig;
    SeedBankSpec sb;
    std::optional<WalkKernel> disp; // model 3 only, same torus as mig
    DiffusionFunction g;

    void validate() const;
    int colours() const { return sb.colours(); }
};

struct SystemState {
    Torus torus;
    int colours = 1;
    std::vector<double> x; // size V
    std::vector<double> y; // size colours*V, colour-major: y[m*V + i]
    double t = 0.0;
};

struct InitSpec {
    enum class Kind { Constant, IidUniform, Explicit };
    Kind kind = Kind::Constant;
    double x0 = 0.5, y0 = 0.5;       // Constant
    std::vector<double> x, y;        // Explicit, y colour-major

    static InitSpec constant(double x0, double y0);
    static InitSpec iid_uniform();
    static InitSpec explicit_values(std::vector<double> x, std::vector<double> y);
};

SystemState init_state(const ModelParams& p, const InitSpec& init, Rng& rng);

// Precomputed adjacency and rates so the drift loop stays branch-free. The
// displacement kernel is normalized to a probability distribution here: the
// total exchange rate is carried by K_m e_m, the kernel only moves it.
struct DriftPlan {
    std::int64_t V = 0;
    std::vector<double> migRates;
    std::vector<std::int32_t> mig;      // [k*V + i] -> i + o_k under mig
    std::vector<double> dispProbs;      // disp rates / totalRate
    std::vector<std::int32_t> dispFwd;  // model 3: i + o under disp
    std::vector<std::int32_t> dispRev;  // model 3: i - o under disp
    double rateScale = 0;               // largest per-component rate sum
    static DriftPlan build(const ModelParams& p, const Torus& torus);
};

// Writes the full drift vector (dx, dy) at the given state; resizes outputs.
void drift(const ModelParams& p, const DriftPlan& plan, const SystemState& s,
           std::vector<double>& dx, std::vector<double>& dy);

// Largest rate any single component sees, used to size stable time steps.
double rate_scale(const ModelParams& p);
double stable_dt(const ModelParams& p);

struct EmWorkspace {
    std::vector<double> dx, dy;
};

// One Euler-Maruyama step; clamps x back into [0,1] after the noise kick and
// counts how often that happened. Throws if dt is too coarse for the rates.
void em_step(SystemState& s, const ModelParams& p, const DriftPlan& plan,
             double dt, Rng& rng, EmWorkspace& w,
             std::int64_t* clampEvents = nullptr);

// Preserved mixture of the state: (xbar + sum_m K_m ybar_m) / (1 + rho),
// with the truncated rho when the colour list is a truncation.
double theta_of_state(const ModelParams& p, const SystemState& s);

struct ForwardObservables {
    std::vector<double> times;
    std::vector<MeanSE> theta;    // preserved mixture
    std::vector<MeanSE> hetSite0; // x_0 (1 - x_0)
    std::vector<MeanSE> hetAvg;   // volume average of x_i (1 - x_i)
    std::vector<MeanSE> xSite0;
    std::vector<MeanSE> xAvg;
    std::int64_t clampEvents = 0;
    double dt = 0.0;
    std::int64_t replicas = 0;
};

struct ForwardRunOptions {
    double dt = 0.0; // 0: pick stable_dt automatically
    int threads = 1;
};

// Runs independent replicas from the same initial law and reduces the
// observables at each output time. Deterministic in (masterSeed, replicas).
ForwardObservables simulate(const ModelParams& p, const Torus& torus,
                            const InitSpec& init,
                            const std::vector<double>& outTimes,
                            std::int64_t replicas, std::uint64_t masterSeed,
                            const ForwardRunOptions& opts = {});

// Single-trajectory preserved-mixture path, one value per output time.
std::vector<double> theta_trajectory(const ModelParams& p, const Torus& torus,
                                     const InitSpec& init,
                                     const std::vector<double>& outTimes,
                                     std::uint64_t seed,
                                     const ForwardRunOptions& opts = {});

struct CoupledResult {
    std::vector<double> times;
    std::vector<MeanSE> lyapunov; // weighted L1 distance between the copies
    std::int64_t clampEvents = 0;
    double dt = 0.0;
};

// Two copies driven by the same Brownian increments; the weighted L1
// distance (1/V) sum_i |dx_i| + sum_m K_m |dy_im| is non-increasing in
// expectation, which is what the uniqueness argument rests on.
CoupledResult coupled_simulate(const ModelParams& p, const Torus& torus,
                               const InitSpec& initA, const InitSpec& initB,
                               const std::vector<double>& outTimes,
                               std::int64_t replicas, std::uint64_t masterSeed,
                               const ForwardRunOptions& opts = {});

} // namespace seedbank
