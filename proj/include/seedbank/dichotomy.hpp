#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "seedbank/kernel.hpp"
#include "seedbank/quadrature.hpp"
#include "seedbank/seedbank_spec.hpp"
#include "seedbank/stats.hpp"

namespace seedbank {

enum class Regime { MigrationDominated, Interplay, SeedbankDominated };
enum class Dichotomy { Clustering, Coexistence, BoundaryInconclusive };

std::string to_string(Regime r);
std::string to_string(Dichotomy d);

// Slowly varying modulation of the wake-time tail. phi must be positive and
// slowly varying at infinity; the criterion weight uses phi itself for
// gamma < 1 and the cumulative integral_1^t phi(s)/s ds when gamma = 1.
struct SlowlyVaryingSpec {
    std::function<double(double)> phi;
};

struct LadderPoint {
    int side = 0;
    double value = 0;
};

struct ClassifyOptions {
    int rungs = 4;           // side-doubling evaluations of the spectral sum
    double kappaTol = 0.05;  // |kappa| <= tol => examine increment shrinkage
    double shrinkFactor = 0.75; // kappa estimates shrinking by this flag log divergence
    std::int64_t maxSites = std::int64_t(1) << 21;
    IntegrateOptions quad;   // time-domain engine settings
    bool forceTimeDomain = false;
};

// Convergence report for the clustering integral. The spectral engine writes
// the ladder of torus sums I(L) and the increment decay exponent kappa =
// log2(Delta_{j+1} / Delta_j); increments decaying geometrically mean the
// integral converges (value extrapolated), growing increments mean
// divergence, and asymptotically constant increments mean log divergence.
struct IntegralReport {
    Finiteness verdict = Finiteness::Inconclusive;
    double value = 0; // extrapolated limit when finite
    double kappa = 0;
    std::vector<LadderPoint> ladder;
    bool usedSpectral = false;
    IntegralVerdict timeDomain; // populated when the time-domain engine ran
    bool nearBoundary = false;
    std::string note;
};

struct ClassifyResult {
    Dichotomy verdict = Dichotomy::BoundaryInconclusive;
    Regime regime = Regime::MigrationDominated;
    std::optional<double> gamma;
    IntegralReport integral;
    std::string note;
};

// The clustering integral for the requested model:
//   model 1           : integral_1^inf  ahat_t(0,0) dt   (migration symmetrized)
//   model 2, rho < inf: same weight, symmetric migration required
//   model 2, rho = inf: integral_1^inf t^-(1-gamma)/gamma ahat_t(0,0) dt
//   model 3           : ahat_t replaced by (ahat_t * adagger_t)(0,0)
// With a slowly varying modulation the weight gains phihat(t)^-1/gamma.
IntegralReport dichotomy_integral(int model, const WalkKernel& mig, const SeedBankSpec& sb,
                                  const std::optional<WalkKernel>& disp = std::nullopt,
                                  const std::optional<SlowlyVaryingSpec>& slow = std::nullopt,
                                  const ClassifyOptions& opts = {});

// Full verdict: clustering iff the integral diverges, coexistence iff it
// converges. Model 1 symmetrizes the migration kernel (the dichotomy there
// is insensitive to asymmetry); models 2 and 3 require symmetric kernels.
ClassifyResult classify(int model, const WalkKernel& mig, const SeedBankSpec& sb,
                        const std::optional<WalkKernel>& disp = std::nullopt,
                        const std::optional<SlowlyVaryingSpec>& slow = std::nullopt,
                        const ClassifyOptions& opts = {});

// Preserved mixture theta = (xbar + sum K_m ybar_m) / (1 + rho). For
// rho = infinity the truncated ratios are extrapolated in 1/(1 + rho_M) and
// must settle within tol; a profile without a settled limit is an error
// (the limit exists when the deep-colour means converge).
double theta_of(double xbar, const std::vector<double>& ybar, const SeedBankSpec& sb,
                double tol = 1e-6);

// Degree bracket of the migration kernel's return probability on its torus.
DegreeBracket walk_degree_kernel(const WalkKernel& k, const std::vector<double>& zetas,
                                 const IntegrateOptions& opts = {});

// Density decay f(t) of the difference walk for the drifted 2-d kernel with
// drift parameter eta, when the wake-time law is one-sided stable with index
// gamma in (1,2): f(t) ~ t^-(1/gamma + 1/2). The scale constants drop out of
// the exponent and default to 1.
struct AsymDiagOptions {
    double A = 1, B = 1, C = 1;
    int nodes = 4096;
};

struct AsymDiagResult {
    std::vector<double> t;
    std::vector<double> f;
    LogLogFit fit;               // slope of log f vs log t
    double fittedExponent = 0;   // -slope
    double expectedExponent = 0; // 1/gamma + 1/2
    bool integralFinite = false; // fitted exponent > 1
    bool gridWarning = false;
};

AsymDiagResult asymmetric_diagnostic(double eta, double gamma, const std::vector<double>& tGrid,
                                     const AsymDiagOptions& opts = {});

} // namespace seedbank
