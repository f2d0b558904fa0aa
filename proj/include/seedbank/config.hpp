#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "seedbank/forward.hpp"

namespace seedbank {

// One experiment run, fully described: which experiment, on what system, with
// which numeric knobs. Everything is parsed and validated up front so the
// runner never sees a half-formed configuration. masterSeed is mandatory:
// there is no wall-clock seeding anywhere.
struct RunConfig {
    std::string experiment; // simulate-forward | simulate-dual | check-duality |
                            // classify | tau-tail | coalescence-prob | ibm-fw | ibm-moran
    int dimension = 1;
    int side = 1;

    ModelParams params; // assembled model (migration, seed bank, diffusion)
    InitSpec init;      // initial law of the forward system

    double dt = 0.0; // 0: stable step chosen by the solver
    std::vector<double> outputTimes;
    double tMax = 0.0;         // horizon cap (coalescence-prob default grid)
    double boundaryTol = 0.05; // classifier near-boundary window
    std::int64_t replicas = 0;
    std::int64_t dualReplicas = 0; // check-duality; 0 means same as replicas
    int threads = 1;
    std::uint64_t masterSeed = 0;
    std::string outputDir = ".";

    // dual-side experiments: starting lineages as (site, layer) pairs
    std::vector<std::pair<std::int64_t, int>> lineages;

    struct IbmFw {
        std::vector<std::int64_t> Ns;
        double K = 1.0;
        std::int64_t c = 1;
        double t = 1.0;
        double x0 = 0.5, y0 = 0.5;
    } ibmFw;

    struct IbmMoran {
        std::vector<double> cA, cD;
        std::int64_t N = 100;
        double x0Active = 0.5, y0Dormant = 0.5;
    } ibmMoran;

    nlohmann::json echo; // normalized form, embedded in the manifest

    bool needs_model() const;    // experiments that build the SDE system
    bool needs_sampling() const; // experiments that draw replicas
};

// Parse and validate a configuration. Unknown keys anywhere in the tree are
// rejected with the offending path; validation errors name the field.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

} // namespace seedbank
