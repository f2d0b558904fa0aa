#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "seedbank/config.hpp"

namespace seedbank {

struct OutputFile {
    std::string name;   // relative to the output directory
    std::int64_t bytes = 0;
    std::string fnv1a64; // content digest, 16 hex digits
};

struct RunOutcome {
    int exitStatus = 0; // 0 ok, 3 statistical check inconclusive
    std::vector<OutputFile> outputs;
    nlohmann::json report;    // experiment verdict, also written as JSON
    std::string manifestPath;
};

// Dispatches the experiment, writes its CSV/JSON outputs and a manifest
// (config echo, code version, timestamps, per-file digests), everything
// replaced atomically. Output bytes depend only on (config, masterSeed,
// code version), never on the thread count.
RunOutcome run(const RunConfig& cfg);

std::uint64_t fnv1a64(const std::string& bytes);

} // namespace seedbank
