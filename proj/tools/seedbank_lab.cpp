// seedbank-lab: config-driven runner for the seed-bank population models.
// Exit codes: 0 success, 2 config error, 3 statistical check inconclusive or
// numeric failure, 4 I/O failure.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "seedbank/config.hpp"
#include "seedbank/errors.hpp"
#include "seedbank/runner.hpp"
#include "seedbank/version.hpp"

namespace {

struct CliArgs {
    std::string configPath;
    std::uint64_t seed = 0;
    bool seedSet = false;
    std::string outDir;
    bool outSet = false;
    int threads = 0;
};

void add_run_options(CLI::App* sub, CliArgs& args) {
    sub->add_option("--config", args.configPath, "JSON config file")->required();
    sub->add_option("--seed", args.seed, "override masterSeed from the config")
        ->each([&](const std::string&) { args.seedSet = true; });
    sub->add_option("--out", args.outDir, "override the output directory")
        ->each([&](const std::string&) { args.outSet = true; });
    sub->add_option("--threads", args.threads, "override the replica thread count");
}

int execute(const std::string& kind, const CliArgs& args) {
    seedbank::RunConfig cfg = seedbank::load_config(args.configPath);
    if (!kind.empty() && cfg.experiment != kind)
        throw seedbank::ConfigError("config: experiment is '" + cfg.experiment +
                                    "' but the subcommand asked for '" + kind + "'");
    // overrides are folded into the echoed config so the manifest describes
    // the run that actually happened
    if (args.seedSet) {
        cfg.masterSeed = args.seed;
        cfg.echo["masterSeed"] = args.seed;
    }
    if (args.outSet) {
        cfg.outputDir = args.outDir;
        cfg.echo["output"] = args.outDir;
    }
    if (args.threads > 0) {
        cfg.threads = args.threads;
        cfg.echo["threads"] = args.threads;
    }
    const seedbank::RunOutcome res = seedbank::run(cfg);
    nlohmann::json outputs = nlohmann::json::array();
    for (const auto& f : res.outputs) outputs.push_back(f.name);
    const nlohmann::json line = {
        {"experiment", cfg.experiment},
        {"status", res.exitStatus == 0 ? "ok" : "inconclusive"},
        {"manifest", res.manifestPath},
        {"outputs", std::move(outputs)}};
    std::cout << line.dump() << "\n";
    return res.exitStatus;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"stochastic lab for spatial populations with seed banks"};
    app.require_subcommand(1);
    CliArgs args;

    const std::vector<std::string> kinds = {
        "simulate-forward", "simulate-dual", "check-duality", "classify",
        "tau-tail",         "coalescence-prob", "ibm-fw",     "ibm-moran"};
    std::vector<CLI::App*> kindSubs;
    for (const std::string& k : kinds) {
        CLI::App* sub = app.add_subcommand(k, "run the " + k + " experiment");
        add_run_options(sub, args);
        kindSubs.push_back(sub);
    }
    CLI::App* runAny = app.add_subcommand("run", "run whatever experiment the config names");
    add_run_options(runAny, args);
    CLI::App* validate = app.add_subcommand("validate", "parse and validate a config");
    validate->add_option("--config", args.configPath, "JSON config file")->required();
    CLI::App* version = app.add_subcommand("version", "print the library version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // bad command line is a config error
    }

    if (version->parsed()) {
        std::cout << seedbank::kVersion << "\n";
        return 0;
    }
    if (validate->parsed()) {
        const seedbank::RunConfig cfg = seedbank::load_config(args.configPath);
        const nlohmann::json line = {{"ok", true}, {"experiment", cfg.experiment}};
        std::cout << line.dump() << "\n";
        return 0;
    }
    if (runAny->parsed()) return execute("", args);
    for (size_t i = 0; i < kinds.size(); ++i)
        if (kindSubs[i]->parsed()) return execute(kinds[i], args);
    return 2;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const seedbank::ConfigError& e) {
        std::cerr << nlohmann::json{{"error", {{"type", "config"}, {"message", e.what()}}}}.dump()
                  << "\n";
        return 2;
    } catch (const seedbank::NumericError& e) {
        std::cerr << nlohmann::json{{"error", {{"type", "numeric"}, {"message", e.what()}}}}.dump()
                  << "\n";
        return 3;
    } catch (const seedbank::IoError& e) {
        std::cerr << nlohmann::json{{"error", {{"type", "io"}, {"message", e.what()}}}}.dump()
                  << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json{{"error", {{"type", "internal"}, {"message", e.what()}}}}.dump()
                  << "\n";
        return 3;
    }
}
