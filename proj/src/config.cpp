#include "seedbank/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "seedbank/errors.hpp"

namespace seedbank {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config: " + path + " " + what);
}

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

// strict schema: any key outside the allowed list is an error naming its path
void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(path.empty() ? "top level" : path, "must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const bool known =
            std::any_of(allowed.begin(), allowed.end(),
                        [&](const char* a) { return it.key() == a; });
        if (!known) throw ConfigError("config: unknown key " + join(path, it.key()));
    }
}

const json* find(const json& j, const char* key) {
    const auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

const json& need(const json& j, const char* key, const std::string& path) {
    const json* v = find(j, key);
    if (!v) fail(join(path, key), "is required");
    return *v;
}

double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "must be a number");
    return j.get<double>();
}

std::int64_t get_integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "must be an integer");
    return j.get<std::int64_t>();
}

std::string get_string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "must be a string");
    return j.get<std::string>();
}

std::vector<double> get_number_list(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "must be a non-empty array of numbers");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) fail(path, "must contain only numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

std::vector<int> get_int_list(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "must be an array of integers");
    std::vector<int> out;
    for (const auto& v : j) {
        if (!v.is_number_integer()) fail(path, "must contain only integers");
        out.push_back(v.get<int>());
    }
    return out;
}

Torus parse_geometry(const json* g, int& dimension, int& side) {
    dimension = 1;
    side = 1;
    if (g) {
        check_keys(*g, "geometry", {"dimension", "side"});
        if (const json* d = find(*g, "dimension"))
            dimension = static_cast<int>(get_integer(*d, "geometry.dimension"));
        if (const json* s = find(*g, "side"))
            side = static_cast<int>(get_integer(*s, "geometry.side"));
    }
    if (dimension < 1 || dimension > 6) fail("geometry.dimension", "must lie in [1, 6]");
    if (side < 1) fail("geometry.side", "must be >= 1");
    return Torus(dimension, side);
}

WalkKernel parse_kernel(const json& k, const Torus& torus, int dimension, int side,
                        const std::string& path) {
    check_keys(k, path, {"type", "rate", "offset", "entries", "eta", "delta", "maxRange"});
    const std::string type = get_string(need(k, "type", path), join(path, "type"));
    try {
        if (type == "simple") {
            double rate = 1.0;
            if (const json* r = find(k, "rate")) rate = get_number(*r, join(path, "rate"));
            return WalkKernel::simple(torus, rate);
        }
        if (type == "point-mass") {
            const auto off = get_int_list(need(k, "offset", path), join(path, "offset"));
            double rate = 1.0;
            if (const json* r = find(k, "rate")) rate = get_number(*r, join(path, "rate"));
            return WalkKernel::point_mass(torus, off, rate);
        }
        if (type == "offsets") {
            const json& entries = need(k, "entries", path);
            if (!entries.is_array() || entries.empty())
                fail(join(path, "entries"), "must be a non-empty array");
            std::vector<std::pair<std::vector<int>, double>> list;
            for (size_t i = 0; i < entries.size(); ++i) {
                const std::string epath = join(path, "entries[" + std::to_string(i) + "]");
                check_keys(entries[i], epath, {"offset", "rate"});
                list.emplace_back(
                    get_int_list(need(entries[i], "offset", epath), join(epath, "offset")),
                    get_number(need(entries[i], "rate", epath), join(epath, "rate")));
            }
            return WalkKernel::from_offsets(torus, std::move(list));
        }
        if (type == "drifted-2d") {
            if (dimension != 2) fail(path, "drifted-2d needs geometry.dimension = 2");
            return WalkKernel::drifted_2d(side,
                                          get_number(need(k, "eta", path), join(path, "eta")));
        }
        if (type == "power-law-1d") {
            if (dimension != 1) fail(path, "power-law-1d needs geometry.dimension = 1");
            int maxRange = 0;
            if (const json* m = find(k, "maxRange"))
                maxRange = static_cast<int>(get_integer(*m, join(path, "maxRange")));
            return WalkKernel::power_law_1d(
                side, get_number(need(k, "delta", path), join(path, "delta")), maxRange);
        }
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        if (what.rfind("config:", 0) == 0) throw;
        throw ConfigError("config: " + path + ": " + what);
    }
    fail(join(path, "type"),
         "must be one of simple, point-mass, offsets, drifted-2d, power-law-1d");
}

SeedBankSpec parse_seedbank(const json& s) {
    const std::string path = "seedbank";
    check_keys(s, path, {"type", "K", "e", "A", "alpha", "B", "beta", "truncation"});
    const std::string type = get_string(need(s, "type", path), "seedbank.type");
    try {
        if (type == "single") {
            const double K = get_number(need(s, "K", path), "seedbank.K");
            const double e = get_number(need(s, "e", path), "seedbank.e");
            if (!(K > 0)) fail("seedbank.K", "must be positive");
            if (!(e > 0)) fail("seedbank.e", "must be positive");
            return SeedBankSpec::single(K, e);
        }
        if (type == "explicit") {
            const auto Ks = get_number_list(need(s, "K", path), "seedbank.K");
            const auto es = get_number_list(need(s, "e", path), "seedbank.e");
            for (double v : Ks)
                if (!(v > 0)) fail("seedbank.K", "entries must be positive");
            for (double v : es)
                if (!(v > 0)) fail("seedbank.e", "entries must be positive");
            return SeedBankSpec::explicit_list(Ks, es);
        }
        if (type == "asymptotic") {
            const double A = get_number(need(s, "A", path), "seedbank.A");
            const double alpha = get_number(need(s, "alpha", path), "seedbank.alpha");
            const double B = get_number(need(s, "B", path), "seedbank.B");
            const double beta = get_number(need(s, "beta", path), "seedbank.beta");
            const auto M = get_integer(need(s, "truncation", path), "seedbank.truncation");
            return SeedBankSpec::asymptotic(A, alpha, B, beta, static_cast<int>(M));
        }
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        if (what.rfind("config:", 0) == 0) throw;
        throw ConfigError("config: seedbank: " + what);
    }
    fail("seedbank.type", "must be one of single, explicit, asymptotic");
}

DiffusionFunction parse_diffusion(const json* dj) {
    if (!dj) return DiffusionFunction::fisher_wright(1.0);
    const std::string path = "diffusion";
    check_keys(*dj, path, {"type", "d", "values"});
    const std::string type = get_string(need(*dj, "type", path), "diffusion.type");
    double d = 1.0;
    if (const json* v = find(*dj, "d")) d = get_number(*v, "diffusion.d");
    if (!(d > 0)) fail("diffusion.d", "must be positive");
    if (type == "fisher-wright") return DiffusionFunction::fisher_wright(d);
    if (type == "kimura-ohta") return DiffusionFunction::kimura_ohta(d);
    if (type == "tabulated") {
        const auto values = get_number_list(need(*dj, "values", path), "diffusion.values");
        try {
            return DiffusionFunction::tabulated(values);
        } catch (const ConfigError& e) {
            throw ConfigError("config: diffusion.values: " + std::string(e.what()));
        }
    }
    fail("diffusion.type", "must be one of fisher-wright, kimura-ohta, tabulated");
}

InitSpec parse_init(const json* ij, std::int64_t V, int colours) {
    if (!ij) return InitSpec::constant(0.5, 0.5);
    const std::string path = "init";
    check_keys(*ij, path, {"type", "x", "y"});
    const std::string type = get_string(need(*ij, "type", path), "init.type");
    if (type == "constant") {
        double x = 0.5, y = 0.5;
        if (const json* v = find(*ij, "x")) x = get_number(*v, "init.x");
        if (const json* v = find(*ij, "y")) y = get_number(*v, "init.y");
        if (!(x >= 0 && x <= 1)) fail("init.x", "must lie in [0, 1]");
        if (!(y >= 0 && y <= 1)) fail("init.y", "must lie in [0, 1]");
        return InitSpec::constant(x, y);
    }
    if (type == "iid-uniform") return InitSpec::iid_uniform();
    if (type == "explicit") {
        auto x = get_number_list(need(*ij, "x", path), "init.x");
        auto y = get_number_list(need(*ij, "y", path), "init.y");
        if (static_cast<std::int64_t>(x.size()) != V)
            fail("init.x", "must have one entry per site (" + std::to_string(V) + ")");
        if (static_cast<std::int64_t>(y.size()) != V * colours)
            fail("init.y", "must have colours * sites entries, colour-major");
        for (double v : x)
            if (!(v >= 0 && v <= 1)) fail("init.x", "entries must lie in [0, 1]");
        for (double v : y)
            if (!(v >= 0 && v <= 1)) fail("init.y", "entries must lie in [0, 1]");
        return InitSpec::explicit_values(std::move(x), std::move(y));
    }
    fail("init.type", "must be one of constant, iid-uniform, explicit");
}

std::vector<std::pair<std::int64_t, int>> parse_lineages(const json& lj, std::int64_t V,
                                                         int colours) {
    if (!lj.is_array() || lj.empty())
        fail("lineages", "must be a non-empty array of [site, layer] pairs");
    std::vector<std::pair<std::int64_t, int>> out;
    for (size_t i = 0; i < lj.size(); ++i) {
        const std::string path = "lineages[" + std::to_string(i) + "]";
        const auto pair = get_int_list(lj[i], path);
        if (pair.size() != 2) fail(path, "must be a [site, layer] pair");
        const std::int64_t site = pair[0];
        const int layer = pair[1];
        if (site < 0 || site >= V) fail(path, "site out of range");
        if (layer < 0 || layer > colours) fail(path, "layer must lie in [0, colours]");
        out.emplace_back(site, layer);
    }
    return out;
}

bool is_one_of(const std::string& v, std::initializer_list<const char*> set) {
    return std::any_of(set.begin(), set.end(), [&](const char* s) { return v == s; });
}

} // namespace

bool RunConfig::needs_model() const {
    return is_one_of(experiment,
                     {"simulate-forward", "simulate-dual", "check-duality", "classify",
                      "coalescence-prob"});
}

bool RunConfig::needs_sampling() const { return experiment != "classify"; }

RunConfig parse_config(const nlohmann::json& j) {
    check_keys(j, "",
               {"experiment", "geometry", "model", "kernel", "displacement", "seedbank",
                "diffusion", "init", "numerics", "replicas", "dualReplicas", "threads",
                "masterSeed", "output", "lineages", "ibm"});

    RunConfig cfg;
    cfg.echo = j;
    cfg.experiment = get_string(need(j, "experiment", ""), "experiment");
    if (!is_one_of(cfg.experiment,
                   {"simulate-forward", "simulate-dual", "check-duality", "classify", "tau-tail",
                    "coalescence-prob", "ibm-fw", "ibm-moran"}))
        fail("experiment", "must name a known experiment kind");

    // masterSeed is mandatory everywhere: reruns must be reproducible
    const json& seed = need(j, "masterSeed", "");
    const std::int64_t seedVal = get_integer(seed, "masterSeed");
    if (seedVal < 0) fail("masterSeed", "must be a non-negative integer");
    cfg.masterSeed = static_cast<std::uint64_t>(seedVal);

    if (const json* t = find(j, "threads")) {
        cfg.threads = static_cast<int>(get_integer(*t, "threads"));
        if (cfg.threads < 1) fail("threads", "must be >= 1");
    }
    if (const json* o = find(j, "output")) cfg.outputDir = get_string(*o, "output");

    if (const json* r = find(j, "replicas")) {
        cfg.replicas = get_integer(*r, "replicas");
        if (cfg.replicas < 1) fail("replicas", "must be >= 1");
    }
    if (cfg.needs_sampling() && cfg.replicas == 0) fail("replicas", "is required");
    if (const json* r = find(j, "dualReplicas")) {
        if (cfg.experiment != "check-duality")
            fail("dualReplicas", "only applies to check-duality");
        cfg.dualReplicas = get_integer(*r, "dualReplicas");
        if (cfg.dualReplicas < 1) fail("dualReplicas", "must be >= 1");
    }
    if (cfg.dualReplicas == 0) cfg.dualReplicas = cfg.replicas;

    // numerics block
    double tEnd = 0;
    if (const json* n = find(j, "numerics")) {
        check_keys(*n, "numerics", {"dt", "tEnd", "outputTimes", "tMax", "boundaryTol"});
        if (const json* v = find(*n, "dt")) {
            cfg.dt = get_number(*v, "numerics.dt");
            if (!(cfg.dt > 0)) fail("numerics.dt", "must be positive");
        }
        if (const json* v = find(*n, "tEnd")) {
            tEnd = get_number(*v, "numerics.tEnd");
            if (!(tEnd > 0)) fail("numerics.tEnd", "must be positive");
        }
        if (const json* v = find(*n, "outputTimes")) {
            cfg.outputTimes = get_number_list(*v, "numerics.outputTimes");
            for (size_t i = 0; i < cfg.outputTimes.size(); ++i)
                if (!(cfg.outputTimes[i] >= 0) ||
                    (i > 0 && cfg.outputTimes[i] < cfg.outputTimes[i - 1]))
                    fail("numerics.outputTimes", "must be non-negative and non-decreasing");
        }
        if (const json* v = find(*n, "tMax")) {
            cfg.tMax = get_number(*v, "numerics.tMax");
            if (!(cfg.tMax > 0)) fail("numerics.tMax", "must be positive");
        }
        if (const json* v = find(*n, "boundaryTol")) {
            cfg.boundaryTol = get_number(*v, "numerics.boundaryTol");
            if (!(cfg.boundaryTol > 0)) fail("numerics.boundaryTol", "must be positive");
        }
    }
    if (cfg.outputTimes.empty() && tEnd > 0) cfg.outputTimes = {tEnd};

    // model assembly for the experiments that run the spatial system
    if (cfg.needs_model()) {
        const Torus torus = parse_geometry(find(j, "geometry"), cfg.dimension, cfg.side);
        cfg.params.model = static_cast<int>(get_integer(need(j, "model", ""), "model"));
        if (cfg.params.model < 1 || cfg.params.model > 3) fail("model", "must be 1, 2 or 3");
        cfg.params.mig =
            parse_kernel(need(j, "kernel", ""), torus, cfg.dimension, cfg.side, "kernel");
        cfg.params.sb = parse_seedbank(need(j, "seedbank", ""));
        const json* disp = find(j, "displacement");
        if (cfg.params.model == 3) {
            if (!disp) fail("displacement", "is required for model 3");
            cfg.params.disp =
                parse_kernel(*disp, torus, cfg.dimension, cfg.side, "displacement");
        } else if (disp) {
            fail("displacement", "only applies to model 3");
        }
        const json* diff = find(j, "diffusion");
        if (cfg.experiment == "classify" && diff)
            fail("diffusion", "is not used by the classifier");
        cfg.params.g = parse_diffusion(diff);
        try {
            cfg.params.validate();
        } catch (const ConfigError& e) {
            throw ConfigError("config: model: " + std::string(e.what()));
        }

        const std::int64_t V = torus.sites();
        const int colours = cfg.params.colours();
        const json* init = find(j, "init");
        if (cfg.experiment == "classify" || cfg.experiment == "coalescence-prob") {
            if (init) fail("init", "is not used by experiment " + cfg.experiment);
        } else {
            cfg.init = parse_init(init, V, colours);
        }

        const json* lin = find(j, "lineages");
        const bool wantsLineages = is_one_of(
            cfg.experiment, {"simulate-dual", "check-duality", "coalescence-prob"});
        if (wantsLineages) {
            if (!lin) fail("lineages", "is required for experiment " + cfg.experiment);
            cfg.lineages = parse_lineages(*lin, V, colours);
            if (cfg.experiment == "coalescence-prob") {
                if (cfg.lineages.size() != 2 || cfg.lineages[0].second != 0 ||
                    cfg.lineages[1].second != 0)
                    fail("lineages", "coalescence-prob needs exactly two active lineages");
            }
        } else if (lin) {
            fail("lineages", "is not used by experiment " + cfg.experiment);
        }

        if (is_one_of(cfg.experiment, {"simulate-dual", "check-duality", "coalescence-prob"}) &&
            !cfg.params.g.is_fisher_wright())
            fail("diffusion.type",
                 "must be fisher-wright: the coalescent dual exists for g = d x(1-x)");
        if (is_one_of(cfg.experiment,
                      {"simulate-forward", "simulate-dual", "check-duality"}) &&
            cfg.outputTimes.empty())
            fail("numerics.outputTimes", "is required (or give numerics.tEnd)");
        if (cfg.experiment == "coalescence-prob" && cfg.outputTimes.empty()) {
            if (!(cfg.tMax > 0))
                fail("numerics.tMax", "is required when no outputTimes are given");
            cfg.outputTimes = {cfg.tMax / 100.0, cfg.tMax / 10.0, cfg.tMax};
        }
    } else {
        for (const char* key : {"geometry", "model", "kernel", "displacement", "diffusion",
                                "init", "lineages"})
            if (find(j, key))
                fail(key, "is not used by experiment " + cfg.experiment);
        if (cfg.experiment == "tau-tail") {
            if (!find(j, "seedbank")) fail("seedbank", "is required");
            cfg.params.sb = parse_seedbank(*find(j, "seedbank"));
        } else if (find(j, "seedbank")) {
            fail("seedbank", "is not used by experiment " + cfg.experiment);
        }
    }

    // individual-based sections
    const json* ibm = find(j, "ibm");
    if (cfg.experiment == "ibm-fw") {
        if (!ibm) fail("ibm", "is required for experiment ibm-fw");
        check_keys(*ibm, "ibm", {"Ns", "K", "c", "t", "x0", "y0"});
        const json& ns = need(*ibm, "Ns", "ibm");
        if (!ns.is_array() || ns.empty()) fail("ibm.Ns", "must be a non-empty integer array");
        for (const auto& v : ns) {
            if (!v.is_number_integer() || v.get<std::int64_t>() < 2)
                fail("ibm.Ns", "entries must be integers >= 2");
            cfg.ibmFw.Ns.push_back(v.get<std::int64_t>());
        }
        cfg.ibmFw.K = get_number(need(*ibm, "K", "ibm"), "ibm.K");
        if (!(cfg.ibmFw.K > 0)) fail("ibm.K", "must be positive");
        cfg.ibmFw.c = get_integer(need(*ibm, "c", "ibm"), "ibm.c");
        if (cfg.ibmFw.c < 0) fail("ibm.c", "must be >= 0");
        cfg.ibmFw.t = get_number(need(*ibm, "t", "ibm"), "ibm.t");
        if (!(cfg.ibmFw.t > 0)) fail("ibm.t", "must be positive");
        cfg.ibmFw.x0 = get_number(need(*ibm, "x0", "ibm"), "ibm.x0");
        cfg.ibmFw.y0 = get_number(need(*ibm, "y0", "ibm"), "ibm.y0");
        if (!(cfg.ibmFw.x0 >= 0 && cfg.ibmFw.x0 <= 1 && cfg.ibmFw.y0 >= 0 && cfg.ibmFw.y0 <= 1))
            fail("ibm.x0", "and ibm.y0 must lie in [0, 1]");
    } else if (cfg.experiment == "ibm-moran") {
        if (!ibm) fail("ibm", "is required for experiment ibm-moran");
        check_keys(*ibm, "ibm", {"cA", "cD", "N", "x0Active", "y0Dormant"});
        cfg.ibmMoran.cA = get_number_list(need(*ibm, "cA", "ibm"), "ibm.cA");
        cfg.ibmMoran.cD = get_number_list(need(*ibm, "cD", "ibm"), "ibm.cD");
        if (cfg.ibmMoran.cA.size() != cfg.ibmMoran.cD.size())
            fail("ibm.cA", "and ibm.cD must have the same length");
        for (double v : cfg.ibmMoran.cA)
            if (!(v > 0)) fail("ibm.cA", "entries must be positive");
        for (double v : cfg.ibmMoran.cD)
            if (!(v > 0)) fail("ibm.cD", "entries must be positive");
        cfg.ibmMoran.N = get_integer(need(*ibm, "N", "ibm"), "ibm.N");
        if (cfg.ibmMoran.N < 2) fail("ibm.N", "must be >= 2");
        if (const json* v = find(*ibm, "x0Active"))
            cfg.ibmMoran.x0Active = get_number(*v, "ibm.x0Active");
        if (const json* v = find(*ibm, "y0Dormant"))
            cfg.ibmMoran.y0Dormant = get_number(*v, "ibm.y0Dormant");
        if (!(cfg.ibmMoran.x0Active >= 0 && cfg.ibmMoran.x0Active <= 1 &&
              cfg.ibmMoran.y0Dormant >= 0 && cfg.ibmMoran.y0Dormant <= 1))
            fail("ibm.x0Active", "and ibm.y0Dormant must lie in [0, 1]");
        if (cfg.outputTimes.empty())
            fail("numerics.outputTimes", "is required for experiment ibm-moran");
    } else if (ibm) {
        fail("ibm", "is not used by experiment " + cfg.experiment);
    }

    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // translate the byte offset into a line number for the error message
        size_t line = 1;
        for (size_t i = 0; i < text.size() && i + 1 < e.byte; ++i)
            if (text[i] == '\n') ++line;
        throw ConfigError("config parse error in " + path + " at line " + std::to_string(line) +
                          ": " + e.what());
    }
    return parse_config(j);
}

} // namespace seedbank
