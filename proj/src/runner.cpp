#include "seedbank/runner.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "seedbank/dichotomy.hpp"
#include "seedbank/dual.hpp"
#include "seedbank/duality.hpp"
#include "seedbank/errors.hpp"
#include "seedbank/ibm.hpp"
#include "seedbank/version.hpp"

namespace seedbank {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// shortest exact decimal for a double; reruns must reproduce bytes, so all
// numeric text goes through this one formatter
std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string num(std::int64_t v) { return std::to_string(v); }

std::string hex16(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string iso_utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Csv {
    std::string text;
    explicit Csv(const std::vector<std::string>& cols) { line(cols); }
    void line(const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) text += ',';
            text += cells[i];
        }
        text += '\n';
    }
};

// write-to-temp then rename, so a crash never leaves a half-written output
void atomic_write(const fs::path& dir, const std::string& name, const std::string& bytes) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec && !fs::is_directory(dir))
        throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    const fs::path tmp = dir / (name + ".tmp");
    const fs::path dst = dir / name;
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw IoError("short write to " + tmp.string());
    }
    fs::rename(tmp, dst, ec);
    if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

json mean_se_json(const MeanSE& m) { return json{{"mean", m.mean}, {"se", m.se}, {"n", m.n}}; }

json fit_json(const LogLogFit& f) {
    return json{
        {"slope", f.slope}, {"intercept", f.intercept}, {"rmse", f.rmse}, {"points", f.points}};
}

// each experiment fills a set of named outputs plus the verdict/fit report
struct Products {
    std::vector<std::pair<std::string, std::string>> files;
    json report;
    int status = 0;
};

// per-output-time sub-seed; make_stream avalanches the master, so adjacent
// values give unrelated streams
std::uint64_t time_seed(std::uint64_t master, size_t i) {
    return master + static_cast<std::uint64_t>(i) + 1;
}

Products run_forward(const RunConfig& cfg) {
    const Torus torus(cfg.dimension, cfg.side);
    ForwardRunOptions opts;
    opts.dt = cfg.dt;
    opts.threads = cfg.threads;
    const ForwardObservables obs = simulate(cfg.params, torus, cfg.init, cfg.outputTimes,
                                            cfg.replicas, cfg.masterSeed, opts);
    Csv csv({"experiment", "replicas", "time", "theta", "theta_se", "het_site0",
             "het_site0_se", "het_avg", "het_avg_se", "x_site0", "x_site0_se", "x_avg",
             "x_avg_se"});
    for (size_t i = 0; i < obs.times.size(); ++i)
        csv.line({cfg.experiment, num(obs.replicas), num(obs.times[i]), num(obs.theta[i].mean),
                  num(obs.theta[i].se), num(obs.hetSite0[i].mean), num(obs.hetSite0[i].se),
                  num(obs.hetAvg[i].mean), num(obs.hetAvg[i].se), num(obs.xSite0[i].mean),
                  num(obs.xSite0[i].se), num(obs.xAvg[i].mean), num(obs.xAvg[i].se)});
    Products out;
    out.files.emplace_back("forward.csv", csv.text);
    out.report = json{{"experiment", cfg.experiment},
                      {"replicas", obs.replicas},
                      {"dt", obs.dt},
                      {"clampEvents", obs.clampEvents}};
    return out;
}

Products run_dual_experiment(const RunConfig& cfg) {
    Csv csv({"experiment", "replicas", "time", "moment", "moment_se"});
    json moments = json::array();
    for (size_t i = 0; i < cfg.outputTimes.size(); ++i) {
        const MeanSE m = dual_moment(cfg.params, cfg.lineages, cfg.outputTimes[i], cfg.init,
                                     cfg.replicas, time_seed(cfg.masterSeed, i), cfg.threads);
        csv.line({cfg.experiment, num(m.n), num(cfg.outputTimes[i]), num(m.mean), num(m.se)});
        moments.push_back(json{{"time", cfg.outputTimes[i]}, {"moment", mean_se_json(m)}});
    }
    Products out;
    out.files.emplace_back("dual.csv", csv.text);
    out.report = json{{"experiment", cfg.experiment},
                      {"replicas", cfg.replicas},
                      {"lineages", cfg.lineages.size()},
                      {"moments", std::move(moments)}};
    return out;
}

Products run_duality_check(const RunConfig& cfg) {
    const Torus torus(cfg.dimension, cfg.side);
    const MomentSpec spec =
        MomentSpec::from_lineages(torus, cfg.params.colours(), cfg.lineages);
    ForwardRunOptions fopts;
    fopts.dt = cfg.dt;
    fopts.threads = cfg.threads;
    Csv csv({"experiment", "replicas", "time", "forward", "forward_se", "dual", "dual_se",
             "gap", "sigma", "z"});
    int within = 0;
    json cases = json::array();
    for (size_t i = 0; i < cfg.outputTimes.size(); ++i) {
        const double t = cfg.outputTimes[i];
        const DualityOutcome o =
            duality_gap(cfg.params, spec, t, cfg.init, cfg.replicas, cfg.dualReplicas,
                        time_seed(cfg.masterSeed, i), fopts, cfg.threads);
        csv.line({cfg.experiment, num(cfg.replicas), num(t), num(o.forward.mean),
                  num(o.forward.se), num(o.dual.mean), num(o.dual.se), num(o.gap),
                  num(o.sigma), num(o.zscore)});
        if (std::abs(o.zscore) <= 3.0) ++within;
        cases.push_back(json{{"time", t},
                             {"forward", mean_se_json(o.forward)},
                             {"dual", mean_se_json(o.dual)},
                             {"gap", o.gap},
                             {"sigma", o.sigma},
                             {"z", o.zscore}});
    }
    const auto total = static_cast<int>(cfg.outputTimes.size());
    const double fraction = total ? static_cast<double>(within) / total : 0.0;
    const bool pass = fraction >= 0.95;
    Products out;
    out.files.emplace_back("duality.csv", csv.text);
    out.report = json{{"experiment", cfg.experiment},
                      {"replicas", cfg.replicas},
                      {"dualReplicas", cfg.dualReplicas},
                      {"cases", total},
                      {"within3sigma", within},
                      {"fraction", fraction},
                      {"pass", pass},
                      {"records", std::move(cases)}};
    out.status = pass ? 0 : 3;
    return out;
}

Products run_classify(const RunConfig& cfg) {
    ClassifyOptions opts;
    opts.kappaTol = cfg.boundaryTol;
    const ClassifyResult res =
        classify(cfg.params.model, cfg.params.mig, cfg.params.sb, cfg.params.disp,
                 std::nullopt, opts);
    json ladder = json::array();
    for (const LadderPoint& p : res.integral.ladder)
        ladder.push_back(json{{"side", p.side}, {"value", p.value}});
    json integral = json{{"verdict", to_string(res.integral.verdict)},
                         {"value", res.integral.value},
                         {"kappa", res.integral.kappa},
                         {"usedSpectral", res.integral.usedSpectral},
                         {"nearBoundary", res.integral.nearBoundary},
                         {"ladder", std::move(ladder)},
                         {"note", res.integral.note}};
    Products out;
    out.report = json{{"experiment", cfg.experiment},
                      {"verdict", to_string(res.verdict)},
                      {"regime", to_string(res.regime)},
                      {"gamma", res.gamma ? json(*res.gamma) : json(nullptr)},
                      {"integral", std::move(integral)},
                      {"note", res.note}};
    out.status = res.verdict == Dichotomy::BoundaryInconclusive ? 3 : 0;
    return out;
}

Products run_tau_tail(const RunConfig& cfg) {
    const TauTailReport r =
        tau_tail_fit(cfg.params.sb, cfg.replicas, cfg.masterSeed, cfg.outputTimes);
    Csv csv({"experiment", "replicas", "threshold", "survival", "survival_se"});
    for (size_t i = 0; i < r.thresholds.size(); ++i) {
        const double s = r.survival[i];
        const double se = std::sqrt(std::max(0.0, s * (1.0 - s)) /
                                    static_cast<double>(cfg.replicas));
        csv.line({cfg.experiment, num(cfg.replicas), num(r.thresholds[i]), num(s), num(se)});
    }
    Products out;
    out.files.emplace_back("tau_tail.csv", csv.text);
    out.report = json{{"experiment", cfg.experiment},
                      {"replicas", cfg.replicas},
                      {"gammaHat", r.gammaHat},
                      {"amplitudeHat", r.amplitudeHat},
                      {"fit", fit_json(r.fit)},
                      {"meanTau", mean_se_json(r.meanTau)},
                      {"predictedMean", r.predictedMean ? json(*r.predictedMean) : json(nullptr)},
                      {"tailConstSmall", r.tailConstSmall ? json(*r.tailConstSmall) : json(nullptr)},
                      {"tailConstLarge", r.tailConstLarge ? json(*r.tailConstLarge) : json(nullptr)}};
    return out;
}

Products run_coalescence(const RunConfig& cfg) {
    const CoalescenceResult r = coalescence_probability(
        cfg.params, cfg.lineages[0].first, cfg.lineages[1].first, cfg.outputTimes,
        cfg.replicas, cfg.masterSeed, cfg.threads);
    Csv csv({"experiment", "replicas", "horizon", "prob", "prob_se"});
    for (size_t i = 0; i < r.horizons.size(); ++i)
        csv.line({cfg.experiment, num(r.replicas), num(r.horizons[i]), num(r.prob[i].mean),
                  num(r.prob[i].se)});
    Products out;
    out.files.emplace_back("coalescence.csv", csv.text);
    out.report = json{{"experiment", cfg.experiment},
                      {"replicas", r.replicas},
                      {"censoredFraction", r.censoredFraction}};
    return out;
}

Products run_ibm_fw(const RunConfig& cfg) {
    const FwLimitResult r = fw_diffusion_limit_check(
        cfg.ibmFw.Ns, cfg.ibmFw.K, cfg.ibmFw.c, cfg.ibmFw.t, cfg.ibmFw.x0, cfg.ibmFw.y0,
        cfg.replicas, cfg.masterSeed, cfg.threads);
    Csv csv({"experiment", "replicas", "N", "wasserstein", "mean_err", "chain_mean",
             "chain_se"});
    bool decreasing = true;
    for (size_t i = 0; i < r.Ns.size(); ++i) {
        if (i > 0 && !(r.wasserstein[i] < r.wasserstein[i - 1])) decreasing = false;
        csv.line({cfg.experiment, num(r.replicas), num(r.Ns[i]), num(r.wasserstein[i]),
                  num(r.meanErr[i]), num(r.chainMeans[i].mean), num(r.chainMeans[i].se)});
    }
    Products out;
    out.files.emplace_back("ibm_fw.csv", csv.text);
    out.report = json{{"experiment", cfg.experiment},
                      {"replicas", r.replicas},
                      {"meanSlope", r.meanSlope},
                      {"chainMean", mean_se_json(r.chainMean)},
                      {"recursionMean", r.recursionMean},
                      {"odeMean", r.odeMean},
                      {"wassersteinDecreasing", decreasing}};
    return out;
}

Products run_ibm_moran(const RunConfig& cfg) {
    MoranRates rates;
    rates.cA = cfg.ibmMoran.cA;
    rates.cD = cfg.ibmMoran.cD;
    rates.validate();
    const TransformedMoran r = moran_transformed_moments(
        rates, cfg.ibmMoran.N, cfg.ibmMoran.x0Active, cfg.ibmMoran.y0Dormant, cfg.outputTimes,
        cfg.replicas, cfg.masterSeed, cfg.threads);
    std::vector<std::string> cols = {"experiment", "replicas", "time", "xbar", "xbar_se"};
    for (size_t m = 0; m < r.Km.size(); ++m) {
        cols.push_back("ybar" + std::to_string(m));
        cols.push_back("ybar" + std::to_string(m) + "_se");
    }
    Csv csv(cols);
    for (size_t i = 0; i < r.times.size(); ++i) {
        std::vector<std::string> row = {cfg.experiment, num(r.replicas), num(r.times[i]),
                                        num(r.xbar[i].mean), num(r.xbar[i].se)};
        for (size_t m = 0; m < r.Km.size(); ++m) {
            row.push_back(num(r.ybar[m][i].mean));
            row.push_back(num(r.ybar[m][i].se));
        }
        csv.line(row);
    }
    // balance point of the activity switching: all coordinates map to 1
    // under the comparison change of variables
    const double scale = rates.timeScale();
    json fixed = json::array();
    fixed.push_back(1.0 / scale);
    for (double k : r.Km) fixed.push_back(k / scale);
    Products out;
    out.files.emplace_back("ibm_moran.csv", csv.text);
    out.report = json{{"experiment", cfg.experiment},
                      {"replicas", r.replicas},
                      {"Km", r.Km},
                      {"em", r.em},
                      {"timeScale", r.timeScale},
                      {"fixedPoint", std::move(fixed)}};
    return out;
}

} // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

RunOutcome run(const RunConfig& cfg) {
    const std::string started = iso_utc_now();
    Products prod;
    if (cfg.experiment == "simulate-forward") prod = run_forward(cfg);
    else if (cfg.experiment == "simulate-dual") prod = run_dual_experiment(cfg);
    else if (cfg.experiment == "check-duality") prod = run_duality_check(cfg);
    else if (cfg.experiment == "classify") prod = run_classify(cfg);
    else if (cfg.experiment == "tau-tail") prod = run_tau_tail(cfg);
    else if (cfg.experiment == "coalescence-prob") prod = run_coalescence(cfg);
    else if (cfg.experiment == "ibm-fw") prod = run_ibm_fw(cfg);
    else if (cfg.experiment == "ibm-moran") prod = run_ibm_moran(cfg);
    else throw ConfigError("config: experiment must name a known experiment kind");

    prod.files.emplace_back("report.json", prod.report.dump(2) + "\n");

    const fs::path dir(cfg.outputDir);
    RunOutcome out;
    out.exitStatus = prod.status;
    out.report = prod.report;
    json manifestFiles = json::array();
    for (const auto& [name, bytes] : prod.files) {
        atomic_write(dir, name, bytes);
        OutputFile f;
        f.name = name;
        f.bytes = static_cast<std::int64_t>(bytes.size());
        f.fnv1a64 = hex16(fnv1a64(bytes));
        manifestFiles.push_back(
            json{{"file", f.name}, {"bytes", f.bytes}, {"fnv1a64", f.fnv1a64}});
        out.outputs.push_back(std::move(f));
    }
    const json manifest = json{{"experiment", cfg.experiment},
                               {"version", kVersion},
                               {"config", cfg.echo},
                               {"startedAt", started},
                               {"finishedAt", iso_utc_now()},
                               {"outputs", std::move(manifestFiles)},
                               {"status", prod.status == 0 ? "ok" : "inconclusive"}};
    atomic_write(dir, "manifest.json", manifest.dump(2) + "\n");
    out.manifestPath = (dir / "manifest.json").string();
    return out;
}

} // namespace seedbank
