// Batch driver: every subcommand loads a space description, runs one named
// pipeline from the library, and writes CSV/JSON artifacts plus a manifest
// with full seed provenance into --out.  Exit code 0 when every verdict in
// records.csv is PASS, 1 when any verdict is FAIL, 2 on usage errors.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cutout/density.hpp"
#include "cutout/errors.hpp"
#include "cutout/rng.hpp"
#include "cutout/sim.hpp"
#include "cutout/space.hpp"
#include "cutout/stats.hpp"
#include "cutout/thermo.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cutout;

namespace {

constexpr const char* kToolName = "cutoutsim";
constexpr const char* kToolVersion = "0.1.0";

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Collects the records and CSV/JSON artifacts of one run and writes them,
// with the manifest, under a single output directory.
class Artifacts {
  public:
    Artifacts(std::string command, fs::path dir, std::string spaceFile,
              std::string spaceJson, std::uint64_t seed, int threads)
        : command_(std::move(command)),
          dir_(std::move(dir)),
          spaceFile_(std::move(spaceFile)),
          spaceJson_(std::move(spaceJson)),
          seed_(seed),
          threads_(threads) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec || !fs::is_directory(dir_))
            throw ResourceError("cannot create output directory: " +
                                dir_.string());
    }

    void param(const std::string& key, const json& value) {
        params_[key] = value;
    }

    void addRecord(const EstimateRecord& r) { records_.push_back(r); }

    void writeCsv(const std::string& name, const std::string& header,
                  const std::vector<std::string>& rows) {
        std::ofstream out = open(name);
        out << header << "\n";
        for (const auto& row : rows) out << row << "\n";
    }

    void writeJson(const std::string& name, const json& j) {
        std::ofstream out = open(name);
        out << j.dump(2) << "\n";
    }

    // Writes records.csv and manifest.json; returns the process exit code.
    int finish() {
        std::vector<std::string> rows;
        bool allPass = true;
        for (const auto& r : records_) {
            rows.push_back(r.name + "," + fmt(r.estimate) + "," +
                           fmt(r.ci95) + "," + std::to_string(r.trials) + "," +
                           std::to_string(r.seed) + "," + fmt(r.theory) + "," +
                           (r.pass ? "PASS" : "FAIL"));
            allPass = allPass && r.pass;
        }
        writeCsv("records.csv", "name,estimate,ci95,trials,seed,theory,verdict",
                 rows);

        json manifest;
        manifest["command"] = command_;
        manifest["space_file"] = spaceFile_;
        manifest["seed"] = seed_;
        manifest["threads"] = threads_;
        manifest["parameters"] = params_;
        manifest["artifacts"] = files_;
        manifest["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
        // the hash covers the command, every parameter, and the space content,
        // so identical hashes imply byte-identical CSV bodies
        char hash[20];
        std::snprintf(hash, sizeof(hash), "%016llx",
                      static_cast<unsigned long long>(
                          fnv1a(command_ + params_.dump() + spaceJson_ +
                                std::to_string(seed_))));
        manifest["config_hash"] = hash;
        manifest["timestamp_utc"] = timestamp();

        writeJson("manifest.json", manifest);
        for (const auto& r : records_)
            std::cout << (r.pass ? "PASS " : "FAIL ") << r.name
                      << "  estimate=" << fmt(r.estimate)
                      << "  theory=" << fmt(r.theory) << "\n";
        std::cout << "artifacts written to " << dir_.string() << "\n";
        return allPass ? 0 : 1;
    }

  private:
    std::ofstream open(const std::string& name) {
        if (name != "manifest.json") files_.push_back(name);
        std::ofstream out(dir_ / name);
        if (!out)
            throw ResourceError("cannot write artifact: " +
                                (dir_ / name).string());
        return out;
    }

    static std::string timestamp() {
        const std::time_t now =
            std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char buf[32];
        std::tm tm{};
        gmtime_r(&now, &tm);
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
        return buf;
    }

    std::string command_;
    fs::path dir_;
    std::string spaceFile_;
    std::string spaceJson_;
    std::uint64_t seed_ = 0;
    int threads_ = 1;
    json params_ = json::object();
    std::vector<std::string> files_;
    std::vector<EstimateRecord> records_;
};

// Options shared by every subcommand.
struct Common {
    std::string spaceFile;
    std::string outDir = "out";
    std::uint64_t seed = 0;
    int threads = 1;
};

void addCommon(CLI::App* cmd, Common& c) {
    cmd->add_option("--space", c.spaceFile, "space description JSON file")
        ->required();
    cmd->add_option("--out", c.outDir, "output directory (default: out)");
    cmd->add_option("--seed", c.seed, "RNG seed (default 0, always explicit)");
    cmd->add_option("--threads", c.threads, "worker thread bound (default 1)")
        ->check(CLI::PositiveNumber);
}

std::string readFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ResourceError("cannot read space file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Run {
    std::shared_ptr<SpaceModel> space;
    Artifacts art;
};

Run startRun(const std::string& command, const Common& c) {
    const std::string text = readFile(c.spaceFile);
    return {loadSpace(text),
            Artifacts(command, c.outDir, c.spaceFile, text, c.seed, c.threads)};
}

EstimateRecord record(std::string name, double estimate, double ci95,
                      std::uint64_t trials, std::uint64_t seed, double theory,
                      bool pass) {
    return {std::move(name), estimate, ci95, trials, seed, theory, pass};
}

// Scale ladder from tMax down to tMin (inclusive) in factors of `base`.
std::vector<double> scaleLadder(double tMax, double tMin, double base) {
    if (!(tMin > 0) || !(tMin < tMax) || !(tMax < 1) || !(base > 0) ||
        !(base < 1))
        throw DomainError("scale ladder needs 0 < tMin < tMax < 1");
    std::vector<double> scales;
    for (double t = tMax; t > tMin * (1 + 1e-12); t *= base)
        scales.push_back(t);
    scales.push_back(tMin);
    return scales;
}

double naturalBase(const SpaceModel& space) {
    if (space.isCircle()) return 0.5;
    const auto& ifs = dynamic_cast<const SelfSimilarSpace&>(space);
    return *std::max_element(ifs.ratios().begin(), ifs.ratios().end());
}

// Thermodynamic prediction for the covering exponent, when the space has an
// analyzable pressure (equal-ratio IFS or constant-weight circle).
std::optional<double> thermoSlope(const SpaceModel& space, double gamma,
                                  int depth) {
    try {
        const PressureAnalyzer pa(space, depth);
        return mOfGamma(pa, gamma).m;
    } catch (const UnsupportedSpaceError&) {
        return std::nullopt;
    }
}

json summaryJson(const PressureAnalyzer& pa, std::uint64_t /*seed*/) {
    const SpectrumTable table = spectrumTable(pa);
    json j;
    j["Q"] = pa.regularityExponent();
    j["alpha0"] = table.alphaZero;
    j["alpha_min"] = table.alphaMin;
    j["alpha_max"] = table.alphaMax;
    j["gamma0"] = gammaZero(pa);
    return j;
}

void dumpRealization(Artifacts& art, const Realization& real) {
    std::vector<std::string> events, surviving;
    for (const auto& ev : real.events)
        events.push_back(fmt(ev.center) + "," + fmt(ev.radius));
    for (const auto& [lo, hi] : real.surviving)
        surviving.push_back(fmt(lo) + "," + fmt(hi));
    art.writeCsv("events.csv", "center,radius", events);
    art.writeCsv("surviving.csv", "lo,hi", surviving);
}

// ---------------------------------------------------------------- commands

int cmdMoran(const Common& c) {
    Run run = startRun("moran", c);
    const SpaceModel& sp = *run.space;
    double residual = 0;
    if (const auto* ifs = dynamic_cast<const SelfSimilarSpace*>(&sp))
        residual = ifs->moranResidual();
    const double q = sp.regularityExponent();
    run.art.addRecord(record("moran-exponent", q, 0, 0, c.seed, q, true));
    run.art.addRecord(record("moran-residual", residual, 0, 0, c.seed, 0,
                             std::abs(residual) <= 1e-12));
    run.art.writeJson("moran.json",
                      {{"Q", q}, {"residual", residual}, {"kind", sp.kindName()}});
    return run.art.finish();
}

int cmdRegularity(const Common& c) {
    int gridPoints = 16;
    // grid of (x, r): measure-sampled centres times a log spread of radii
    Run run = startRun("regularity", c);
    const SpaceModel& sp = *run.space;
    RngStream rng = RngStream::from(c.seed, {901});
    std::vector<std::pair<double, double>> grid;
    for (int i = 0; i < gridPoints; ++i) {
        const double x = sp.samplePoint(rng, 1e-9);
        for (double r = 1.0; r > 1e-4; r *= 0.25) grid.push_back({x, r});
    }
    const RegularityBounds b = verifyRegularity(sp, grid);
    run.art.param("grid_points", grid.size());
    run.art.addRecord(record("regularity-lower", b.c0, 0, 0, c.seed, 0,
                             b.c0 > 0));
    run.art.addRecord(record("regularity-upper", b.C0, 0, 0, c.seed, 0,
                             std::isfinite(b.C0) && b.C0 >= b.c0));
    run.art.writeJson("regularity.json",
                      {{"c0", b.c0}, {"C0", b.C0}, {"Q", sp.regularityExponent()}});
    return run.art.finish();
}

int cmdDensity(const Common& c, std::vector<double>& xs, double gamma,
               double tMin, int tCount) {
    Run run = startRun("density", c);
    const SpaceModel& sp = *run.space;
    if (xs.empty()) {  // default: five measure-typical points
        RngStream rng = RngStream::from(c.seed, {902});
        for (int i = 0; i < 5; ++i) xs.push_back(sp.samplePoint(rng, 1e-12));
    }
    if (tCount < 2) throw DomainError("need at least two scales");
    std::vector<double> tGrid;
    for (int i = 0; i < tCount; ++i)
        tGrid.push_back(std::exp(std::log(0.5) +
                                 (std::log(tMin) - std::log(0.5)) * i /
                                     (tCount - 1)));
    run.art.param("gamma", gamma);
    run.art.param("t_min", tMin);
    run.art.param("t_count", tCount);
    run.art.param("x", xs);
    std::vector<std::string> rows;
    for (double x : xs) {
        const DensityProfile prof = densityProfile(sp, x, tGrid);
        for (std::size_t i = 0; i < prof.tGrid.size(); ++i) {
            const double p =
                survivalProbability(sp, x, prof.tGrid[i], gamma);
            rows.push_back(fmt(x) + "," + fmt(prof.tGrid[i]) + "," +
                           fmt(prof.values[i]) + "," + fmt(p));
        }
    }
    run.art.writeCsv("density.csv", "x,t,A,p", rows);
    run.art.addRecord(record("density-profile-rows",
                             static_cast<double>(rows.size()), 0, 0, c.seed,
                             static_cast<double>(xs.size() * tCount), true));
    return run.art.finish();
}

int cmdAdditivity(const Common& c, int nMax, int kMax, int points) {
    Run run = startRun("additivity", c);
    const SpaceModel& sp = *run.space;
    RngStream rng = RngStream::from(c.seed, {903});
    std::vector<double> xs;
    const double res = std::pow(shiftScale(sp), 30);
    for (int i = 0; i < points; ++i) xs.push_back(sp.samplePoint(rng, res));
    const AdditivityTable table = checkAsymptoticAdditivity(sp, nMax, kMax, xs);
    run.art.param("n_max", nMax);
    run.art.param("k_max", kMax);
    run.art.param("points", points);
    std::vector<std::string> rows;
    for (std::size_t n = 0; n < table.epsilon.size(); ++n)
        rows.push_back(std::to_string(n + 1) + "," + fmt(table.epsilon[n]));
    run.art.writeCsv("additivity.csv", "n,epsilon", rows);
    run.art.addRecord(record("additivity-epsilon-final", table.epsilon.back(),
                             0, 0, c.seed, 0, table.epsilon.back() <= 1e-3));
    return run.art.finish();
}

int cmdPressure(const Common& c, int depth, double qMax, int qCount) {
    Run run = startRun("pressure", c);
    const PressureAnalyzer pa(*run.space, depth);
    run.art.param("depth", depth);
    run.art.param("q_max", qMax);
    run.art.param("q_count", qCount);
    std::vector<std::string> rows;
    for (int i = 0; i < qCount; ++i) {
        const double q = -qMax + 2 * qMax * i / (qCount - 1);
        const PressureValue p = pa.tilde(q);
        rows.push_back(fmt(q) + "," + fmt(p.low) + "," + fmt(p.high));
    }
    run.art.writeCsv("pressure.csv", "q,P_low,P_high", rows);
    const PressureValue p0 = pa.tilde(0.0);
    const double q = pa.regularityExponent();
    run.art.addRecord(record("pressure-at-zero", p0.value, p0.high - p0.low, 0,
                             c.seed, q, std::abs(p0.value - q) <= 1e-6));
    run.art.writeJson("summary.json", summaryJson(pa, c.seed));
    return run.art.finish();
}

int cmdSpectrum(const Common& c, int depth, int gridSize) {
    Run run = startRun("spectrum", c);
    const PressureAnalyzer pa(*run.space, depth);
    run.art.param("depth", depth);
    run.art.param("grid", gridSize);
    const SpectrumTable table = spectrumTable(pa, gridSize);
    std::vector<std::string> rows;
    for (const auto& pt : table.points)
        rows.push_back(fmt(pt.alpha) + "," + fmt(pt.f));
    run.art.writeCsv("spectrum.csv", "alpha,f", rows);
    const double q = pa.regularityExponent();
    run.art.addRecord(record("spectrum-peak", table.fAtAlphaZero, 0, 0, c.seed,
                             q, std::abs(table.fAtAlphaZero - q) <= 5e-3));
    run.art.writeJson("summary.json", summaryJson(pa, c.seed));
    return run.art.finish();
}

int cmdMCurve(const Common& c, int depth, int gridSize) {
    Run run = startRun("mcurve", c);
    const PressureAnalyzer pa(*run.space, depth);
    run.art.param("depth", depth);
    run.art.param("grid", gridSize);
    const double g0 = gammaZero(pa);
    std::vector<double> gammas;
    for (int i = 0; i < gridSize; ++i)
        gammas.push_back(1.2 * g0 * i / (gridSize - 1));
    const auto curve = mCurve(pa, gammas);
    std::vector<std::string> rows;
    bool decreasing = true;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        rows.push_back(fmt(curve[i].gamma) + "," + fmt(curve[i].m));
        if (i > 0 && curve[i].m >= curve[i - 1].m) decreasing = false;
    }
    run.art.writeCsv("mcurve.csv", "gamma,m", rows);
    const double q = pa.regularityExponent();
    run.art.addRecord(record("mcurve-at-zero", curve.front().m, 0, 0, c.seed,
                             q, std::abs(curve.front().m - q) <= 1e-6));
    run.art.addRecord(
        record("mcurve-strictly-decreasing", decreasing ? 1 : 0, 0, 0, c.seed,
               1, decreasing));
    run.art.writeJson("summary.json", summaryJson(pa, c.seed));
    return run.art.finish();
}

int cmdGammaZero(const Common& c, int depth) {
    Run run = startRun("gamma0", c);
    const SpaceModel& sp = *run.space;
    const PressureAnalyzer pa(sp, depth);
    run.art.param("depth", depth);
    const double g0 = gammaZero(pa);
    const double tStar =
        sp.isCircle() ? 1e-4 : std::pow(pa.shiftRatio(), 6);
    const CoarseBounds cb = coarseBounds(sp, tStar, 0.0);
    const bool inBracket = g0 >= cb.gamma0Low - 1e-9 && g0 <= cb.gamma0High + 1e-9;
    run.art.addRecord(record("gamma-zero", g0, 0, 0, c.seed,
                             0.5 * (cb.gamma0Low + cb.gamma0High), inBracket));
    json j = summaryJson(pa, c.seed);
    j["gamma0_low"] = cb.gamma0Low;
    j["gamma0_high"] = cb.gamma0High;
    run.art.writeJson("summary.json", j);
    return run.art.finish();
}

int cmdAlphaZero(const Common& c, int depth, int samples) {
    Run run = startRun("alpha0", c);
    const PressureAnalyzer pa(*run.space, depth);
    run.art.param("depth", depth);
    run.art.param("samples", samples);
    const double analytic = alphaZeroEstimate(pa);
    const double mc = alphaZeroMonteCarlo(*run.space, c.seed, samples);
    run.art.addRecord(record("alpha-zero", analytic, 0,
                             static_cast<std::uint64_t>(samples), c.seed, mc,
                             std::abs(analytic - mc) <= 0.05));
    json j = summaryJson(pa, c.seed);
    j["alpha0_mc"] = mc;
    run.art.writeJson("summary.json", j);
    return run.art.finish();
}

int cmdSublevel(const Common& c, int depth, double beta, int kMin, int kMax) {
    Run run = startRun("sublevel", c);
    const SpaceModel& sp = *run.space;
    const double base = naturalBase(sp);
    double betaUsed = beta;
    double fBeta = 0, q = sp.regularityExponent();
    {
        const PressureAnalyzer pa(sp, depth);
        if (!(betaUsed > 0)) betaUsed = alphaZeroEstimate(pa) - 0.1;
        const auto f = spectrumValue(pa, betaUsed);
        if (!f)
            throw DomainError(
                "beta lies outside the attainable exponent range");
        fBeta = *f;
    }
    run.art.param("depth", depth);
    run.art.param("beta", betaUsed);
    run.art.param("k_min", kMin);
    run.art.param("k_max", kMax);
    std::vector<std::string> rows;
    std::vector<double> xs, ys;
    for (int k = kMin; k <= kMax; ++k) {
        const double r = std::pow(base, k);
        const SublevelMass m = sublevelMeasure(sp, betaUsed, r);
        rows.push_back(fmt(r) + "," + fmt(m.low) + "," + fmt(m.estimate) +
                       "," + fmt(m.high) + "," + std::to_string(m.cellCount));
        if (m.estimate > 0) {
            xs.push_back(std::log(1.0 / r));
            ys.push_back(std::log(m.estimate));
        }
    }
    run.art.writeCsv("sublevel.csv", "r,mass_low,mass,mass_high,cells", rows);
    if (xs.size() < 2)
        throw DomainError("sublevel mass vanished on the whole ladder");
    const double decay = -fitLine(xs, ys).slope;  // mass ~ r^decay
    const double theory = q - fBeta;
    run.art.addRecord(record("sublevel-decay", decay, 0, 0, c.seed, theory,
                             decay >= theory - 0.1));
    return run.art.finish();
}

int cmdSimulate(const Common& c, double gamma, double t, double tMax,
                std::uint64_t trials, int depth, bool dump) {
    Run run = startRun("simulate", c);
    const SpaceModel& sp = *run.space;
    const auto scales = scaleLadder(tMax, t, naturalBase(sp));
    run.art.param("gamma", gamma);
    run.art.param("t", t);
    run.art.param("t_max", tMax);
    run.art.param("trials_per_scale", trials);
    run.art.param("depth", depth);
    const CoveringExponent cov =
        estimateCoveringExponent(sp, gamma, scales, trials, c.seed, c.threads);
    std::vector<std::string> rows;
    for (const auto& r : cov.rows)
        rows.push_back(fmt(r.t) + "," + fmt(r.detExpected) + "," +
                       fmt(r.stochMean) + "," + fmt(r.stochVar) + "," +
                       std::to_string(r.trials));
    run.art.writeCsv("covering.csv", "t,det_expected,stoch_mean,stoch_var,trials",
                     rows);

    const std::optional<double> predicted = thermoSlope(sp, gamma, depth);
    const double detTheory = predicted.value_or(cov.detSlope);
    run.art.addRecord(record("covering-slope-deterministic", cov.detSlope, 0,
                             0, c.seed, detTheory,
                             std::abs(cov.detSlope - detTheory) <= 0.05));
    if (trials > 0) {
        const double ci = 1.96 * cov.stochSlopeSe;
        run.art.addRecord(
            record("covering-slope-stochastic", cov.stochSlope, ci, trials,
                   c.seed, detTheory,
                   std::abs(cov.stochSlope - detTheory) <=
                       0.05 + 3.0 * cov.stochSlopeSe));
        if (cov.r2 < 0.99)
            std::cerr << "warning: covering regression R^2 = " << fmt(cov.r2)
                      << " < 0.99; treat the slope with caution\n";
    }
    json j;
    j["det_slope"] = cov.detSlope;
    j["stoch_slope"] = cov.stochSlope;
    j["stoch_slope_se"] = cov.stochSlopeSe;
    j["r2"] = cov.r2;
    if (predicted) j["thermo_slope"] = *predicted;
    run.art.writeJson("covering.json", j);
    if (dump) {
        RngStream rng = RngStream::from(c.seed, {910});
        dumpRealization(run.art,
                        buildCutout(sp, sampleEvents(sp, gamma, t, rng)));
    }
    return run.art.finish();
}

int cmdSurvival(const Common& c, double x, double gamma, double t,
                std::uint64_t trials, bool dump) {
    Run run = startRun("survival", c);
    const SpaceModel& sp = *run.space;
    run.art.param("x", x);
    run.art.param("gamma", gamma);
    run.art.param("t", t);
    run.art.param("trials", trials);
    const SurvivalEstimate est =
        survivalEstimate(sp, x, gamma, t, trials, c.seed, c.threads);
    const double sigma = est.observed.wilsonHalfWidth / 1.96;
    run.art.addRecord(record(
        "survival-probability", est.observed.pointEstimate,
        est.observed.wilsonHalfWidth, trials, c.seed, est.theory,
        std::abs(est.observed.pointEstimate - est.theory) <= 3.0 * sigma + 1e-12));
    if (dump) {
        RngStream rng = RngStream::from(c.seed, {911});
        dumpRealization(run.art,
                        buildCutout(sp, sampleEvents(sp, gamma, t, rng)));
    }
    return run.art.finish();
}

int cmdExpectedMeasure(const Common& c, double gamma, double t,
                       std::uint64_t trials) {
    Run run = startRun("expected-measure", c);
    run.art.param("gamma", gamma);
    run.art.param("t", t);
    run.art.param("trials", trials);
    const MassCheck mc =
        expectedMassCheck(*run.space, gamma, t, trials, c.seed, c.threads);
    run.art.addRecord(record(
        "expected-measure", mc.mcMean, 1.96 * mc.mcSe, trials, c.seed,
        mc.quadrature, std::abs(mc.mcMean - mc.quadrature) <= 3.0 * mc.mcSe + 1e-12));
    return run.art.finish();
}

int cmdMartingale(const Common& c, double gamma, double t,
                  std::uint64_t trials) {
    Run run = startRun("martingale", c);
    run.art.param("gamma", gamma);
    run.art.param("t", t);
    run.art.param("trials", trials);
    const MartingaleResult res =
        martingaleCheck(*run.space, gamma, t, trials, c.seed, c.threads);
    run.art.addRecord(record(
        "martingale-whole", res.whole.mean, 1.96 * res.whole.se, trials,
        c.seed, 1.0, std::abs(res.whole.mean - 1.0) <= 3.0 * res.whole.se + 1e-9));
    run.art.addRecord(record("martingale-restricted", res.restricted.mean,
                             1.96 * res.restricted.se, trials, c.seed,
                             res.restrictedTheory,
                             std::abs(res.restricted.mean - res.restrictedTheory) <=
                                 3.0 * res.restricted.se + 1e-9));
    return run.art.finish();
}

int cmdEnergy(const Common& c, double s, int maxLevel) {
    Run run = startRun("energy", c);
    run.art.param("s", s);
    run.art.param("max_level", maxLevel);
    const EnergyResult res = energyIntegral(*run.space, s, maxLevel);
    if (res.divergent)
        std::cerr << "note: the refinement still moved the value by "
                  << fmt(100 * res.lastRelChange)
                  << "% at the last level; the integral looks divergent\n";
    run.art.addRecord(record("energy-integral", res.value, 0, 0, c.seed,
                             res.value, !res.divergent));
    run.art.writeJson("energy.json", {{"value", res.value},
                                      {"levels", res.levels},
                                      {"last_rel_change", res.lastRelChange},
                                      {"divergent", res.divergent}});
    return run.art.finish();
}

int cmdExtinction(const Common& c, double gamma, double t,
                  std::uint64_t trials) {
    Run run = startRun("extinction", c);
    run.art.param("gamma", gamma);
    run.art.param("t", t);
    run.art.param("trials", trials);
    const ExtinctionResult res =
        extinctionProbe(*run.space, gamma, t, trials, c.seed, c.threads);
    run.art.addRecord(record("extinction-fraction", res.extinct.pointEstimate,
                             res.extinct.wilsonHalfWidth, trials, c.seed,
                             res.extinct.pointEstimate, true));
    run.art.writeJson("extinction.json",
                      {{"fraction", res.extinct.pointEstimate},
                       {"wilson_low", res.extinct.wilsonLow},
                       {"wilson_high", res.extinct.wilsonHigh}});
    return run.art.finish();
}

int cmdSweep(const Common& c, double gammaMin, double gammaMax,
             int gammaCount, double t, std::uint64_t trials) {
    Run run = startRun("sweep", c);
    if (gammaCount < 2) throw DomainError("need at least two gammas");
    std::vector<double> gammas;
    for (int i = 0; i < gammaCount; ++i)
        gammas.push_back(gammaMin +
                         (gammaMax - gammaMin) * i / (gammaCount - 1));
    run.art.param("gamma_min", gammaMin);
    run.art.param("gamma_max", gammaMax);
    run.art.param("gamma_count", gammaCount);
    run.art.param("t", t);
    run.art.param("trials", trials);
    const auto rows =
        gammaSweep(*run.space, gammas, t, trials, c.seed, c.threads);
    std::vector<std::string> lines;
    bool nested = true, monotone = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        lines.push_back(fmt(rows[i].gamma) + "," +
                        fmt(rows[i].cellSurvivalMean) + "," +
                        fmt(rows[i].extinctFraction) + "," +
                        (rows[i].nested ? "1" : "0"));
        nested = nested && rows[i].nested;
        if (i > 0) {
            monotone = monotone &&
                       rows[i].cellSurvivalMean <=
                           rows[i - 1].cellSurvivalMean + 1e-12 &&
                       rows[i].extinctFraction >=
                           rows[i - 1].extinctFraction - 1e-12;
        }
    }
    run.art.writeCsv("sweep.csv",
                     "gamma,cell_survival_mean,extinct_fraction,nested", lines);
    run.art.addRecord(
        record("sweep-nested", nested ? 1 : 0, 0, trials, c.seed, 1, nested));
    run.art.addRecord(record("sweep-monotone", monotone ? 1 : 0, 0, trials,
                             c.seed, 1, monotone));
    return run.art.finish();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Poissonian cutout-set laboratory: simulation and "
                 "thermodynamic-formalism estimates on Q-regular spaces"};
    app.require_subcommand(1);
    int exitCode = 0;
    const auto run = [&exitCode](auto&& fn) {
        // defer: subcommand bodies run after parsing completes
        return [&exitCode, fn]() { exitCode = fn(); };
    };

    // ---- space / structure commands
    Common cMoran;
    auto* moran = app.add_subcommand("moran", "regularity exponent Q and Moran residual");
    addCommon(moran, cMoran);
    moran->callback(run([&] { return cmdMoran(cMoran); }));

    Common cReg;
    auto* reg = app.add_subcommand("regularity", "empirical Q-regularity constants");
    addCommon(reg, cReg);
    reg->callback(run([&] { return cmdRegularity(cReg); }));

    Common cDen;
    std::vector<double> denX;
    double denGamma = 1.0, denTMin = 1e-4;
    int denTCount = 12;
    auto* den = app.add_subcommand("density", "average density profiles A(x,t)");
    addCommon(den, cDen);
    den->add_option("--x", denX, "evaluation points (default: 5 sampled)");
    den->add_option("--gamma", denGamma, "survival exponent for the p column");
    den->add_option("--tmin", denTMin, "finest scale (default 1e-4)");
    den->add_option("--tcount", denTCount, "number of scales (default 12)");
    den->callback(run([&] {
        return cmdDensity(cDen, denX, denGamma, denTMin, denTCount);
    }));

    Common cAdd;
    int addN = 8, addK = 8, addPts = 20;
    auto* add = app.add_subcommand("additivity", "asymptotic additivity defects of the shell cocycle");
    addCommon(add, cAdd);
    add->add_option("--nmax", addN, "largest block length (default 8)");
    add->add_option("--kmax", addK, "largest shift (default 8)");
    add->add_option("--points", addPts, "sample points (default 20)");
    add->callback(run([&] { return cmdAdditivity(cAdd, addN, addK, addPts); }));

    // ---- thermodynamic commands
    Common cPre;
    int preDepth = 10, preCount = 81;
    double preQMax = 10.0;
    auto* pre = app.add_subcommand("pressure", "normalized pressure curve with brackets");
    addCommon(pre, cPre);
    pre->add_option("--depth", preDepth, "cylinder depth (default 10)");
    pre->add_option("--qmax", preQMax, "q range half-width (default 10)");
    pre->add_option("--qcount", preCount, "grid size (default 81)");
    pre->callback(run([&] { return cmdPressure(cPre, preDepth, preQMax, preCount); }));

    Common cSpec;
    int specDepth = 10, specGrid = 200;
    auto* spec = app.add_subcommand("spectrum", "multifractal spectrum f(alpha)");
    addCommon(spec, cSpec);
    spec->add_option("--depth", specDepth, "cylinder depth (default 10)");
    spec->add_option("--grid", specGrid, "alpha grid size (default 200)");
    spec->callback(run([&] { return cmdSpectrum(cSpec, specDepth, specGrid); }));

    Common cM;
    int mDepth = 10, mGrid = 25;
    auto* mc = app.add_subcommand("mcurve", "cutout dimension m(gamma)");
    addCommon(mc, cM);
    mc->add_option("--depth", mDepth, "cylinder depth (default 10)");
    mc->add_option("--grid", mGrid, "gamma grid size (default 25)");
    mc->callback(run([&] { return cmdMCurve(cM, mDepth, mGrid); }));

    Common cG0;
    int g0Depth = 10;
    auto* g0 = app.add_subcommand("gamma0", "critical gamma where m vanishes");
    addCommon(g0, cG0);
    g0->add_option("--depth", g0Depth, "cylinder depth (default 10)");
    g0->callback(run([&] { return cmdGammaZero(cG0, g0Depth); }));

    Common cA0;
    int a0Depth = 10, a0Samples = 200;
    auto* a0 = app.add_subcommand("alpha0", "typical exponent alpha0 with Monte Carlo cross-check");
    addCommon(a0, cA0);
    a0->add_option("--depth", a0Depth, "cylinder depth (default 10)");
    a0->add_option("--samples", a0Samples, "Monte Carlo samples (default 200)");
    a0->callback(run([&] { return cmdAlphaZero(cA0, a0Depth, a0Samples); }));

    Common cSub;
    int subDepth = 10, subKMin = 4, subKMax = 10;
    double subBeta = 0;
    auto* sub = app.add_subcommand("sublevel", "decay of the sublevel mass {A < beta}");
    addCommon(sub, cSub);
    sub->add_option("--depth", subDepth, "cylinder depth for f(beta) (default 10)");
    sub->add_option("--beta", subBeta, "level (default: alpha0 - 0.1)");
    sub->add_option("--kmin", subKMin, "coarsest ladder exponent (default 4)");
    sub->add_option("--kmax", subKMax, "finest ladder exponent (default 10)");
    sub->callback(run([&] {
        return cmdSublevel(cSub, subDepth, subBeta, subKMin, subKMax);
    }));

    // ---- stochastic commands
    Common cSim;
    double simGamma = 0.2, simT = 1e-3, simTMax = 0.25;
    std::uint64_t simTrials = 200;
    int simDepth = 10;
    bool simDump = false;
    auto* sim = app.add_subcommand("simulate", "covering-number exponent regression");
    addCommon(sim, cSim);
    sim->add_option("--gamma", simGamma, "cutout intensity (default 0.2)");
    sim->add_option("--t", simT, "finest scale (default 1e-3)");
    sim->add_option("--tmax", simTMax, "coarsest scale (default 0.25)");
    sim->add_option("--trials", simTrials, "trials per scale (default 200)");
    sim->add_option("--depth", simDepth, "pressure depth for the predicted slope");
    sim->add_flag("--dump", simDump, "dump one realization (events.csv, surviving.csv)");
    sim->callback(run([&] {
        return cmdSimulate(cSim, simGamma, simT, simTMax, simTrials, simDepth,
                           simDump);
    }));

    Common cSur;
    double surX = 0.0, surGamma = 0.2, surT = 1e-3;
    std::uint64_t surTrials = 10000;
    bool surDump = false;
    auto* sur = app.add_subcommand("survival", "pointwise survival probability vs theory");
    addCommon(sur, cSur);
    sur->add_option("--x", surX, "query point (default 0)");
    sur->add_option("--gamma", surGamma, "cutout intensity (default 0.2)");
    sur->add_option("--t", surT, "scale (default 1e-3)");
    sur->add_option("--trials", surTrials, "Monte Carlo trials (default 10000)");
    sur->add_flag("--dump", surDump, "dump one realization (events.csv, surviving.csv)");
    sur->callback(run([&] {
        return cmdSurvival(cSur, surX, surGamma, surT, surTrials, surDump);
    }));

    Common cExp;
    double expGamma = 0.3, expT = 0.01;
    std::uint64_t expTrials = 4000;
    auto* expm = app.add_subcommand("expected-measure", "mean surviving mass vs quadrature");
    addCommon(expm, cExp);
    expm->add_option("--gamma", expGamma, "cutout intensity (default 0.3)");
    expm->add_option("--t", expT, "scale (default 0.01)");
    expm->add_option("--trials", expTrials, "Monte Carlo trials (default 4000)");
    expm->callback(run([&] {
        return cmdExpectedMeasure(cExp, expGamma, expT, expTrials);
    }));

    Common cMar;
    double marGamma = 0.3, marT = 0.01;
    std::uint64_t marTrials = 4000;
    auto* mar = app.add_subcommand("martingale", "inverse-probability weighted mass normalization");
    addCommon(mar, cMar);
    mar->add_option("--gamma", marGamma, "cutout intensity (default 0.3)");
    mar->add_option("--t", marT, "scale (default 0.01)");
    mar->add_option("--trials", marTrials, "Monte Carlo trials (default 4000)");
    mar->callback(run([&] {
        return cmdMartingale(cMar, marGamma, marT, marTrials);
    }));

    Common cEne;
    double eneS = 0.5;
    int eneLevel = 7;
    auto* ene = app.add_subcommand("energy", "hierarchical s-energy of the natural measure");
    addCommon(ene, cEne);
    ene->add_option("--s", eneS, "energy exponent (default 0.5)");
    ene->add_option("--max-level", eneLevel, "refinement depth (default 7)");
    ene->callback(run([&] { return cmdEnergy(cEne, eneS, eneLevel); }));

    Common cExt;
    double extGamma = 1.0, extT = 0.01;
    std::uint64_t extTrials = 400;
    auto* ext = app.add_subcommand("extinction", "fraction of realizations with empty cut-set");
    addCommon(ext, cExt);
    ext->add_option("--gamma", extGamma, "cutout intensity (default 1)");
    ext->add_option("--t", extT, "scale (default 0.01)");
    ext->add_option("--trials", extTrials, "Monte Carlo trials (default 400)");
    ext->callback(run([&] {
        return cmdExtinction(cExt, extGamma, extT, extTrials);
    }));

    Common cSw;
    double swMin = 0.1, swMax = 1.0, swT = 0.01;
    int swCount = 6;
    std::uint64_t swTrials = 200;
    auto* sw = app.add_subcommand("sweep", "coupled gamma sweep with nesting checks");
    addCommon(sw, cSw);
    sw->add_option("--gamma-min", swMin, "smallest gamma (default 0.1)");
    sw->add_option("--gamma-max", swMax, "largest gamma (default 1)");
    sw->add_option("--gamma-count", swCount, "grid size (default 6)");
    sw->add_option("--t", swT, "scale (default 0.01)");
    sw->add_option("--trials", swTrials, "trials per gamma (default 200)");
    sw->callback(run([&] {
        return cmdSweep(cSw, swMin, swMax, swCount, swT, swTrials);
    }));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const InvalidSpaceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ResourceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const UnsupportedSpaceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return exitCode;
}
