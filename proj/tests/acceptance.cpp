// End-to-end acceptance suite: ten numbered criteria, one [PASS]/[FAIL] line
// each, with the tolerances pinned right next to the checks.  Exit code is 1
// when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "cutout/density.hpp"
#include "cutout/errors.hpp"
#include "cutout/rng.hpp"
#include "cutout/sim.hpp"
#include "cutout/space.hpp"
#include "cutout/stats.hpp"
#include "cutout/thermo.hpp"

using namespace cutout;

namespace {

constexpr std::uint64_t kSeed = 20240817;

SelfSimilarSpace ternarySpace() { return {{1.0 / 3, 1.0 / 3}, {0.0, 2.0 / 3}}; }
SelfSimilarSpace goldenSpace() { return {{0.5, 0.25}, {0.0, 0.75}}; }
CircleSpace unitCircle() { return CircleSpace({{0.0, 1.0, 1.0}}); }
CircleSpace twoBlockCircle() {
    return CircleSpace({{0.0, 0.5, 0.6}, {0.5, 1.0, 1.4}});
}

std::string fmt(const char* pattern, double a, double b = 0, double c = 0,
                double d = 0) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), pattern, a, b, c, d);
    return buf;
}

struct Criterion {
    int id;
    const char* label;
    bool (*check)(std::string& detail);
    double timeLimitSec;  // 0 = no limit pinned
};

// 1. Moran roots: residual <= 1e-12 on every fixture; ternary Q known.
bool c1Moran(std::string& detail) {
    bool ok = std::abs(ternarySpace().moranResidual()) <= 1e-12 &&
              std::abs(goldenSpace().moranResidual()) <= 1e-12;
    const double q = ternarySpace().regularityExponent();
    ok = ok && std::abs(q - 0.6309298) <= 1e-6;
    ok = ok && unitCircle().regularityExponent() == 1.0;
    ok = ok && twoBlockCircle().regularityExponent() == 1.0;
    detail = fmt("ternary Q = %.9f", q);
    return ok;
}

// 2. Circle closed forms: density value, survival law, covering slope.
bool c2Circle(std::string& detail) {
    const CircleSpace sp = unitCircle();
    const double a = averageDensity(sp, 0.3, 0.01);
    bool ok = std::abs(a - 1.9161) <= 1e-4;

    const SurvivalEstimate est =
        survivalEstimate(sp, 0.3, 0.25, 0.01, 100000, kSeed, 4);
    const double sigma = est.observed.wilsonHalfWidth / 1.96;
    ok = ok && std::abs(est.theory - 0.1101) <= 1e-4;
    ok = ok && std::abs(est.observed.pointEstimate - est.theory) <= 3 * sigma;

    std::vector<double> scales;
    for (int n = 6; n <= 14; ++n) scales.push_back(std::pow(2.0, -n));
    const CoveringExponent cov =
        estimateCoveringExponent(sp, 0.2, scales, 100, kSeed, 4);
    ok = ok && std::abs(cov.stochSlope - 0.60) <= 0.05;
    ok = ok && std::abs(cov.detSlope - 0.60) <= 0.05;
    detail = fmt("A = %.5f, p-hat = %.4f, slope = %.3f", a,
                 est.observed.pointEstimate, cov.stochSlope);
    return ok;
}

// 3. Thermodynamic consistency on the ternary space at depth 14.
bool c3Thermo(std::string& detail) {
    const SelfSimilarSpace sp = ternarySpace();
    const PressureAnalyzer pa(sp, 14);
    const double q = sp.regularityExponent();
    const PressureValue p0 = pa.tilde(0.0);
    bool ok = std::abs(p0.value - q) <= 1e-6;

    const SpectrumTable table = spectrumTable(pa);
    ok = ok && std::abs(table.fAtAlphaZero - q) <= 5e-3;

    // Legendre duality: |sup_alpha (f - gamma*alpha) - P~(-gamma)| small on a
    // 10-point gamma grid.
    std::vector<double> gammas;
    const double g0 = gammaZero(pa);
    for (int i = 0; i < 10; ++i) gammas.push_back(1.1 * g0 * (i + 1) / 10.0);
    double worstGap = 0;
    for (const MCurvePoint& pt : mCurve(pa, gammas))
        worstGap = std::max(worstGap, pt.crossGap);
    ok = ok && worstGap <= 1e-3;

    // strict excess over the naive tangent line at alpha0
    const double alpha0 = table.alphaZero;
    for (double g : {0.2, 0.4}) {
        const double m = pa.tilde(-g).value;
        ok = ok && m > q - g * alpha0;
    }
    detail = fmt("P~(0)-Q = %.2e, f(a0)-Q = %.2e, dual gap = %.2e",
                 p0.value - q, table.fAtAlphaZero - q, worstGap);
    return ok;
}

// 4. Covering exponent matches the pressure prediction on ternary.
bool c4Covering(std::string& detail) {
    const SelfSimilarSpace sp = ternarySpace();
    const PressureAnalyzer pa(sp, 14);
    std::vector<double> scales;
    for (int n = 6; n <= 14; ++n) scales.push_back(std::pow(3.0, -n));
    bool ok = true;
    std::string parts;
    for (double g : {0.2, 0.4}) {
        const double predicted = pa.tilde(-g).value;
        const CoveringExponent cov =
            estimateCoveringExponent(sp, g, scales, 500, kSeed, 4);
        ok = ok && std::abs(cov.detSlope - predicted) <= 0.05;
        ok = ok && std::abs(cov.stochSlope - predicted) <= 0.05;
        parts += fmt("g=%.1f: det %.3f/stoch %.3f vs %.3f  ", g, cov.detSlope,
                     cov.stochSlope, predicted);
    }
    detail = parts;
    return ok;
}

// 5. gamma0: root inside the coarse bracket, near the slope zero-crossing,
// and extinction nearly certain above it.
bool c5GammaZero(std::string& detail) {
    const SelfSimilarSpace sp = ternarySpace();
    const PressureAnalyzer pa(sp, 14);
    const double g0 = gammaZero(pa);
    const CoarseBounds cb = coarseBounds(sp, std::pow(1.0 / 3, 6), 0.0);
    bool ok = g0 >= cb.gamma0Low - 1e-9 && g0 <= cb.gamma0High + 1e-9;

    // zero-crossing of the deterministic covering slope as a function of gamma
    std::vector<double> scales;
    for (int n = 6; n <= 12; ++n) scales.push_back(std::pow(3.0, -n));
    std::vector<double> gs{g0 - 0.15, g0, g0 + 0.15}, slopes;
    for (double g : gs)
        slopes.push_back(
            estimateCoveringExponent(sp, g, scales, 0, kSeed).detSlope);
    const RegressionFit fit = fitLine(gs, slopes);
    const double crossing = -fit.intercept / fit.slope;
    ok = ok && std::abs(crossing - g0) <= 0.05;

    const ExtinctionResult ext =
        extinctionProbe(sp, g0 + 0.5, std::pow(3.0, -8), 200, kSeed, 4);
    ok = ok && ext.extinct.pointEstimate > 0.95;
    detail = fmt("g0 = %.4f, crossing = %.4f, extinct = %.3f", g0, crossing,
                 ext.extinct.pointEstimate);
    return ok;
}

// 6. Martingale normalization at (gamma, t) = (0.3, 3^-6), 1e4 trials.
bool c6Martingale(std::string& detail) {
    const MartingaleResult res =
        martingaleCheck(ternarySpace(), 0.3, std::pow(3.0, -6), 10000, kSeed, 4);
    bool ok = std::abs(res.whole.mean - 1.0) <= 3 * res.whole.se;
    ok = ok && std::abs(res.restricted.mean - res.restrictedTheory) <=
                   3 * res.restricted.se;
    detail = fmt("whole = %.4f +- %.4f, restricted-theory gap = %.4f",
                 res.whole.mean, res.whole.se,
                 res.restricted.mean - res.restrictedTheory);
    return ok;
}

// 7. Expected surviving mass vs cell quadrature, both spaces, two (gamma, t).
bool c7ExpectedMass(std::string& detail) {
    const SelfSimilarSpace tern = ternarySpace();
    const CircleSpace circ = unitCircle();
    bool ok = true;
    double worstZ = 0;
    for (const SpaceModel* sp :
         std::vector<const SpaceModel*>{&tern, &circ}) {
        for (const auto& [g, t] : std::vector<std::pair<double, double>>{
                 {0.3, 0.02}, {0.6, 0.005}}) {
            const MassCheck mc = expectedMassCheck(*sp, g, t, 4000, kSeed, 4);
            const double z =
                std::abs(mc.mcMean - mc.quadrature) / (mc.mcSe + 1e-15);
            worstZ = std::max(worstZ, z);
            ok = ok && std::abs(mc.mcMean - mc.quadrature) <= 3 * mc.mcSe + 1e-12;
        }
    }
    detail = fmt("worst z-score = %.2f over 4 checks", worstZ);
    return ok;
}

// 8. Sublevel mass decay at beta = alpha0 - 0.1 is at least as fast as the
// rate-function prediction Q - f(beta), minus slack 0.1.
bool c8Sublevel(std::string& detail) {
    const SelfSimilarSpace sp = ternarySpace();
    const PressureAnalyzer pa(sp, 14);
    const double beta = alphaZeroEstimate(pa) - 0.1;
    const double fBeta = spectrumValue(pa, beta).value();
    const double q = sp.regularityExponent();
    std::vector<double> xs, ys;
    for (int n = 6; n <= 14; ++n) {
        const double r = std::pow(3.0, -n);
        const SublevelMass m = sublevelMeasure(sp, beta, r, false);
        if (m.estimate > 0) {
            xs.push_back(std::log(r));
            ys.push_back(std::log(m.estimate));
        }
    }
    if (xs.size() < 2) {
        detail = "sublevel mass vanished on the whole ladder";
        return false;
    }
    const double slope = fitLine(xs, ys).slope;  // mass ~ r^slope
    const double bound = q - fBeta - 0.1;
    detail = fmt("slope = %.4f vs bound %.4f (f(beta) = %.4f)", slope, bound,
                 fBeta);
    return slope >= bound;
}

// 9. Asymptotic additivity: eps_15 < eps_5 on 100 measure-sampled points.
// The shell cocycle renormalizes exactly on an equal-ratio space, so both
// defects are floating-point round-off (~1e-13) rather than a genuine decay
// in the block length; the ordering is checked as stated and reported with
// both values so a flip under different rounding is visible.
bool c9Additivity(std::string& detail) {
    const SelfSimilarSpace sp = ternarySpace();
    RngStream rng = RngStream::from(kSeed, {9});
    std::vector<double> points;
    const double res = std::pow(1.0 / 3, 40);
    for (int i = 0; i < 100; ++i) points.push_back(sp.samplePoint(rng, res));
    const AdditivityTable table = checkAsymptoticAdditivity(sp, 15, 8, points);
    const double eps5 = table.epsilon[4], eps15 = table.epsilon[14];
    detail = fmt("eps_5 = %.3e, eps_15 = %.3e (both round-off level)", eps5,
                 eps15);
    return eps15 < eps5;
}

// 10. Determinism across thread counts and nested coupling along a sweep.
bool c10Determinism(std::string& detail) {
    const SelfSimilarSpace sp = ternarySpace();
    const double t = std::pow(3.0, -5);
    const SurvivalEstimate s1 = survivalEstimate(sp, 0.0, 0.4, t, 2000, kSeed, 1);
    const SurvivalEstimate s4 = survivalEstimate(sp, 0.0, 0.4, t, 2000, kSeed, 4);
    bool ok = s1.observed.pointEstimate == s4.observed.pointEstimate;

    const MartingaleResult m1 = martingaleCheck(sp, 0.3, t, 500, kSeed, 1);
    const MartingaleResult m4 = martingaleCheck(sp, 0.3, t, 500, kSeed, 4);
    ok = ok && m1.whole.mean == m4.whole.mean &&
         m1.restricted.mean == m4.restricted.mean;

    const std::vector<double> gammas{0.2, 0.4, 0.6, 0.8, 1.0};
    const auto rows1 = gammaSweep(sp, gammas, t, 200, kSeed, 1);
    const auto rows4 = gammaSweep(sp, gammas, t, 200, kSeed, 4);
    bool nested = true;
    for (std::size_t i = 0; i < rows1.size(); ++i) {
        ok = ok && rows1[i].cellSurvivalMean == rows4[i].cellSurvivalMean &&
             rows1[i].extinctFraction == rows4[i].extinctFraction;
        nested = nested && rows1[i].nested;
    }
    ok = ok && nested;
    detail = fmt("thread-count invariance + nesting over %.0f gammas",
                 double(gammas.size()));
    return ok;
}

}  // namespace

int main() {
    const Criterion criteria[] = {
        {1, "Moran exponents", c1Moran, 1.0},
        {2, "circle closed-form baseline", c2Circle, 120.0},
        {3, "thermodynamic consistency", c3Thermo, 60.0},
        {4, "covering exponent vs pressure", c4Covering, 600.0},
        {5, "gamma0 cross-validation", c5GammaZero, 0},
        {6, "martingale normalization", c6Martingale, 0},
        {7, "expected-measure identity", c7ExpectedMass, 0},
        {8, "sublevel decay rate", c8Sublevel, 0},
        {9, "asymptotic additivity ordering", c9Additivity, 0},
        {10, "determinism and coupling", c10Determinism, 0},
    };
    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = c.check(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double sec =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          start)
                .count();
        if (c.timeLimitSec > 0 && sec > c.timeLimitSec) {
            ok = false;
            detail += fmt(" [over time budget %.0fs]", c.timeLimitSec);
        }
        std::printf("[%s] criterion %2d  %-32s %s  (%.1fs)\n",
                    ok ? "PASS" : "FAIL", c.id, c.label, detail.c_str(), sec);
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    if (failures)
        std::printf("%d of 10 criteria failed\n", failures);
    else
        std::printf("all 10 criteria passed\n");
    return failures ? 1 : 0;
}
