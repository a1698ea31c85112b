#include "doctest.h"

#include <cmath>
#include <memory>
#include <utility>
#include <vector>

#include "cutout/errors.hpp"
#include "cutout/space.hpp"
#include "cutout/stats.hpp"

using namespace cutout;

namespace {

SelfSimilarSpace ternary() { return {{1.0 / 3, 1.0 / 3}, {0.0, 2.0 / 3}}; }
SelfSimilarSpace goldenTwoRatio() { return {{0.5, 0.25}, {0.0, 0.75}}; }
CircleSpace unitCircle() { return CircleSpace({{0.0, 1.0, 1.0}}); }
CircleSpace twoBlockCircle() {
    return CircleSpace({{0.0, 0.5, 0.6}, {0.5, 1.0, 1.4}});
}

// Independent route to the radial integral: monotone lower/upper Riemann sums
// of H(B(x,s)) s^{-Q-1} on a log-spaced grid.  Open balls are nested in s, so
// the endpoint measures bracket the integrand rigorously on each slice.
std::pair<double, double> radialEnvelope(const SpaceModel& sp, double x,
                                         double rlo, double rhi, int n) {
    const double q = sp.regularityExponent();
    double lo = 0, hi = 0, prev = rlo;
    double mPrev = sp.ballMeasure(x, prev, 1e-9);
    for (int j = 1; j <= n; ++j) {
        const double next = rlo * std::pow(rhi / rlo, double(j) / n);
        const double wgt = (std::pow(prev, -q) - std::pow(next, -q)) / q;
        const double mNext = sp.ballMeasure(x, next, 1e-9);
        lo += mPrev * wgt;
        hi += mNext * wgt;
        prev = next;
        mPrev = mNext;
    }
    return {lo, hi};
}

}  // namespace

TEST_CASE("moran exponent closed forms") {
    double resid = 1;
    const double qT = solveMoranExponent({1.0 / 3, 1.0 / 3}, &resid);
    CHECK(qT == doctest::Approx(std::log(2.0) / std::log(3.0)).epsilon(1e-14));
    CHECK(std::abs(resid) < 1e-12);

    const double phi = 0.5 * (1.0 + std::sqrt(5.0));
    const double qG = solveMoranExponent({0.5, 0.25}, &resid);
    CHECK(qG == doctest::Approx(std::log(phi) / std::log(2.0)).epsilon(1e-14));
    CHECK(std::abs(resid) < 1e-12);

    CHECK(solveMoranExponent({0.5, 0.5}) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("moran exponent rejects bad input") {
    CHECK_THROWS_AS(solveMoranExponent({0.5}), InvalidSpaceError);
    CHECK_THROWS_AS(solveMoranExponent({0.5, 1.0}), InvalidSpaceError);
    CHECK_THROWS_AS(solveMoranExponent({0.5, 0.0}), InvalidSpaceError);
    CHECK_THROWS_AS(solveMoranExponent({0.5, -0.25}), InvalidSpaceError);
}

TEST_CASE("space construction validates separation and shape") {
    CHECK_THROWS_AS(SelfSimilarSpace({0.6, 0.6}, {0.0, 0.4}), InvalidSpaceError);
    CHECK_THROWS_AS(SelfSimilarSpace({0.5, 0.5}, {0.0, 0.5}), InvalidSpaceError);
    CHECK_THROWS_AS(SelfSimilarSpace({0.3, 0.3}, {0.7, 0.0}), InvalidSpaceError);
    CHECK_THROWS_AS(SelfSimilarSpace({0.3}, {0.0}), InvalidSpaceError);
    CHECK_NOTHROW(SelfSimilarSpace({0.48, 0.48}, {0.0, 0.52}));
}

TEST_CASE("ternary space geometry") {
    const SelfSimilarSpace sp = ternary();
    CHECK(sp.hullLeft() == doctest::Approx(0.0));
    CHECK(sp.hullRight() == doctest::Approx(1.0));
    CHECK(sp.diameter() == doctest::Approx(1.0));
    CHECK(sp.minGap() == doctest::Approx(1.0 / 3));
    CHECK(sp.equalRatios());
    CHECK(sp.commonRatio() == doctest::Approx(1.0 / 3));
    CHECK(sp.renormAnchorDepth() == 1);
    CHECK(std::abs(sp.moranResidual()) < 1e-12);

    const Cylinder c0 = sp.cylinder({0});
    CHECK(c0.left == doctest::Approx(0.0));
    CHECK(c0.diam == doctest::Approx(1.0 / 3));
    CHECK(c0.mass == doctest::Approx(0.5).epsilon(1e-12));

    const Cylinder c11 = sp.cylinder({1, 1});
    CHECK(c11.left == doctest::Approx(8.0 / 9));
    CHECK(c11.diam == doctest::Approx(1.0 / 9));
    CHECK(c11.mass == doctest::Approx(0.25).epsilon(1e-12));

    CHECK_THROWS_AS(sp.cylinder({2}), DomainError);
}

TEST_CASE("golden-two-ratio geometry and anchor depth") {
    const SelfSimilarSpace sp = goldenTwoRatio();
    CHECK(sp.hullLeft() == doctest::Approx(0.0));
    CHECK(sp.hullRight() == doctest::Approx(1.0));
    CHECK(sp.minGap() == doctest::Approx(0.25));
    CHECK_FALSE(sp.equalRatios());
    CHECK_THROWS_AS(sp.commonRatio(), UnsupportedSpaceError);
    CHECK(sp.renormAnchorDepth() == 2);

    // Natural weights solve p = x, x^2 with x the golden section of 1.
    const double x = 0.5 * (std::sqrt(5.0) - 1.0);
    CHECK(sp.cylinder({0}).mass == doctest::Approx(x).epsilon(1e-12));
    CHECK(sp.cylinder({1}).mass == doctest::Approx(x * x).epsilon(1e-12));
}

TEST_CASE("first digit, shift, and escape distance") {
    const SelfSimilarSpace sp = ternary();
    CHECK(sp.firstDigit(0.1).value() == 0);
    CHECK(sp.firstDigit(0.9).value() == 1);
    CHECK_FALSE(sp.firstDigit(0.5).has_value());
    CHECK(sp.shiftPoint(0.1, 0) == doctest::Approx(0.3));
    CHECK(sp.shiftPoint(8.0 / 9, 1) == doctest::Approx(2.0 / 3));
    CHECK(sp.escapeDistance(0.1, 0) == doctest::Approx(2.0 / 3 - 0.1));
    CHECK(sp.escapeDistance(0.9, 1) == doctest::Approx(0.9 - 1.0 / 3));
}

TEST_CASE("ternary ball measures hit dyadic values") {
    const SelfSimilarSpace sp = ternary();
    CHECK(sp.ballMeasure(0.0, 1.0 / 3) == doctest::Approx(0.5).epsilon(1e-8));
    for (int k = 1; k <= 6; ++k)
        CHECK(sp.ballMeasure(0.0, std::pow(3.0, -k)) ==
              doctest::Approx(std::pow(2.0, -k)).epsilon(1e-8));
    CHECK(sp.ballMeasure(0.5, 1.0 / 6) == doctest::Approx(0.0));
    CHECK(sp.ballMeasure(1.0 / 3, 1.0 / 9) ==
          doctest::Approx(0.25).epsilon(1e-8));
    CHECK(sp.ballMeasure(0.5, 10.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(sp.ballMeasure(0.5, 0.0), DomainError);
    CHECK_THROWS_AS(sp.ballMeasure(2.0, 0.1), DomainError);
}

TEST_CASE("interval measure agrees with cylinder structure") {
    const SelfSimilarSpace sp = ternary();
    CHECK(sp.intervalMeasure(-1.0, 0.5) == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(sp.intervalMeasure(1.0 / 3, 2.0 / 3) == doctest::Approx(0.0));
    CHECK(sp.intervalMeasure(-5.0, 5.0) == doctest::Approx(1.0));
    CHECK(sp.intervalMeasure(0.7, 0.7) == doctest::Approx(0.0));
    CHECK(sp.intervalMeasure(2.0 / 3, 1.0) == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("cut sets match hand enumeration") {
    const SelfSimilarSpace tern = ternary();
    const auto level1 = tern.cutSet(1.0 / 3);
    REQUIRE(level1.size() == 2);
    CHECK(level1[0].word == Word{0});
    CHECK(level1[1].word == Word{1});

    const auto level2 = tern.cutSet(0.12);
    REQUIRE(level2.size() == 4);
    for (const auto& c : level2) {
        CHECK(c.diam == doctest::Approx(1.0 / 9));
        CHECK(c.word.size() == 2);
    }

    const SelfSimilarSpace gold = goldenTwoRatio();
    const auto cs = gold.cutSet(0.25);
    REQUIRE(cs.size() == 3);
    CHECK(cs[0].word == Word{0, 0});
    CHECK(cs[1].word == Word{0, 1});
    CHECK(cs[2].word == Word{1});

    CHECK_THROWS_AS(tern.cutSet(0.0), DomainError);
    CHECK_THROWS_AS(tern.cutSet(-1.0), DomainError);
}

TEST_CASE("cut set invariants across scales") {
    const SelfSimilarSpace sp = goldenTwoRatio();
    for (double tau : {0.3, 0.1, 0.037, 0.0123}) {
        const auto cs = sp.cutSet(tau);
        double mass = 0;
        double prevRight = -1e300;
        for (const auto& c : cs) {
            CHECK(c.diam <= tau * (1 + 1e-12));
            // parent cylinder must still exceed tau
            const double parentDiam =
                c.diam / sp.ratios()[c.word.back()];
            CHECK(parentDiam > tau * (1 - 1e-12));
            CHECK(c.left >= prevRight - 1e-12);
            prevRight = c.right();
            mass += c.mass;
        }
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("radial integral brackets and matches the direct route") {
    const SelfSimilarSpace sp = ternary();
    const IntegralResult renormed = sp.radialIntegral(0.0, 1.0 / 9, 1.0, 1e-9);
    const IntegralResult direct = sp.windowIntegral(0.0, 1.0 / 9, 1.0, 1e-9);
    CHECK(renormed.low <= renormed.value);
    CHECK(renormed.value <= renormed.high);
    CHECK(renormed.width() <= 2.1e-9);
    CHECK(direct.width() <= 2.1e-9);
    CHECK(std::abs(renormed.value - direct.value) < 5e-9);
}

TEST_CASE("radial integral sits inside a Riemann envelope") {
    const SelfSimilarSpace sp = ternary();
    const double t = 1.0 / 9;
    const auto [lo, hi] = radialEnvelope(sp, 0.0, t, 1.0, 4000);
    CHECK(hi - lo < 0.05);
    const double v = sp.radialIntegral(0.0, t, 1.0, 1e-9).value;
    CHECK(v >= lo - 1e-6);
    CHECK(v <= hi + 1e-6);

    // interior point with a different digit path
    const double x = 2.0 / 3 + 1.0 / 9;  // word 1,0,...
    const auto [lo2, hi2] = radialEnvelope(sp, x, t, 1.0, 4000);
    const double v2 = sp.radialIntegral(x, t, 1.0, 1e-9).value;
    CHECK(v2 >= lo2 - 1e-6);
    CHECK(v2 <= hi2 + 1e-6);
}

TEST_CASE("radial integral validates its window") {
    const SelfSimilarSpace sp = ternary();
    CHECK_THROWS_AS(sp.radialIntegral(0.0, 0.0, 1.0, 1e-9), DomainError);
    CHECK_THROWS_AS(sp.radialIntegral(0.0, -0.5, 1.0, 1e-9), DomainError);
    const IntegralResult empty = sp.radialIntegral(0.0, 0.5, 0.5, 1e-9);
    CHECK(empty.value == 0.0);
}

TEST_CASE("unequal-ratio radial integral also matches its envelope") {
    const SelfSimilarSpace sp = goldenTwoRatio();
    const double t = 0.01;
    for (double x : {0.0, 1.0, 0.375}) {
        const auto [lo, hi] = radialEnvelope(sp, x, t, 1.0, 4000);
        const double v = sp.radialIntegral(x, t, 1.0, 1e-9).value;
        CHECK(v >= lo - 1e-6);
        CHECK(v <= hi + 1e-6);
    }
}

TEST_CASE("unit circle closed forms") {
    const CircleSpace sp = unitCircle();
    CHECK(sp.regularityExponent() == doctest::Approx(1.0));
    CHECK(sp.totalMass() == doctest::Approx(1.0));
    for (double x : {0.0, 0.3, 0.77}) {
        CHECK(sp.ballMeasure(x, 0.2) == doctest::Approx(0.4).epsilon(1e-12));
        CHECK(sp.ballMeasure(x, 0.5) == doctest::Approx(1.0));
    }
    // integral of H(B(x,s)) s^{-2} over [0.01, 1] = 2 log 50 + 1
    const double expected = 2.0 * std::log(50.0) + 1.0;
    const double got = sp.radialIntegral(0.25, 0.01, 1.0).value;
    CHECK(got == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("two-block circle measures") {
    const CircleSpace sp = twoBlockCircle();
    CHECK(sp.totalMass() == doctest::Approx(1.0));
    CHECK(sp.minWeight() == doctest::Approx(0.6));
    CHECK(sp.weightAt(0.25) == doctest::Approx(0.6));
    CHECK(sp.weightAt(0.75) == doctest::Approx(1.4));
    CHECK(sp.ballMeasure(0.25, 0.1) == doctest::Approx(0.12).epsilon(1e-12));
    CHECK(sp.ballMeasure(0.0, 0.1) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(sp.ballMeasure(0.6, 0.05) == doctest::Approx(0.14).epsilon(1e-12));
    CHECK(sp.intervalMeasure(0.4, 0.6) ==
          doctest::Approx(0.1 * 0.6 + 0.1 * 1.4).epsilon(1e-12));
    CHECK(sp.intervalMeasure(-0.25, 0.25) ==
          doctest::Approx(0.25 * 1.4 + 0.25 * 0.6).epsilon(1e-12));
}

TEST_CASE("circle radial integral agrees with its envelope") {
    const CircleSpace sp = twoBlockCircle();
    for (double x : {0.1, 0.5, 0.93}) {
        const auto [lo, hi] = radialEnvelope(sp, x, 0.02, 1.0, 3000);
        const double v = sp.radialIntegral(x, 0.02, 1.0).value;
        CHECK(v >= lo - 1e-9);
        CHECK(v <= hi + 1e-9);
        CHECK(hi - lo < 0.02);
    }
}

TEST_CASE("circle construction validates the tiling") {
    CHECK_THROWS_AS(CircleSpace({}), InvalidSpaceError);
    CHECK_THROWS_AS(CircleSpace({{0.1, 1.0, 1.0}}), InvalidSpaceError);
    CHECK_THROWS_AS(CircleSpace({{0.0, 0.9, 1.0}}), InvalidSpaceError);
    CHECK_THROWS_AS(CircleSpace({{0.0, 0.4, 1.0}, {0.5, 1.0, 1.0}}),
                    InvalidSpaceError);
    CHECK_THROWS_AS(CircleSpace({{0.0, 0.5, -1.0}, {0.5, 1.0, 1.0}}),
                    InvalidSpaceError);
    CHECK_THROWS_AS(CircleSpace({{0.0, 0.5, 0.0}, {0.5, 1.0, 0.0}}),
                    InvalidSpaceError);
}

TEST_CASE("sampled cylinders follow the natural weights") {
    const SelfSimilarSpace sp = ternary();
    RngStream rng = RngStream::from(42, {7});
    // depth-3 cylinders all carry mass 1/8
    std::vector<int> counts(8, 0);
    const int trials = 100000;
    for (int i = 0; i < trials; ++i) {
        const Cylinder c = sp.sampleCylinder(rng, 1.1 / 27);
        REQUIRE(c.word.size() == 3);
        int idx = 0;
        for (auto d : c.word) idx = idx * 2 + d;
        ++counts[idx];
    }
    double chi2 = 0;
    const double expect = trials / 8.0;
    for (int c : counts) chi2 += (c - expect) * (c - expect) / expect;
    CHECK(chi2 < chiSquareCritical(7, 0.01));
}

TEST_CASE("unequal weights drive the sampler") {
    const SelfSimilarSpace sp = goldenTwoRatio();
    RngStream rng = RngStream::from(42, {8});
    const double x = 0.5 * (std::sqrt(5.0) - 1.0);
    int left = 0;
    const int trials = 100000;
    for (int i = 0; i < trials; ++i)
        if (sp.samplePoint(rng, 0.4) < 0.5) ++left;
    const Proportion p = wilsonInterval(left, trials);
    CHECK(p.wilsonLow < x);
    CHECK(p.wilsonHigh > x);
}

TEST_CASE("circle sampler matches arc masses") {
    const CircleSpace sp = twoBlockCircle();
    RngStream rng = RngStream::from(42, {9});
    int firstArc = 0;
    const int trials = 100000;
    for (int i = 0; i < trials; ++i)
        if (sp.samplePoint(rng, 1e-6) < 0.5) ++firstArc;
    const Proportion p = wilsonInterval(firstArc, trials);
    CHECK(p.wilsonLow < 0.3);
    CHECK(p.wilsonHigh > 0.3);
}

TEST_CASE("regularity constants stay in a sane band") {
    const SelfSimilarSpace sp = ternary();
    std::vector<std::pair<double, double>> grid;
    for (double x : {0.0, 1.0 / 9, 1.0 / 3, 2.0 / 3, 8.0 / 9, 1.0})
        for (int k = 1; k <= 8; ++k) grid.push_back({x, std::pow(3.0, -k)});
    const RegularityBounds b = verifyRegularity(sp, grid);
    CHECK(b.c0 > 0.2);
    CHECK(b.C0 < 5.0);
    CHECK(b.C0 / b.c0 < 25.0);
    CHECK_THROWS_AS(verifyRegularity(sp, {}), DomainError);
}

TEST_CASE("space JSON round trip") {
    const auto tern = loadSpace(R"({"kind":"ifs",
        "ratios":[0.3333333333333333, 0.3333333333333333],
        "offsets":[0.0, 0.6666666666666666]})");
    CHECK(tern->kindName() == "ifs");
    CHECK(tern->regularityExponent() ==
          doctest::Approx(std::log(2.0) / std::log(3.0)).epsilon(1e-9));

    const auto circ = loadSpace(R"({"kind":"circle","arcs":[
        {"from":0.0,"to":0.5,"weight":0.6},
        {"from":0.5,"to":1.0,"weight":1.4}]})");
    CHECK(circ->kindName() == "circle");
    CHECK(circ->isCircle());

    CHECK_THROWS_AS(loadSpace("not json"), InvalidSpaceError);
    CHECK_THROWS_AS(loadSpace(R"({"kind":"torus"})"), InvalidSpaceError);
    CHECK_THROWS_AS(loadSpace(R"({"kind":"ifs","ratios":[0.5,0.5]})"),
                    InvalidSpaceError);
    CHECK_THROWS_AS(loadSpaceFile("/nonexistent/path.json"), ResourceError);
}
