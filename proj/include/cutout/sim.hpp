#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cutout/rng.hpp"
#include "cutout/space.hpp"
#include "cutout/stats.hpp"

namespace cutout {

// Poisson shell removal: events are open balls (center - radius,
// center + radius) with radii on [t, 1] drawn from the scale-invariant
// intensity, thinned so the survival probability of a point x at scale t is
// exp(-gamma * int_t^1 H(B(x,r)) r^{-Q-1} dr).

struct CutoutEvent {
    double center = 0;
    double radius = 0;
};

struct Realization {
    std::vector<CutoutEvent> events;
    // closed intervals of the hull missed by every event, sorted
    std::vector<std::pair<double, double>> surviving;
};

// Expected number of events: gamma * mass * (t^-Q - 1) / Q.
double poissonEventRate(const SpaceModel& space, double gamma, double t);

// Inverse CDF of the radius law on [t, 1]; u = 0 maps to t, u -> 1 maps to 1.
double cutoutRadius(double t, double q, double u);

std::vector<CutoutEvent> sampleEvents(const SpaceModel& space, double gamma,
                                      double t, RngStream& rng);

// Complement of the union of events within the hull (circle events wrap).
Realization buildCutout(const SpaceModel& space,
                        std::vector<CutoutEvent> events);

bool pointSurvives(const Realization& real, double x);
// outer rule: does [lo, hi] meet the surviving set at all?
bool intervalSurvives(const Realization& real, double lo, double hi);

// Covering cells at scale t: the cut set for self-similar spaces, uniform
// arcs for circles.
struct SimCell {
    double rep = 0;  // representative point (cell midpoint)
    double mass = 0;
    double left = 0;
    double right = 0;
};
std::vector<SimCell> cellsAtScale(const SpaceModel& space, double t);

struct SurvivalEstimate {
    Proportion observed;
    double theory = 0;  // t^(gamma * A(x,t))
    std::uint64_t trials = 0;
};
SurvivalEstimate survivalEstimate(const SpaceModel& space, double x,
                                  double gamma, double t, std::uint64_t trials,
                                  std::uint64_t seed, int threads = 1);

// Surviving-cell counts per scale, Monte Carlo vs the quadrature expectation.
struct CoveringRow {
    double t = 0;
    double detExpected = 0;  // sum over cells of survival probability
    double stochMean = 0;    // mean observed surviving-cell count
    double stochVar = 0;     // sample variance of the count
    std::uint64_t trials = 0;
};
struct CoveringExponent {
    std::vector<CoveringRow> rows;
    double detSlope = 0;
    double stochSlope = 0;
    double stochSlopeSe = 0;
    double r2 = 0;  // fit quality of the stochastic regression
};
CoveringExponent estimateCoveringExponent(const SpaceModel& space,
                                          double gamma,
                                          const std::vector<double>& scales,
                                          std::uint64_t trialsPerScale,
                                          std::uint64_t seed, int threads = 1);

struct TrialStats {
    double mean = 0;
    double se = 0;
    std::uint64_t trials = 0;
};

// Normalized surviving mass with inverse-probability weights; expectation is
// the full mass (resp. the mass of the first branch cell when restricted).
struct MartingaleResult {
    TrialStats whole;
    TrialStats restricted;
    double restrictedTheory = 0;
};
MartingaleResult martingaleCheck(const SpaceModel& space, double gamma,
                                 double t, std::uint64_t trials,
                                 std::uint64_t seed, int threads = 1);

// Monte Carlo surviving mass against the per-cell quadrature expectation.
struct MassCheck {
    double mcMean = 0;
    double mcSe = 0;
    double quadrature = 0;
    std::uint64_t trials = 0;
};
MassCheck expectedMassCheck(const SpaceModel& space, double gamma, double t,
                            std::uint64_t trials, std::uint64_t seed,
                            int threads = 1);

// Hierarchical estimate of the s-energy int int d(x,y)^-s dH dH, refined
// level by level; flagged divergent when the last refinement still moves the
// value by more than 10%.
struct EnergyResult {
    double value = 0;
    int levels = 0;
    double lastRelChange = 0;
    bool divergent = false;
};
EnergyResult energyIntegral(const SpaceModel& space, double s,
                            int maxLevel = 7);

struct ExtinctionResult {
    Proportion extinct;  // fraction of trials with nothing surviving
    std::uint64_t trials = 0;
};
ExtinctionResult extinctionProbe(const SpaceModel& space, double gamma,
                                 double t, std::uint64_t trials,
                                 std::uint64_t seed, int threads = 1);

// Coupled sweep over increasing gamma: each trial superposes extra events on
// top of the previous level, so surviving sets are provably nested per seed.
struct SweepRow {
    double gamma = 0;
    double cellSurvivalMean = 0;  // mean fraction of cells surviving (rep rule)
    double extinctFraction = 0;
    bool nested = true;  // surviving set contained in the previous level's
};
std::vector<SweepRow> gammaSweep(const SpaceModel& space,
                                 const std::vector<double>& gammas, double t,
                                 std::uint64_t trials, std::uint64_t seed,
                                 int threads = 1);

// One row of the estimator summary table (the CSV contract of the CLI).
struct EstimateRecord {
    std::string name;
    double estimate = 0;
    double ci95 = 0;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    double theory = 0;
    bool pass = false;
};

}  // namespace cutout
