#pragma once
#include <cstddef>
#include <vector>

#include "cutout/space.hpp"

namespace cutout {

// Normalized radial averages A(x,t) = (int_t^1 H(B(x,r)) r^{-Q-1} dr) / log(1/t)
// of the ball-measure profile, their shell decomposition f_k, and the derived
// survival weights and coarse level-set summaries.

struct DensityProfile {
    double x = 0;
    std::vector<double> tGrid;   // decreasing scales
    std::vector<double> values;  // A(x, t) per scale
};

double averageDensity(const SpaceModel& space, double x, double t,
                      double relTol = 1e-8);

DensityProfile densityProfile(const SpaceModel& space, double x,
                              const std::vector<double>& tGrid,
                              double relTol = 1e-8);

// exp(-gamma * int_t^1 H(B(x,r)) r^{-Q-1} dr) = t^{gamma A(x,t)}.
double survivalProbability(const SpaceModel& space, double x, double t,
                           double gamma, double relTol = 1e-8);

// Expanding shift: one symbolic level down for self-similar spaces, the
// doubling map for circles.  Throws DomainError on uncoded (gap) points.
double applyShift(const SpaceModel& space, double x);

// Contraction scale of the shift: common ratio for self-similar spaces, 1/2
// for circles.  Unequal ratios are unsupported here.
double shiftScale(const SpaceModel& space);

// f_k(x): the radial integral over one shell [a^{k+1}, a^k].
double cocycleTerm(const SpaceModel& space, double x, int k,
                   double tol = 1e-10);

struct AdditivityTable {
    int kMax = 0;
    std::vector<double> epsilon;  // epsilon[n-1] = max |f_n(S^k x) - f_{n+k}(x)|
};

AdditivityTable checkAsymptoticAdditivity(const SpaceModel& space, int nMax,
                                          int kMax,
                                          const std::vector<double>& points,
                                          double tol = 1e-10);

struct SublevelMass {
    double estimate = 0;  // mass of cells whose representative has A < beta
    double low = 0;       // cells certainly below beta (variation-padded)
    double high = 0;      // cells possibly below beta
    std::size_t cellCount = 0;
};

// Mass of {x : A(x, r) < beta} approximated on the scale-r cut set.
SublevelMass sublevelMeasure(const SpaceModel& space, double beta, double r,
                             bool withBrackets = true);

struct CoarseBounds {
    double d0 = 0;          // min of A over cells at the terminal scale
    double D0 = 0;          // mass-weighted 99.9% quantile of A
    double gamma0Low = 0;   // Q / D0
    double gamma0High = 0;  // Q / d0
    double dimLow = 0;      // Q - gamma * D0
    double dimHigh = 0;     // Q - gamma * d0
};

CoarseBounds coarseBounds(const SpaceModel& space, double tStar, double gamma);

}  // namespace cutout
