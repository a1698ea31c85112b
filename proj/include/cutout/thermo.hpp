#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "cutout/space.hpp"

namespace cutout {

// Bracketed pressure evaluation. `value` is the best point estimate; the
// [low, high] interval combines within-cylinder variation bounds with a
// convergence allowance across refinement depths.
struct PressureValue {
    double value = 0;
    double low = 0;
    double high = 0;
};

struct SpectrumPoint {
    double alpha = 0;
    double f = 0;
};

struct SpectrumTable {
    double alphaMin = 0;   // slope proxy at the negative end of the q range
    double alphaMax = 0;   // slope proxy at the positive end
    double alphaZero = 0;  // slope at q = 0 (the typical local exponent)
    double fAtAlphaZero = 0;
    std::vector<SpectrumPoint> points;
};

struct MCurvePoint {
    double gamma = 0;
    double m = 0;         // normalized pressure at q = -gamma
    double crossGap = 0;  // |m - sup over the spectrum grid| diagnostic
};

// Precomputes per-cylinder Birkhoff tables for the shell potential so that
// pressure values at many q come cheap. Supports equal-ratio self-similar
// spaces and constant-weight circles; anything else throws
// UnsupportedSpaceError.
class PressureAnalyzer {
  public:
    PressureAnalyzer(const SpaceModel& space, int depth);

    const SpaceModel& space() const { return space_; }
    int depth() const { return depth_; }
    double regularityExponent() const { return q_; }
    double shiftRatio() const { return ratio_; }

    // P_d(q) = (1/d) log sum over depth-d cylinders of exp(q * S_d).
    // depth must be one of {depth-2, depth-1, depth} (any value on circles).
    PressureValue rawPressure(double q, int depth) const;

    // Normalized pressure P_d(q)/(-log ratio), extrapolated across the three
    // stored depths and with the bracket widened by the last increment.
    PressureValue tilde(double q) const;

  private:
    struct DepthTable {
        int depth = 0;
        std::vector<double> mid, low, high;  // per-cylinder Birkhoff values
    };

    PressureValue rawFromTable(double q, const DepthTable& t) const;

    const SpaceModel& space_;
    int depth_;
    double q_;
    double ratio_;
    bool circle_ = false;
    double circleAlpha_ = 0;  // 2 * weight on constant circles
    std::vector<DepthTable> tables_;  // depths {n-2, n-1, n} for IFS spaces
};

inline constexpr double kDefaultQMax = 30.0;

// inf over q in [-qMax, qMax] of tilde(q) - alpha*q via golden section;
// nullopt when the infimum is attained at the boundary (spectrum value not
// defined at this alpha).
std::optional<double> spectrumValue(const PressureAnalyzer& pa, double alpha,
                                    double qMax = kDefaultQMax);

// Secant slope proxies for the attainable exponent range.
std::pair<double, double> spectrumSlopes(const PressureAnalyzer& pa,
                                         double qMax = kDefaultQMax);

// Derivative of the normalized pressure at q = 0 (central difference).
double alphaZeroEstimate(const PressureAnalyzer& pa);

// Monte Carlo mean of the average density at scale ratio^20 over points
// sampled from the natural measure.
double alphaZeroMonteCarlo(const SpaceModel& space, std::uint64_t seed,
                           int samples = 200);

// alphaZeroEstimate cross-checked against the Monte Carlo mean; throws
// ConsistencyError if they disagree by more than 0.05.
double alphaZeroChecked(const PressureAnalyzer& pa, std::uint64_t seed);

// Spectrum sampled on an alpha grid padded 5% inside the attainable range.
SpectrumTable spectrumTable(const PressureAnalyzer& pa, int gridSize = 200);

// m(gamma) = tilde(-gamma), cross-checked against sup_alpha (f - gamma*alpha)
// on the spectrum grid; crossGap beyond 5e-3 throws ConsistencyError.
MCurvePoint mOfGamma(const PressureAnalyzer& pa, double gamma);
std::vector<MCurvePoint> mCurve(const PressureAnalyzer& pa,
                                const std::vector<double>& gammas);

// Root of m(gamma) by bisection; residual below 1e-6 or ConsistencyError.
double gammaZero(const PressureAnalyzer& pa);

}  // namespace cutout
