#pragma once
#include <cstddef>
#include <cstdint>
#include <vector>

namespace cutout {

struct RegressionFit {
    double slope = 0;
    double intercept = 0;
    double slopeSe = 0;  // from per-point variances when given, else residuals
};

// Ordinary least squares y ~ intercept + slope * x.  When yVar is nonempty it
// must match x in length and the slope standard error is propagated from it.
RegressionFit fitLine(const std::vector<double>& x, const std::vector<double>& y,
                      const std::vector<double>& yVar = {});

struct Proportion {
    double pointEstimate = 0;
    double wilsonLow = 0;
    double wilsonHigh = 0;
    double wilsonHalfWidth = 0;  // half-width of the 95% Wilson interval
};

Proportion wilsonInterval(std::uint64_t successes, std::uint64_t trials);

// Upper critical value of the chi-square distribution (Wilson-Hilferty
// approximation; adequate for goodness-of-fit gates at the 99% level).
double chiSquareCritical(int degreesOfFreedom, double upperTail);

// log(sum(exp(v))) evaluated stably; blocks are reduced in index order so the
// result does not depend on thread count.
double logSumExp(const std::vector<double>& values);

// Aitken delta-squared acceleration of the tail of a convergent sequence;
// falls back to the last element when the denominator degenerates.
double aitkenLimit(const std::vector<double>& sequence);

struct RunningStat {
    std::size_t n = 0;
    double mean = 0;
    double m2 = 0;
    void add(double v) {
        ++n;
        const double d = v - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (v - mean);
    }
    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double meanStdError() const;
};

}  // namespace cutout
