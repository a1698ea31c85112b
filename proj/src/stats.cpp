#include "cutout/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "cutout/errors.hpp"

namespace cutout {

RegressionFit fitLine(const std::vector<double>& x, const std::vector<double>& y,
                      const std::vector<double>& yVar) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n)
        throw DomainError("fitLine needs at least two matching points");
    double xm = 0, ym = 0;
    for (std::size_t i = 0; i < n; ++i) {
        xm += x[i];
        ym += y[i];
    }
    xm /= static_cast<double>(n);
    ym /= static_cast<double>(n);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - xm) * (x[i] - xm);
        sxy += (x[i] - xm) * (y[i] - ym);
    }
    if (sxx <= 0) throw DomainError("fitLine needs distinct x values");
    RegressionFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = ym - fit.slope * xm;
    if (!yVar.empty()) {
        double v = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = (x[i] - xm) / sxx;
            v += c * c * yVar[i];
        }
        fit.slopeSe = std::sqrt(v);
    } else {
        double rss = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - fit.intercept - fit.slope * x[i];
            rss += r * r;
        }
        if (n > 2) fit.slopeSe = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
    }
    return fit;
}

Proportion wilsonInterval(std::uint64_t successes, std::uint64_t trials) {
    if (trials == 0) throw DomainError("wilsonInterval needs at least one trial");
    const double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = (p + z2 / (2 * n)) / denom;
    const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
    Proportion out;
    out.pointEstimate = p;
    out.wilsonLow = std::max(0.0, centre - half);
    out.wilsonHigh = std::min(1.0, centre + half);
    out.wilsonHalfWidth = half;
    return out;
}

double chiSquareCritical(int degreesOfFreedom, double upperTail) {
    if (degreesOfFreedom < 1) throw DomainError("chiSquareCritical needs df >= 1");
    // Normal quantile via Acklam's rational approximation.
    const double p = 1.0 - upperTail;
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    double z;
    if (p < 0.02425) {
        const double q = std::sqrt(-2 * std::log(p));
        z = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    } else if (p <= 0.97575) {
        const double q = p - 0.5, r = q * q;
        z = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
    } else {
        const double q = std::sqrt(-2 * std::log(1 - p));
        z = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    // Wilson-Hilferty cube approximation.
    const double k = static_cast<double>(degreesOfFreedom);
    const double h = 2.0 / (9.0 * k);
    const double t = 1.0 - h + z * std::sqrt(h);
    return k * t * t * t;
}

double logSumExp(const std::vector<double>& values) {
    if (values.empty()) throw DomainError("logSumExp of empty set");
    double m = values[0];
    for (double v : values) m = std::max(m, v);
    double s = 0;
    for (double v : values) s += std::exp(v - m);
    return m + std::log(s);
}

double aitkenLimit(const std::vector<double>& seq) {
    if (seq.empty()) throw DomainError("aitkenLimit of empty sequence");
    if (seq.size() < 3) return seq.back();
    const double x0 = seq[seq.size() - 3];
    const double x1 = seq[seq.size() - 2];
    const double x2 = seq[seq.size() - 1];
    const double d1 = x1 - x0;
    const double d2 = x2 - x1;
    const double denom = d2 - d1;
    if (std::abs(denom) < 1e-14 * (std::abs(d1) + std::abs(d2)) || denom == 0.0)
        return x2;
    const double accel = x2 - d2 * d2 / denom;
    // Reject extrapolations that leave the bracket of the observed tail by a
    // wide margin; the raw tail is then the safer answer.
    if (std::abs(accel - x2) > 10 * std::abs(d2) + 1e-12) return x2;
    return accel;
}

double RunningStat::meanStdError() const {
    return n > 0 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
}

}  // namespace cutout
