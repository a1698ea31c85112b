#include "cutout/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "cutout/density.hpp"
#include "cutout/errors.hpp"
#include "cutout/rng.hpp"
#include "cutout/stats.hpp"

namespace cutout {
namespace {

constexpr double kProbes[3] = {0.12, 0.5, 0.88};  // relative cylinder offsets
constexpr double kTableTol = 1e-7;
constexpr std::size_t kCellBudget = 1u << 22;

}  // namespace

PressureAnalyzer::PressureAnalyzer(const SpaceModel& space, int depth)
    : space_(space), depth_(depth), q_(space.regularityExponent()) {
    if (space.isCircle()) {
        const auto& circ = dynamic_cast<const CircleSpace&>(space);
        double wLo = 1e300, wHi = -1e300;
        for (const auto& arc : circ.arcs()) {
            wLo = std::min(wLo, arc.weight);
            wHi = std::max(wHi, arc.weight);
        }
        if (wHi - wLo > 1e-12 * wHi)
            throw UnsupportedSpaceError(
                "circle pressure needs a constant weight density");
        if (depth_ < 1) throw DomainError("depth must be positive");
        circle_ = true;
        circleAlpha_ = 2.0 * wHi;
        ratio_ = 0.5;
        return;
    }

    const auto& sp = dynamic_cast<const SelfSimilarSpace&>(space);
    ratio_ = sp.commonRatio();  // rejects unequal contraction ratios
    const int k0 = sp.renormAnchorDepth();
    if (depth_ < k0 + 3)
        throw DomainError("depth too shallow for the renormalization anchor");
    const std::size_t ell = sp.branchCount();
    std::size_t leafCount = 1;
    for (int i = 0; i < depth_; ++i) {
        if (leafCount > kCellBudget / ell)
            throw ResourceError("cylinder table would exceed the cell budget");
        leafCount *= ell;
    }

    const int n = depth_;
    const double hullL = sp.hullLeft();
    const double diam = sp.diameter();
    const std::vector<double>& offs = sp.offsets();
    std::vector<double> powA(static_cast<std::size_t>(n) + 1, 1.0);
    for (int m = 1; m <= n; ++m) powA[m] = powA[m - 1] * ratio_;

    // Per-level moduli of variation for the shell potential, sampled at three
    // spread-out base points and doubled as a safety margin.  These pad the
    // per-cylinder probe extrema into [low, high] envelopes; they are sampled
    // bounds, not certified ones.
    auto sampledVariation = [&](double delta, double rlo, double rhi) {
        double v = 0;
        for (double rho : {0.08, 0.5, 0.92}) {
            const double rep = hullL + rho * diam;
            v = std::max(
                v, sp.neighborhoodVariation(rep, delta, rlo, rhi, 1e-3).high);
        }
        return 2.0 * v;
    };
    std::vector<double> varPhi(static_cast<std::size_t>(n), 0.0);
    for (int m = k0; m < n; ++m)
        varPhi[m] = sampledVariation(powA[m] * diam, powA[k0], powA[k0 - 1]);
    auto padFor = [&](int d) {
        double pad = sampledVariation(powA[d] * diam, powA[k0], 1.0);
        for (int m = k0; m < d; ++m) pad += varPhi[m];
        pad += (d - k0 + 1) * kTableTol;
        return pad;
    };

    tables_.resize(3);
    for (int i = 0; i < 3; ++i) {
        const int d = n - 2 + i;
        std::size_t count = 1;
        for (int j = 0; j < d; ++j) count *= ell;
        tables_[i].depth = d;
        tables_[i].mid.assign(count, 0.0);
        tables_[i].low.assign(count, 0.0);
        tables_[i].high.assign(count, 0.0);
    }
    const double pads[3] = {padFor(n - 2), padFor(n - 1), padFor(n)};

    // Suffix recursion over cylinder words: the Birkhoff value of a depth-d
    // cylinder splits into a head window plus shell terms of its suffixes,
    // and equal ratios keep the relative probe position exact under shifts.
    for (int pi = 0; pi < 3; ++pi) {
        const double rho = kProbes[pi];
        std::vector<double> x{hullL + rho * diam};
        std::vector<double> psi{0.0};
        for (int m = 1; m <= n; ++m) {
            const std::size_t prevCount = x.size();
            const std::size_t count = prevCount * ell;
            std::vector<double> xm(count), psim(count);
            for (std::size_t w = 0; w < count; ++w) {
                const std::size_t tail = w % prevCount;
                xm[w] = offs[w / prevCount] + ratio_ * x[tail];
                double phi = 0;
                if (m >= k0 && m < n)
                    phi = sp.radialIntegral(xm[w], powA[k0], powA[k0 - 1],
                                            kTableTol)
                              .value;
                psim[w] = phi + psi[tail];
            }
            if (m >= n - 2) {
                DepthTable& t = tables_[m - (n - 2)];
                for (std::size_t w = 0; w < count; ++w) {
                    const double head =
                        sp.radialIntegral(xm[w], powA[k0], 1.0, kTableTol)
                            .value;
                    const double s = head + psi[w % prevCount];
                    if (pi == 0) {
                        t.low[w] = s;
                        t.high[w] = s;
                    } else {
                        t.low[w] = std::min(t.low[w], s);
                        t.high[w] = std::max(t.high[w], s);
                    }
                    if (pi == 1) t.mid[w] = s;
                }
            }
            x.swap(xm);
            psi.swap(psim);
        }
    }
    for (int i = 0; i < 3; ++i) {
        for (double& v : tables_[i].low) v -= pads[i];
        for (double& v : tables_[i].high) v += pads[i];
    }
}

PressureValue PressureAnalyzer::rawFromTable(double q,
                                             const DepthTable& t) const {
    const double inv = 1.0 / t.depth;
    std::vector<double> buf(t.mid.size());
    auto lse = [&](const std::vector<double>& src) {
        for (std::size_t i = 0; i < src.size(); ++i) buf[i] = q * src[i];
        return inv * logSumExp(buf);
    };
    PressureValue out;
    out.value = lse(t.mid);
    out.low = lse(q >= 0 ? t.low : t.high);
    out.high = lse(q >= 0 ? t.high : t.low);
    return out;
}

PressureValue PressureAnalyzer::rawPressure(double q, int depth) const {
    const double logScale = -std::log(ratio_);
    if (circle_) {
        const double v = (q_ + circleAlpha_ * q) * logScale;
        return {v, v, v};
    }
    for (const DepthTable& t : tables_)
        if (t.depth == depth) return rawFromTable(q, t);
    throw DomainError("pressure depth outside the stored refinement window");
}

PressureValue PressureAnalyzer::tilde(double q) const {
    if (circle_) {
        const double v = q_ + circleAlpha_ * q;
        return {v, v, v};
    }
    const double logScale = -std::log(ratio_);
    const PressureValue p0 = rawFromTable(q, tables_[0]);
    const PressureValue p1 = rawFromTable(q, tables_[1]);
    const PressureValue p2 = rawFromTable(q, tables_[2]);
    const double extrap = aitkenLimit({p0.value, p1.value, p2.value});
    const double widen = std::abs(p2.value - p1.value);
    PressureValue out;
    out.low = (p2.low - widen) / logScale;
    out.high = (p2.high + widen) / logScale;
    out.value = std::clamp(extrap / logScale, out.low, out.high);
    return out;
}

std::optional<double> spectrumValue(const PressureAnalyzer& pa, double alpha,
                                    double qMax) {
    auto g = [&](double q) { return pa.tilde(q).value - alpha * q; };
    // flat objective (linear pressure at the matching slope): value is g
    {
        double lo = 1e300, hi = -1e300;
        for (double q : {-qMax, -0.5 * qMax, 0.0, 0.5 * qMax, qMax}) {
            const double v = g(q);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi - lo < 1e-10 * (1.0 + std::abs(lo))) return g(0.0);
    }
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = -qMax, b = qMax;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double gc = g(c), gd = g(d);
    while (b - a > 1e-6) {
        if (gc < gd) {
            b = d;
            d = c;
            gd = gc;
            c = b - gr * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + gr * (b - a);
            gd = g(d);
        }
    }
    const double qStar = 0.5 * (a + b);
    if (qStar < -qMax + 1e-3 || qStar > qMax - 1e-3) return std::nullopt;
    return g(qStar);
}

std::pair<double, double> spectrumSlopes(const PressureAnalyzer& pa,
                                         double qMax) {
    const double step = 0.5;
    const double lo =
        (pa.tilde(-qMax + step).value - pa.tilde(-qMax).value) / step;
    const double hi =
        (pa.tilde(qMax).value - pa.tilde(qMax - step).value) / step;
    return {lo, hi};
}

double alphaZeroEstimate(const PressureAnalyzer& pa) {
    const double h = 1e-3;
    return (pa.tilde(h).value - pa.tilde(-h).value) / (2.0 * h);
}

double alphaZeroMonteCarlo(const SpaceModel& space, std::uint64_t seed,
                           int samples) {
    const double t = std::pow(shiftScale(space), 20);
    RngStream rng = RngStream::from(seed, {101});
    double sum = 0;
    for (int i = 0; i < samples; ++i) {
        const double x = space.samplePoint(rng, t);
        sum += averageDensity(space, x, t, 1e-6);
    }
    return sum / samples;
}

double alphaZeroChecked(const PressureAnalyzer& pa, std::uint64_t seed) {
    const double est = alphaZeroEstimate(pa);
    const double mc = alphaZeroMonteCarlo(pa.space(), seed);
    if (std::abs(est - mc) > 0.05)
        throw ConsistencyError(
            "pressure slope at zero disagrees with the sampled density mean (" +
            std::to_string(est) + " vs " + std::to_string(mc) + ")");
    return est;
}

SpectrumTable spectrumTable(const PressureAnalyzer& pa, int gridSize) {
    if (gridSize < 2) throw DomainError("spectrum grid needs >= 2 points");
    SpectrumTable out;
    const auto [aMin, aMax] = spectrumSlopes(pa);
    out.alphaMin = aMin;
    out.alphaMax = aMax;
    out.alphaZero = alphaZeroEstimate(pa);
    out.fAtAlphaZero = spectrumValue(pa, out.alphaZero)
                           .value_or(pa.regularityExponent());
    if (aMax - aMin < 1e-9) {  // degenerate: single-exponent spectrum
        out.points = {{out.alphaZero, pa.regularityExponent()}};
        return out;
    }
    const double pad = 0.05 * (aMax - aMin);
    const double lo = aMin + pad, hi = aMax - pad;
    for (int i = 0; i < gridSize; ++i) {
        const double alpha = lo + (hi - lo) * i / (gridSize - 1);
        if (const auto f = spectrumValue(pa, alpha))
            out.points.push_back({alpha, *f});
    }
    return out;
}

namespace {

MCurvePoint mPointFromTable(const PressureAnalyzer& pa, double gamma,
                            const SpectrumTable& table) {
    MCurvePoint out;
    out.gamma = gamma;
    out.m = pa.tilde(-gamma).value;
    double sup = -1e300;
    for (const auto& p : table.points)
        sup = std::max(sup, p.f - gamma * p.alpha);
    out.crossGap = std::abs(out.m - sup);
    if (out.crossGap > 5e-3)
        throw ConsistencyError(
            "dual pressure and spectrum envelope disagree at gamma=" +
            std::to_string(gamma));
    return out;
}

}  // namespace

MCurvePoint mOfGamma(const PressureAnalyzer& pa, double gamma) {
    return mPointFromTable(pa, gamma, spectrumTable(pa, 200));
}

std::vector<MCurvePoint> mCurve(const PressureAnalyzer& pa,
                                const std::vector<double>& gammas) {
    const SpectrumTable table = spectrumTable(pa, 200);
    std::vector<MCurvePoint> out;
    out.reserve(gammas.size());
    for (double g : gammas) out.push_back(mPointFromTable(pa, g, table));
    return out;
}

double gammaZero(const PressureAnalyzer& pa) {
    auto m = [&](double g) { return pa.tilde(-g).value; };
    if (!(m(0.0) > 0))
        throw ConsistencyError("pressure at gamma=0 is not positive");
    const double tStar =
        pa.space().isCircle() ? 1e-4 : std::pow(pa.shiftRatio(), 6);
    const CoarseBounds cb = coarseBounds(pa.space(), tStar, 0.0);
    double lo = 0.0, hi = pa.regularityExponent() / cb.d0 + 1.0;
    if (!(m(hi) < 0))
        throw ConsistencyError("dual pressure has no root in the bracket");
    for (int i = 0; i < 80 && hi - lo > 1e-12; ++i) {
        const double mid = 0.5 * (lo + hi);
        (m(mid) > 0 ? lo : hi) = mid;
    }
    const double root = 0.5 * (lo + hi);
    if (std::abs(m(root)) > 1e-6)
        throw ConsistencyError("dual pressure root residual exceeds 1e-6");
    return root;
}

}  // namespace cutout
