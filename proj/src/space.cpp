#include "cutout/space.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "cutout/errors.hpp"

namespace cutout {

namespace {

constexpr int kMaxDepth = 64;  // cylinder width underflows double well before this

struct Kahan {
    double sum = 0, carry = 0;
    void add(double v) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

// One cylinder cell in the refinement queue.
struct Cell {
    double left = 0, width = 0, mass = 0;
    int depth = 0;
    std::uint64_t seq = 0;  // creation index; ties in priority resolve on it
    detail::CellScore sc;
};

double cellPriority(const Cell& c) { return c.mass * c.sc.error; }

bool heapLess(const Cell& a, const Cell& b) {
    const double pa = cellPriority(a), pb = cellPriority(b);
    if (pa != pb) return pa < pb;
    return a.seq > b.seq;
}

// Measure of an open interval: rigorous 0/1 bounds per cell, refined only
// where the cell straddles an endpoint.
class IndicatorKernel final : public detail::PositionKernel {
public:
    IndicatorKernel(double lo, double hi) : lo_(lo), hi_(hi) {}
    detail::CellScore score(double ylo, double yhi, double) const override {
        if (ylo > lo_ && yhi < hi_) return {1, 1, 1, 0};
        if (yhi <= lo_ || ylo >= hi_) return {0, 0, 0, 0};
        return {0, 1, 0.5, 0.5};
    }

private:
    double lo_, hi_;
};

// Radial-shell weight as a function of position: integrating
// psi(|y - x|) dH(y) with psi(d) = (max(d, rlo)^-Q - rhi^-Q) / Q for d < rhi
// reproduces the integral of H(B(x,s)) s^{-Q-1} ds over [rlo, rhi].
class RadialShellKernel final : public detail::PositionKernel {
public:
    RadialShellKernel(double x, double rlo, double rhi, double q)
        : x_(x), rlo_(rlo), rhi_(rhi), q_(q) {
        flatTop_ = (std::pow(rlo_, -q_) - std::pow(rhi_, -q_)) / q_;
    }

    double psi(double d) const {
        if (d >= rhi_) return 0;
        if (d <= rlo_) return flatTop_;
        return (std::pow(d, -q_) - std::pow(rhi_, -q_)) / q_;
    }

    detail::CellScore score(double ylo, double yhi, double bary) const override {
        double dlo, dhi;
        const bool inside = (x_ >= ylo && x_ <= yhi);
        if (inside) {
            dlo = 0;
            dhi = std::max(x_ - ylo, yhi - x_);
        } else {
            dlo = std::max(ylo - x_, x_ - yhi);
            dhi = dlo + (yhi - ylo);
        }
        if (dlo >= rhi_) return {0, 0, 0, 0};
        if (dhi <= rlo_) return {flatTop_, flatTop_, flatTop_, 0};

        detail::CellScore s;
        s.low = psi(dhi);
        s.high = psi(dlo);
        s.estimate = psi(std::abs(bary - x_));
        const double spread = s.high - s.low;
        // Smooth stretch: curvature bound tightens the refinement signal.
        if (!inside && dlo >= rlo_ && dhi <= rhi_) {
            const double w = yhi - ylo;
            const double curv = (q_ + 1) * std::pow(dlo, -q_ - 2);
            s.error = std::min(spread, 0.5 * w * w * curv);
        } else {
            s.error = spread;  // cell crosses a kink of psi (or contains x)
        }
        return s;
    }

private:
    double x_, rlo_, rhi_, q_, flatTop_;
};

// Band kernel psi(max(d-delta,0)) - psi(d+delta): the worst-case change of
// the shell weight under a position perturbation of size delta.  Both halves
// are decreasing in d, which yields rigorous (first-order) cell bounds.
class ShellBandKernel final : public detail::PositionKernel {
public:
    ShellBandKernel(double x, double delta, double rlo, double rhi, double q)
        : shell_(x, rlo, rhi, q), x_(x), delta_(delta) {}

    detail::CellScore score(double ylo, double yhi, double bary) const override {
        double dlo, dhi;
        if (x_ >= ylo && x_ <= yhi) {
            dlo = 0;
            dhi = std::max(x_ - ylo, yhi - x_);
        } else {
            dlo = std::max(ylo - x_, x_ - yhi);
            dhi = dlo + (yhi - ylo);
        }
        auto band = [&](double d) {
            return shell_.psi(std::max(d - delta_, 0.0)) -
                   shell_.psi(d + delta_);
        };
        detail::CellScore s;
        // bounds from the monotone halves of the difference
        const double upLow = shell_.psi(std::max(dhi - delta_, 0.0));
        const double upHigh = shell_.psi(std::max(dlo - delta_, 0.0));
        const double dnLow = shell_.psi(dhi + delta_);
        const double dnHigh = shell_.psi(dlo + delta_);
        s.low = std::max(0.0, upLow - dnHigh);
        s.high = std::max(0.0, upHigh - dnLow);
        s.estimate = std::clamp(band(std::abs(bary - x_)), s.low, s.high);
        s.error = s.high - s.low;
        return s;
    }

private:
    RadialShellKernel shell_;
    double x_, delta_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Moran exponent

double solveMoranExponent(const std::vector<double>& ratios, double* residual) {
    if (ratios.size() < 2)
        throw InvalidSpaceError("need at least two contraction ratios");
    for (double a : ratios)
        if (!(a > 0) || !(a < 1) || !std::isfinite(a))
            throw InvalidSpaceError("contraction ratios must lie in (0, 1)");

    auto f = [&](double q) {
        double s = 0;
        for (double a : ratios) s += std::exp(q * std::log(a));
        return s - 1.0;
    };

    double lo = 0, hi = 1;
    while (f(hi) > 0) {
        lo = hi;
        hi *= 2;
        if (hi > 4096) throw ConsistencyError("Moran exponent bracket failed");
    }
    for (int i = 0; i < 200 && hi - lo > 1e-16 * std::max(1.0, hi); ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0 ? lo : hi) = mid;
    }
    const double q = 0.5 * (lo + hi);
    if (residual) *residual = f(q);
    return q;
}

// ---------------------------------------------------------------------------
// SelfSimilarSpace

SelfSimilarSpace::SelfSimilarSpace(std::vector<double> ratios,
                                   std::vector<double> offsets)
    : ratios_(std::move(ratios)), offsets_(std::move(offsets)) {
    if (ratios_.size() != offsets_.size())
        throw InvalidSpaceError("ratio and offset lists differ in length");
    if (ratios_.size() < 2)
        throw InvalidSpaceError("need at least two maps");
    for (double c : offsets_)
        if (!std::isfinite(c)) throw InvalidSpaceError("offsets must be finite");

    q_ = solveMoranExponent(ratios_, &moranResidual_);

    double L = std::numeric_limits<double>::infinity(), R = -L;
    for (std::size_t i = 0; i < ratios_.size(); ++i) {
        const double fix = offsets_[i] / (1.0 - ratios_[i]);
        L = std::min(L, fix);
        R = std::max(R, fix);
    }
    if (!(R - L > 0))
        throw InvalidSpaceError("attractor degenerates to a point");
    hullLeft_ = L;
    hullRight_ = R;

    const std::size_t n = ratios_.size();
    childLeft_.resize(n);
    childRight_.resize(n);
    childRelLeft_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        childLeft_[i] = ratios_[i] * L + offsets_[i];
        childRight_[i] = ratios_[i] * R + offsets_[i];
        childRelLeft_[i] = (childLeft_[i] - L) / (R - L);
    }
    minGap_ = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double gap = childLeft_[i + 1] - childRight_[i];
        if (gap <= 1e-12 * (R - L))
            throw InvalidSpaceError(
                "maps must be ordered with pairwise-separated images");
        minGap_ = std::min(minGap_, gap);
    }

    probs_.resize(n);
    double psum = 0;
    for (std::size_t i = 0; i < n; ++i) {
        probs_[i] = std::exp(q_ * std::log(ratios_[i]));
        psum += probs_[i];
    }
    cumProbs_.resize(n);
    double acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
        probs_[i] /= psum;  // kill the last-bit Moran residual
        acc += probs_[i];
        cumProbs_[i] = acc;
    }
    cumProbs_.back() = 1.0;

    double pc = 0, pa = 0;
    for (std::size_t i = 0; i < n; ++i) {
        pc += probs_[i] * offsets_[i];
        pa += probs_[i] * ratios_[i];
    }
    relBary_ = (pc / (1.0 - pa) - L) / (R - L);

    double amin = ratios_[0], amax = ratios_[0];
    for (double a : ratios_) {
        amin = std::min(amin, a);
        amax = std::max(amax, a);
    }
    equalRatios_ = (amax - amin) <= 1e-12;

    const double relGap = minGap_ / (R - L);
    renormAnchorDepth_ = 1;
    double prod = amax;
    while (prod > relGap * (1 + 1e-9) && renormAnchorDepth_ < kMaxDepth) {
        prod *= amax;
        ++renormAnchorDepth_;
    }

    totalMass_ = 1.0;
}

double SelfSimilarSpace::commonRatio() const {
    if (!equalRatios_)
        throw UnsupportedSpaceError(
            "operation requires equal contraction ratios");
    return ratios_[0];
}

Cylinder SelfSimilarSpace::rootCylinder() const {
    Cylinder c;
    c.left = hullLeft_;
    c.diam = diameter();
    c.mass = totalMass_;
    return c;
}

Cylinder SelfSimilarSpace::cylinder(const Word& word) const {
    Cylinder c = rootCylinder();
    for (std::uint8_t d : word) {
        if (d >= ratios_.size())
            throw DomainError("cylinder word contains an out-of-range digit");
        c.left += childRelLeft_[d] * c.diam;
        c.diam *= ratios_[d];
        c.mass *= probs_[d];
    }
    c.word = word;
    return c;
}

std::vector<Cylinder> SelfSimilarSpace::cutSet(double tau) const {
    if (!(tau > 0) || !std::isfinite(tau))
        throw DomainError("cut-set scale must be positive");
    std::vector<Cylinder> out;
    std::vector<Cylinder> stack{rootCylinder()};
    while (!stack.empty()) {
        Cylinder c = std::move(stack.back());
        stack.pop_back();
        if (c.diam <= tau) {
            out.push_back(std::move(c));
            continue;
        }
        if (out.size() + stack.size() > (1u << 22))
            throw ResourceError("cut set too large at this scale");
        for (std::size_t i = ratios_.size(); i-- > 0;) {
            Cylinder ch;
            ch.word = c.word;
            ch.word.push_back(static_cast<std::uint8_t>(i));
            ch.left = c.left + childRelLeft_[i] * c.diam;
            ch.diam = c.diam * ratios_[i];
            ch.mass = c.mass * probs_[i];
            stack.push_back(std::move(ch));
        }
    }
    return out;
}

std::optional<std::size_t> SelfSimilarSpace::firstDigit(double x) const {
    const double tol = 1e-12 * diameter();
    for (std::size_t i = 0; i < childLeft_.size(); ++i)
        if (x >= childLeft_[i] - tol && x <= childRight_[i] + tol) return i;
    return std::nullopt;
}

double SelfSimilarSpace::shiftPoint(double x, std::size_t digit) const {
    const double y = (x - offsets_[digit]) / ratios_[digit];
    return std::clamp(y, hullLeft_, hullRight_);
}

double SelfSimilarSpace::escapeDistance(double x, std::size_t digit) const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < childLeft_.size(); ++j) {
        if (j == digit) continue;
        const double d = std::max({childLeft_[j] - x, x - childRight_[j], 0.0});
        best = std::min(best, d);
    }
    return best;
}

IntegralResult SelfSimilarSpace::integrate(const detail::PositionKernel& kernel,
                                           double tol,
                                           std::size_t maxCells) const {
    if (!(tol > 0)) throw DomainError("integration tolerance must be positive");

    std::vector<Cell> heap;
    Kahan doneVal, doneLow, doneHigh;
    long double frozenErr = 0, liveErr = 0;
    std::uint64_t seq = 0;
    std::size_t scored = 0;

    auto admit = [&](double left, double width, double mass, int depth) {
        Cell c;
        c.left = left;
        c.width = width;
        c.mass = mass;
        c.depth = depth;
        c.seq = seq++;
        c.sc = kernel.score(left, left + width, left + relBary_ * width);
        ++scored;
        const double err = c.mass * c.sc.error;
        if (err <= 0 || depth >= kMaxDepth) {
            doneVal.add(c.mass * c.sc.estimate);
            doneLow.add(c.mass * c.sc.low);
            doneHigh.add(c.mass * c.sc.high);
            frozenErr += err;
            return;
        }
        liveErr += err;
        heap.push_back(std::move(c));
        std::push_heap(heap.begin(), heap.end(), heapLess);
    };

    admit(hullLeft_, diameter(), totalMass_, 0);

    while (liveErr + frozenErr > tol && !heap.empty()) {
        if (scored + ratios_.size() > maxCells)
            throw ToleranceError("cell budget exhausted before tolerance",
                                 static_cast<double>(liveErr + frozenErr));
        std::pop_heap(heap.begin(), heap.end(), heapLess);
        Cell parent = std::move(heap.back());
        heap.pop_back();
        liveErr -= parent.mass * parent.sc.error;
        for (std::size_t i = 0; i < ratios_.size(); ++i)
            admit(parent.left + childRelLeft_[i] * parent.width,
                  parent.width * ratios_[i], parent.mass * probs_[i],
                  parent.depth + 1);
        if (liveErr < 0) liveErr = 0;  // guard against cancellation drift
    }

    std::sort(heap.begin(), heap.end(),
              [](const Cell& a, const Cell& b) { return a.seq < b.seq; });
    for (const Cell& c : heap) {
        doneVal.add(c.mass * c.sc.estimate);
        doneLow.add(c.mass * c.sc.low);
        doneHigh.add(c.mass * c.sc.high);
    }
    // Each cell's estimate sits within sc.error of the cell mean, so the
    // summed error budget certifies the total on its own; intersect it with
    // the per-cell envelope to report the tighter bracket.
    const double certified = static_cast<double>(liveErr + frozenErr);
    IntegralResult r;
    r.low = std::max(doneLow.sum, doneVal.sum - certified);
    r.high = std::min(doneHigh.sum, doneVal.sum + certified);
    r.value = std::clamp(doneVal.sum, r.low, r.high);
    return r;
}

double SelfSimilarSpace::ballMeasure(double x, double r, double tol) const {
    if (!(r > 0) || !std::isfinite(r))
        throw DomainError("ball radius must be positive");
    const double slack = 1e-9 * diameter();
    if (x < hullLeft_ - slack || x > hullRight_ + slack)
        throw DomainError("point lies outside the attractor hull");
    if (r >= std::max(x - hullLeft_, hullRight_ - x)) return totalMass_;
    return integrate(IndicatorKernel(x - r, x + r), tol).value;
}

double SelfSimilarSpace::intervalMeasure(double lo, double hi, double tol) const {
    if (!(hi > lo)) return 0;
    if (hi <= hullLeft_ || lo >= hullRight_) return 0;
    if (lo <= hullLeft_ && hi >= hullRight_) return totalMass_;
    return integrate(IndicatorKernel(lo, hi), tol).value;
}

IntegralResult SelfSimilarSpace::windowIntegral(double x, double rlo, double rhi,
                                                double tol) const {
    if (!(rlo > 0)) throw DomainError("radial window must start above zero");
    if (!(rhi > rlo)) return {};
    return integrate(RadialShellKernel(x, rlo, rhi, q_), tol);
}

IntegralResult SelfSimilarSpace::neighborhoodVariation(double x, double delta,
                                                       double rlo, double rhi,
                                                       double tol) const {
    if (!(rlo > 0)) throw DomainError("radial window must start above zero");
    if (!(delta >= 0)) throw DomainError("perturbation size must be >= 0");
    if (!(rhi > rlo) || delta == 0) return {};
    return integrate(ShellBandKernel(x, delta, rlo, rhi, q_), tol);
}

IntegralResult SelfSimilarSpace::radialIntegral(double x, double rlo, double rhi,
                                                double tol) const {
    if (!(rlo > 0) || !std::isfinite(rlo))
        throw DomainError("radial window must start above zero");
    if (!(rhi > rlo)) return {};
    const double slack = 1e-9 * diameter();
    if (x < hullLeft_ - slack || x > hullRight_ + slack)
        throw DomainError("point lies outside the attractor hull");

    double amax = *std::max_element(ratios_.begin(), ratios_.end());
    const int levels =
        2 + std::max(0, static_cast<int>(std::ceil(
                std::log(std::max(diameter(), rhi) / rlo) / -std::log(amax))));
    const double wtol = tol / levels;

    // Peel the integral one renormalisation level at a time: while the shell
    // radius stays below the distance to the sibling cylinders, the measure
    // seen by the ball is an exact rescaled copy one level down.
    IntegralResult acc;
    double cx = x, lo = rlo, hi = rhi;
    for (int iter = 0; iter < 4 * kMaxDepth; ++iter) {
        if (!(hi > lo)) return acc;
        const auto digit = firstDigit(cx);
        if (!digit) break;
        const double safe = escapeDistance(cx, *digit);
        if (safe <= lo * (1 + 1e-12)) break;
        if (hi > safe) {
            acc += windowIntegral(cx, safe, hi, wtol);
            hi = safe;
        }
        const double a = ratios_[*digit];
        cx = shiftPoint(cx, *digit);
        lo /= a;
        hi /= a;
    }
    acc += windowIntegral(cx, lo, hi, wtol);
    return acc;
}

Cylinder SelfSimilarSpace::sampleCylinder(RngStream& rng,
                                          double resolution) const {
    if (!(resolution > 0))
        throw DomainError("sampling resolution must be positive");
    Cylinder c = rootCylinder();
    while (c.diam > resolution && c.word.size() < kMaxDepth) {
        const std::size_t d = sampleFromCumulative(rng, cumProbs_);
        c.word.push_back(static_cast<std::uint8_t>(d));
        c.left += childRelLeft_[d] * c.diam;
        c.diam *= ratios_[d];
        c.mass *= probs_[d];
    }
    return c;
}

double SelfSimilarSpace::samplePoint(RngStream& rng, double resolution) const {
    return sampleCylinder(rng, resolution).mid();
}

// ---------------------------------------------------------------------------
// CircleSpace

CircleSpace::CircleSpace(std::vector<Arc> arcs) : arcs_(std::move(arcs)) {
    if (arcs_.empty()) throw InvalidSpaceError("circle needs at least one arc");
    if (std::abs(arcs_.front().from) > 1e-9)
        throw InvalidSpaceError("arcs must start at 0");
    if (std::abs(arcs_.back().to - 1.0) > 1e-9)
        throw InvalidSpaceError("arcs must end at 1");
    arcs_.front().from = 0;
    arcs_.back().to = 1;
    for (std::size_t i = 0; i < arcs_.size(); ++i) {
        Arc& a = arcs_[i];
        if (!std::isfinite(a.weight) || a.weight < 0)
            throw InvalidSpaceError("arc weights must be non-negative");
        if (i + 1 < arcs_.size()) {
            if (std::abs(arcs_[i + 1].from - a.to) > 1e-9)
                throw InvalidSpaceError("arcs must tile the circle contiguously");
            arcs_[i + 1].from = a.to;
        }
        if (!(a.to > a.from))
            throw InvalidSpaceError("arcs must have positive length");
    }

    cumMass_.resize(arcs_.size());
    double acc = 0;
    minWeight_ = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < arcs_.size(); ++i) {
        acc += arcs_[i].weight * (arcs_[i].to - arcs_[i].from);
        cumMass_[i] = acc;
        minWeight_ = std::min(minWeight_, arcs_[i].weight);
    }
    if (!(acc > 0)) throw InvalidSpaceError("circle must carry positive mass");
    totalMass_ = acc;
    q_ = 1.0;
    hullLeft_ = 0;
    hullRight_ = 1;
}

double CircleSpace::weightAt(double y) const {
    y -= std::floor(y);
    for (const Arc& a : arcs_)
        if (y < a.to) return a.weight;
    return arcs_.back().weight;
}

namespace {
// Mass of the lifted window [lo, hi] against arcs repeated one turn each way.
double liftedMass(const std::vector<CircleSpace::Arc>& arcs, double lo,
                  double hi) {
    double m = 0;
    for (int s = -1; s <= 1; ++s)
        for (const auto& a : arcs) {
            const double ov =
                std::min(hi, a.to + s) - std::max(lo, a.from + s);
            if (ov > 0) m += a.weight * ov;
        }
    return m;
}
}  // namespace

double CircleSpace::ballMeasure(double x, double r, double tol) const {
    (void)tol;
    if (!(r > 0) || !std::isfinite(r))
        throw DomainError("ball radius must be positive");
    if (r >= 0.5) return totalMass_;
    x -= std::floor(x);
    return liftedMass(arcs_, x - r, x + r);
}

double CircleSpace::intervalMeasure(double lo, double hi, double tol) const {
    (void)tol;
    if (!(hi > lo)) return 0;
    if (hi - lo >= 1) return totalMass_;
    const double shift = std::floor(lo);
    return liftedMass(arcs_, lo - shift, hi - shift);
}

IntegralResult CircleSpace::radialIntegral(double x, double rlo, double rhi,
                                           double tol) const {
    (void)tol;
    if (!(rlo > 0) || !std::isfinite(rlo))
        throw DomainError("radial window must start above zero");
    if (!(rhi > rlo)) return {};
    x -= std::floor(x);

    double total = 0;
    if (rhi > 0.5) {
        const double tailLo = std::max(rlo, 0.5);
        if (rhi > tailLo) total += totalMass_ * (1.0 / tailLo - 1.0 / rhi);
    }
    const double rh = std::min(rhi, 0.5);
    if (rlo < rh) {
        // F is the odd antiderivative of the shell weight psi(|z|) with
        // psi(d) = 1/max(d, rlo) - 1/rh for d < rh and 0 beyond.
        const double plateau = 1.0 / rlo - 1.0 / rh;
        auto F = [&](double z) {
            const double s = z < 0 ? -1.0 : 1.0;
            double d = std::min(std::abs(z), rh);
            double g;
            if (d <= rlo)
                g = d * plateau;
            else
                g = rlo * plateau + std::log(d / rlo) - (d - rlo) / rh;
            return s * g;
        };
        for (int s = -1; s <= 1; ++s)
            for (const auto& a : arcs_) {
                const double zl = std::max(a.from + s - x, -0.5);
                const double zh = std::min(a.to + s - x, 0.5);
                if (zh > zl) total += a.weight * (F(zh) - F(zl));
            }
    }
    return {total, total, total};
}

double CircleSpace::samplePoint(RngStream& rng, double resolution) const {
    (void)resolution;
    const double u = rng.nextDouble() * cumMass_.back();
    const auto it = std::lower_bound(cumMass_.begin(), cumMass_.end(), u);
    const std::size_t i =
        std::min(static_cast<std::size_t>(it - cumMass_.begin()),
                 arcs_.size() - 1);
    const Arc& a = arcs_[i];
    if (a.weight <= 0) return a.from;
    const double prev = i == 0 ? 0.0 : cumMass_[i - 1];
    const double pos = a.from + (u - prev) / a.weight;
    return std::clamp(pos, a.from, a.to);
}

// ---------------------------------------------------------------------------
// Regularity check and JSON loading

RegularityBounds verifyRegularity(
    const SpaceModel& space,
    const std::vector<std::pair<double, double>>& grid) {
    if (grid.empty()) throw DomainError("regularity grid must be non-empty");
    RegularityBounds b;
    b.c0 = std::numeric_limits<double>::infinity();
    b.C0 = 0;
    const double q = space.regularityExponent();
    for (const auto& [x, r] : grid) {
        const double ratio = space.ballMeasure(x, r) / std::pow(r, q);
        b.c0 = std::min(b.c0, ratio);
        b.C0 = std::max(b.C0, ratio);
    }
    return b;
}

std::shared_ptr<SpaceModel> loadSpace(const std::string& jsonText) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(jsonText);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidSpaceError(std::string("invalid space JSON: ") + e.what());
    }
    try {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "ifs") {
            auto ratios = j.at("ratios").get<std::vector<double>>();
            auto offsets = j.at("offsets").get<std::vector<double>>();
            return std::make_shared<SelfSimilarSpace>(std::move(ratios),
                                                      std::move(offsets));
        }
        if (kind == "circle") {
            std::vector<CircleSpace::Arc> arcs;
            for (const auto& a : j.at("arcs")) {
                arcs.push_back({a.at("from").get<double>(),
                                a.at("to").get<double>(),
                                a.at("weight").get<double>()});
            }
            return std::make_shared<CircleSpace>(std::move(arcs));
        }
        throw InvalidSpaceError("unknown space kind: " + kind);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidSpaceError(std::string("malformed space description: ") +
                                e.what());
    }
}

std::shared_ptr<SpaceModel> loadSpaceFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ResourceError("cannot read space file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return loadSpace(ss.str());
}

}  // namespace cutout
