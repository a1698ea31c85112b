#include "cutout/density.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cutout/errors.hpp"

namespace cutout {

namespace {

// Absolute-tolerance radial integral targeting a relative error: a cheap
// pilot pass fixes the scale, a second pass refines to relTol * value.
IntegralResult radialToRelTol(const SpaceModel& space, double x, double rlo,
                              double rhi, double relTol) {
    const IntegralResult pilot = space.radialIntegral(x, rlo, rhi, 1e-4);
    const double scale = std::max(std::abs(pilot.value), 1e-6);
    const double absTol = std::max(relTol * scale, 1e-14);
    if (absTol >= 1e-4) return pilot;
    return space.radialIntegral(x, rlo, rhi, absTol);
}

}  // namespace

double averageDensity(const SpaceModel& space, double x, double t,
                      double relTol) {
    if (!(t > 0) || !(t < 1))
        throw DomainError("average density needs a scale t in (0,1)");
    return radialToRelTol(space, x, t, 1.0, relTol).value / (-std::log(t));
}

DensityProfile densityProfile(const SpaceModel& space, double x,
                              const std::vector<double>& tGrid,
                              double relTol) {
    DensityProfile out;
    out.x = x;
    out.tGrid = tGrid;
    out.values.reserve(tGrid.size());
    for (double t : tGrid) out.values.push_back(averageDensity(space, x, t, relTol));
    return out;
}

double survivalProbability(const SpaceModel& space, double x, double t,
                           double gamma, double relTol) {
    if (!(t > 0) || !(t < 1))
        throw DomainError("survival probability needs t in (0,1)");
    if (gamma < 0) throw DomainError("intensity must be >= 0");
    if (gamma == 0) return 1.0;
    const double integral = radialToRelTol(space, x, t, 1.0, relTol).value;
    return std::min(1.0, std::exp(-gamma * integral));
}

double applyShift(const SpaceModel& space, double x) {
    if (space.isCircle()) {
        const double y = 2.0 * x;
        return y - std::floor(y);
    }
    const auto& ifs = dynamic_cast<const SelfSimilarSpace&>(space);
    const auto digit = ifs.firstDigit(x);
    if (!digit) throw DomainError("point has no symbolic code (gap point)");
    return ifs.shiftPoint(x, *digit);
}

double shiftScale(const SpaceModel& space) {
    if (space.isCircle()) return 0.5;
    return dynamic_cast<const SelfSimilarSpace&>(space).commonRatio();
}

double cocycleTerm(const SpaceModel& space, double x, int k, double tol) {
    if (k < 0) throw DomainError("shell index must be >= 0");
    const double a = shiftScale(space);
    const double hi = std::pow(a, k);
    return space.radialIntegral(x, hi * a, hi, tol).value;
}

AdditivityTable checkAsymptoticAdditivity(const SpaceModel& space, int nMax,
                                          int kMax,
                                          const std::vector<double>& points,
                                          double tol) {
    if (points.empty()) throw DomainError("additivity check needs sample points");
    if (nMax < 1 || kMax < 0) throw DomainError("invalid additivity depths");

    AdditivityTable table;
    table.kMax = kMax;
    table.epsilon.assign(nMax, 0.0);
    for (double x : points) {
        // orbit x, Sx, ..., S^kMax x
        std::vector<double> orbit{x};
        for (int k = 0; k < kMax; ++k)
            orbit.push_back(applyShift(space, orbit.back()));
        // f_j(x) along the full window range used on the right-hand side
        std::vector<double> fAtBase(nMax + kMax + 1);
        for (int j = 1; j <= nMax + kMax; ++j)
            fAtBase[j] = cocycleTerm(space, x, j, tol);
        for (int n = 1; n <= nMax; ++n)
            for (int k = 0; k <= kMax; ++k) {
                const double lhs = k == 0 ? fAtBase[n]
                                          : cocycleTerm(space, orbit[k], n, tol);
                const double diff = std::abs(lhs - fAtBase[n + k]);
                table.epsilon[n - 1] = std::max(table.epsilon[n - 1], diff);
            }
    }
    return table;
}

SublevelMass sublevelMeasure(const SpaceModel& space, double beta, double r,
                             bool withBrackets) {
    if (!(beta > 0)) throw DomainError("sublevel threshold must be positive");
    if (!(r > 0) || !(r < 1)) throw DomainError("sublevel scale must be in (0,1)");

    SublevelMass out;
    if (space.isCircle()) {
        // A is x-independent on a homogeneous circle only; evaluate per arc
        // representative to stay honest on piecewise densities.
        const auto& circ = dynamic_cast<const CircleSpace&>(space);
        double wMax = 0;
        for (const auto& arc : circ.arcs()) wMax = std::max(wMax, arc.weight);
        const int cellsPerUnit = static_cast<int>(std::ceil(1.0 / r));
        const double w = 1.0 / cellsPerUnit;
        for (int i = 0; i < cellsPerUnit; ++i) {
            const double rep = (i + 0.5) * w;
            const double mass = circ.intervalMeasure(i * w, (i + 1) * w);
            const double A = averageDensity(circ, rep, r, 1e-7);
            ++out.cellCount;
            if (A < beta) out.estimate += mass;
            if (withBrackets) {
                // crude but safe: ball-measure modulus over one cell width
                const double var = 2.0 * w * wMax / r / (-std::log(r));
                if (A + var < beta) out.low += mass;
                if (A - var < beta) out.high += mass;
            }
        }
        if (!withBrackets) {
            out.low = out.high = out.estimate;
        }
        return out;
    }

    const auto& ifs = dynamic_cast<const SelfSimilarSpace&>(space);
    const double logInv = -std::log(r);
    for (const Cylinder& c : ifs.cutSet(r)) {
        const double rep = c.mid();
        const double A = averageDensity(ifs, rep, r, 1e-7);
        ++out.cellCount;
        if (A < beta) out.estimate += c.mass;
        if (withBrackets) {
            const double band =
                ifs.neighborhoodVariation(rep, c.diam, r, 1.0, 1e-4 * logInv)
                    .high;
            const double var = band / logInv + 2e-7;
            if (A + var < beta) out.low += c.mass;
            if (A - var < beta) out.high += c.mass;
        }
    }
    if (!withBrackets) {
        out.low = out.high = out.estimate;
    }
    return out;
}

CoarseBounds coarseBounds(const SpaceModel& space, double tStar, double gamma) {
    if (!(tStar > 0) || !(tStar < 1))
        throw DomainError("terminal scale must be in (0,1)");
    if (gamma < 0) throw DomainError("intensity must be >= 0");

    // (A, mass) pairs over a cut-set (or uniform arcs on the circle)
    std::vector<std::pair<double, double>> cells;
    if (space.isCircle()) {
        const int n = 512;
        for (int i = 0; i < n; ++i) {
            const double rep = (i + 0.5) / n;
            cells.emplace_back(averageDensity(space, rep, tStar),
                               space.intervalMeasure(double(i) / n,
                                                     double(i + 1) / n));
        }
    } else {
        const auto& ifs = dynamic_cast<const SelfSimilarSpace&>(space);
        for (const Cylinder& c : ifs.cutSet(tStar))
            cells.emplace_back(averageDensity(ifs, c.mid(), tStar), c.mass);
    }

    std::sort(cells.begin(), cells.end());
    double total = 0;
    for (const auto& [a, m] : cells) total += m;

    CoarseBounds b;
    b.d0 = cells.front().first;
    double cum = 0;
    b.D0 = cells.back().first;
    for (const auto& [a, m] : cells) {
        cum += m;
        if (cum >= 0.999 * total) {
            b.D0 = a;
            break;
        }
    }
    const double q = space.regularityExponent();
    b.gamma0Low = q / b.D0;
    b.gamma0High = q / b.d0;
    b.dimLow = q - gamma * b.D0;
    b.dimHigh = q - gamma * b.d0;
    return b;
}

}  // namespace cutout
