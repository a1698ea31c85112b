#include "cutout/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

#include "cutout/density.hpp"
#include "cutout/errors.hpp"

namespace cutout {

namespace {

// Stream tags: every estimator derives per-trial streams under its own tag so
// no two estimators ever share random numbers for the same seed.
constexpr std::uint64_t kSurvivalTag = 1;
constexpr std::uint64_t kCoveringTag = 2;
constexpr std::uint64_t kMartingaleTag = 3;
constexpr std::uint64_t kMassTag = 4;
constexpr std::uint64_t kExtinctionTag = 5;
constexpr std::uint64_t kSweepTag = 6;

void checkGammaScale(double gamma, double t) {
    if (!(gamma >= 0) || !std::isfinite(gamma))
        throw DomainError("gamma must be a nonnegative finite number");
    if (!(t > 0) || !(t < 1))
        throw DomainError("scale t must lie in (0, 1)");
}

// Runs body(0..trials-1), possibly on several threads.  Bodies must write
// only to their own per-trial slot; the caller reduces the slots in index
// order afterwards, so results never depend on the thread count.
void runTrials(std::uint64_t trials, int threads,
               const std::function<void(std::uint64_t)>& body) {
    if (threads <= 1 || trials < 2) {
        for (std::uint64_t i = 0; i < trials; ++i) body(i);
        return;
    }
    const std::uint64_t workers =
        std::min<std::uint64_t>(static_cast<std::uint64_t>(threads), trials);
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr firstError = nullptr;
    std::mutex errorLock;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::uint64_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            std::uint64_t i;
            while ((i = next.fetch_add(1)) < trials) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> guard(errorLock);
                    if (!firstError) firstError = std::current_exception();
                    next.store(trials);
                    return;
                }
            }
        });
    for (auto& th : pool) th.join();
    if (firstError) std::rethrow_exception(firstError);
}

// Draws Poisson(rate) events at scale t and appends them; shared by the
// one-shot sampler and the coupled sweep (which tops up with extra rate).
void appendEvents(const SpaceModel& space, double rate, double t,
                  RngStream& rng, std::vector<CutoutEvent>& out) {
    const double q = space.regularityExponent();
    const std::uint64_t n = samplePoisson(rng, rate);
    out.reserve(out.size() + n);
    for (std::uint64_t i = 0; i < n; ++i) {
        CutoutEvent ev;
        ev.center = space.samplePoint(rng, t * 1e-6);
        ev.radius = cutoutRadius(t, q, rng.nextDouble());
        out.push_back(ev);
    }
}

double distanceTo(const SpaceModel& space, double x, double c) {
    double d = std::abs(x - c);
    if (space.isCircle()) d = std::min(d, 1.0 - d);
    return d;
}

// Is every interval of `inner` contained in some interval of `outer`?
// Both lists are sorted and disjoint.
bool isNested(const std::vector<std::pair<double, double>>& inner,
              const std::vector<std::pair<double, double>>& outer) {
    std::size_t j = 0;
    for (const auto& [lo, hi] : inner) {
        while (j < outer.size() && outer[j].second < lo) ++j;
        if (j == outer.size() || outer[j].first > lo || hi > outer[j].second)
            return false;
    }
    return true;
}

double rSquared(const std::vector<double>& x, const std::vector<double>& y,
                const RegressionFit& fit) {
    double meanY = 0;
    for (double v : y) meanY += v / static_cast<double>(y.size());
    double ssTot = 0, ssRes = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ssRes += r * r;
        ssTot += (y[i] - meanY) * (y[i] - meanY);
    }
    return ssTot > 0 ? 1.0 - ssRes / ssTot : 1.0;
}

TrialStats summarize(const std::vector<double>& slots) {
    RunningStat st;
    for (double v : slots) st.add(v);
    return {st.mean, st.meanStdError(), slots.size()};
}

}  // namespace

double poissonEventRate(const SpaceModel& space, double gamma, double t) {
    checkGammaScale(gamma, t);
    const double q = space.regularityExponent();
    return gamma * space.totalMass() * (std::pow(t, -q) - 1.0) / q;
}

double cutoutRadius(double t, double q, double u) {
    if (!(t > 0) || !(t < 1)) throw DomainError("scale t must lie in (0, 1)");
    if (!(q > 0)) throw DomainError("regularity exponent must be positive");
    if (!(u >= 0) || !(u <= 1)) throw DomainError("u must lie in [0, 1]");
    const double top = std::pow(t, -q);  // r = t at u = 0, r -> 1 as u -> 1
    return std::pow(top - u * (top - 1.0), -1.0 / q);
}

std::vector<CutoutEvent> sampleEvents(const SpaceModel& space, double gamma,
                                      double t, RngStream& rng) {
    const double rate = poissonEventRate(space, gamma, t);
    std::vector<CutoutEvent> out;
    appendEvents(space, rate, t, rng, out);
    return out;
}

Realization buildCutout(const SpaceModel& space,
                        std::vector<CutoutEvent> events) {
    const double hullLo = space.hullLeft();
    const double hullHi = space.hullRight();
    std::vector<std::pair<double, double>> open;
    open.reserve(events.size() * (space.isCircle() ? 3 : 1));
    for (const auto& ev : events) {
        if (space.isCircle()) {
            // lift the wrapped ball to the three translates that can meet [0,1]
            for (int s = -1; s <= 1; ++s)
                open.emplace_back(ev.center + s - ev.radius,
                                  ev.center + s + ev.radius);
        } else {
            open.emplace_back(ev.center - ev.radius, ev.center + ev.radius);
        }
    }
    std::sort(open.begin(), open.end());

    Realization out;
    out.events = std::move(events);
    // Sweep left to right; events are open, so touching balls leave the
    // shared endpoint as a singleton survivor.
    double cursor = hullLo;
    bool exhausted = false;
    for (const auto& [lo, hi] : open) {
        if (lo > hullHi) break;
        if (lo >= cursor) out.surviving.emplace_back(cursor, lo);
        if (hi > cursor) cursor = hi;
        if (cursor > hullHi) {
            exhausted = true;
            break;
        }
    }
    if (!exhausted) out.surviving.emplace_back(cursor, hullHi);
    return out;
}

bool pointSurvives(const Realization& real, double x) {
    const auto it = std::partition_point(
        real.surviving.begin(), real.surviving.end(),
        [x](const std::pair<double, double>& s) { return s.second < x; });
    return it != real.surviving.end() && it->first <= x;
}

bool intervalSurvives(const Realization& real, double lo, double hi) {
    const auto it = std::partition_point(
        real.surviving.begin(), real.surviving.end(),
        [lo](const std::pair<double, double>& s) { return s.second < lo; });
    return it != real.surviving.end() && it->first <= hi;
}

std::vector<SimCell> cellsAtScale(const SpaceModel& space, double t) {
    if (!(t > 0) || !(t < 1)) throw DomainError("scale t must lie in (0, 1)");
    std::vector<SimCell> cells;
    if (const auto* ifs = dynamic_cast<const SelfSimilarSpace*>(&space)) {
        for (const Cylinder& c : ifs->cutSet(t))
            cells.push_back({c.mid(), c.mass, c.left, c.right()});
        return cells;
    }
    const auto& circle = dynamic_cast<const CircleSpace&>(space);
    const auto k = static_cast<std::size_t>(std::ceil(1.0 / t - 1e-9));
    cells.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const double lo = static_cast<double>(i) / static_cast<double>(k);
        const double hi = static_cast<double>(i + 1) / static_cast<double>(k);
        cells.push_back(
            {0.5 * (lo + hi), circle.intervalMeasure(lo, hi), lo, hi});
    }
    return cells;
}

SurvivalEstimate survivalEstimate(const SpaceModel& space, double x,
                                  double gamma, double t,
                                  std::uint64_t trials, std::uint64_t seed,
                                  int threads) {
    checkGammaScale(gamma, t);
    const double slack = 1e-9 * (space.hullRight() - space.hullLeft());
    if (!(x >= space.hullLeft() - slack) || !(x <= space.hullRight() + slack))
        throw DomainError("query point lies outside the hull");
    SurvivalEstimate out;
    out.trials = trials;
    out.theory = survivalProbability(space, x, t, gamma);
    // Scan raw events instead of building the complement: only the query
    // point matters here.
    std::vector<std::uint8_t> alive(trials, 0);
    runTrials(trials, threads, [&](std::uint64_t i) {
        RngStream rng = RngStream::from(seed, {kSurvivalTag, i});
        bool hit = false;
        for (const auto& ev : sampleEvents(space, gamma, t, rng))
            if (distanceTo(space, x, ev.center) < ev.radius) {
                hit = true;
                break;
            }
        alive[i] = hit ? 0 : 1;
    });
    std::uint64_t successes = 0;
    for (std::uint8_t a : alive) successes += a;
    out.observed = wilsonInterval(successes, trials);
    return out;
}

CoveringExponent estimateCoveringExponent(const SpaceModel& space,
                                          double gamma,
                                          const std::vector<double>& scales,
                                          std::uint64_t trialsPerScale,
                                          std::uint64_t seed, int threads) {
    if (scales.empty()) throw DomainError("need at least one scale");
    CoveringExponent out;
    std::vector<double> logInvT, logDet, stochX, stochY, stochVar;
    for (std::size_t si = 0; si < scales.size(); ++si) {
        const double t = scales[si];
        checkGammaScale(gamma, t);
        const auto cells = cellsAtScale(space, t);
        CoveringRow row;
        row.t = t;
        row.trials = trialsPerScale;
        for (const auto& c : cells)
            row.detExpected += survivalProbability(space, c.rep, t, gamma);
        if (trialsPerScale > 0) {
            std::vector<double> counts(trialsPerScale, 0.0);
            runTrials(trialsPerScale, threads, [&](std::uint64_t i) {
                RngStream rng = RngStream::from(seed, {kCoveringTag, si, i});
                const Realization real =
                    buildCutout(space, sampleEvents(space, gamma, t, rng));
                double n = 0;
                for (const auto& c : cells)
                    if (pointSurvives(real, c.rep)) n += 1.0;
                counts[i] = n;
            });
            RunningStat st;
            for (double v : counts) st.add(v);
            row.stochMean = st.mean;
            row.stochVar = st.variance();
        }
        logInvT.push_back(std::log(1.0 / t));
        logDet.push_back(std::log(row.detExpected));
        if (row.stochMean > 0) {
            stochX.push_back(logInvT.back());
            stochY.push_back(std::log(row.stochMean));
            // delta method: var(log mean) ~ var(mean) / mean^2
            stochVar.push_back(row.stochVar /
                               (static_cast<double>(trialsPerScale) *
                                row.stochMean * row.stochMean));
        }
        out.rows.push_back(row);
    }
    if (logInvT.size() >= 2) out.detSlope = fitLine(logInvT, logDet).slope;
    if (stochX.size() >= 2) {
        const RegressionFit fit = fitLine(stochX, stochY, stochVar);
        out.stochSlope = fit.slope;
        out.stochSlopeSe = fit.slopeSe;
        out.r2 = rSquared(stochX, stochY, fit);
    }
    return out;
}

MartingaleResult martingaleCheck(const SpaceModel& space, double gamma,
                                 double t, std::uint64_t trials,
                                 std::uint64_t seed, int threads) {
    checkGammaScale(gamma, t);
    // Cells strictly finer than the event scale so cell reps resolve the
    // surviving set.
    const auto cells = cellsAtScale(space, t / 4.0);
    std::vector<double> weight(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i)
        weight[i] = cells[i].mass /
                    survivalProbability(space, cells[i].rep, t, gamma);
    double cut = 0.5;  // circle: left half
    if (const auto* ifs = dynamic_cast<const SelfSimilarSpace*>(&space))
        cut = ifs->cylinder({0}).right();
    MartingaleResult out;
    for (std::size_t i = 0; i < cells.size(); ++i)
        if (cells[i].rep <= cut) out.restrictedTheory += cells[i].mass;

    std::vector<double> whole(trials, 0.0), restricted(trials, 0.0);
    runTrials(trials, threads, [&](std::uint64_t i) {
        RngStream rng = RngStream::from(seed, {kMartingaleTag, i});
        const Realization real =
            buildCutout(space, sampleEvents(space, gamma, t, rng));
        double w = 0, r = 0;
        for (std::size_t j = 0; j < cells.size(); ++j)
            if (pointSurvives(real, cells[j].rep)) {
                w += weight[j];
                if (cells[j].rep <= cut) r += weight[j];
            }
        whole[i] = w;
        restricted[i] = r;
    });
    out.whole = summarize(whole);
    out.restricted = summarize(restricted);
    return out;
}

MassCheck expectedMassCheck(const SpaceModel& space, double gamma, double t,
                            std::uint64_t trials, std::uint64_t seed,
                            int threads) {
    checkGammaScale(gamma, t);
    const auto cells = cellsAtScale(space, t);
    MassCheck out;
    out.trials = trials;
    for (const auto& c : cells)
        out.quadrature += c.mass * survivalProbability(space, c.rep, t, gamma);
    std::vector<double> mass(trials, 0.0);
    runTrials(trials, threads, [&](std::uint64_t i) {
        RngStream rng = RngStream::from(seed, {kMassTag, i});
        const Realization real =
            buildCutout(space, sampleEvents(space, gamma, t, rng));
        double m = 0;
        for (const auto& c : cells)
            if (pointSurvives(real, c.rep)) m += c.mass;
        mass[i] = m;
    });
    const TrialStats st = summarize(mass);
    out.mcMean = st.mean;
    out.mcSe = st.se;
    return out;
}

EnergyResult energyIntegral(const SpaceModel& space, double s, int maxLevel) {
    if (!(s >= 0) || !std::isfinite(s))
        throw DomainError("energy exponent must be nonnegative");
    if (maxLevel < 2) throw DomainError("need at least two refinement levels");
    double ratio = 0.5, diam = 1.0;
    if (const auto* ifs = dynamic_cast<const SelfSimilarSpace*>(&space)) {
        ratio = *std::max_element(ifs->ratios().begin(), ifs->ratios().end());
        diam = ifs->diameter();
    }
    EnergyResult out;
    double prev = 0;
    for (int level = 1; level <= maxLevel; ++level) {
        const double tau = space.isCircle()
                               ? std::pow(0.5, level)
                               : std::pow(ratio, level) * diam * (1 + 1e-9);
        const auto cells = cellsAtScale(space, tau);
        double energy = 0;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            // diagonal: treat the cell pair distance as the cell diameter
            const double d = std::max(cells[i].right - cells[i].left, 1e-300);
            energy += cells[i].mass * cells[i].mass * std::pow(d, -s);
            for (std::size_t j = i + 1; j < cells.size(); ++j)
                energy += 2.0 * cells[i].mass * cells[j].mass *
                          std::pow(distanceTo(space, cells[i].rep,
                                              cells[j].rep), -s);
        }
        if (level > 1)
            out.lastRelChange =
                std::abs(energy - prev) / std::max(std::abs(energy), 1e-300);
        prev = energy;
        out.value = energy;
        out.levels = level;
    }
    out.divergent = out.lastRelChange > 0.1;
    return out;
}

ExtinctionResult extinctionProbe(const SpaceModel& space, double gamma,
                                 double t, std::uint64_t trials,
                                 std::uint64_t seed, int threads) {
    checkGammaScale(gamma, t);
    const auto cells = cellsAtScale(space, t);
    std::vector<std::uint8_t> dead(trials, 0);
    runTrials(trials, threads, [&](std::uint64_t i) {
        RngStream rng = RngStream::from(seed, {kExtinctionTag, i});
        const Realization real =
            buildCutout(space, sampleEvents(space, gamma, t, rng));
        bool any = false;
        for (const auto& c : cells)
            if (intervalSurvives(real, c.left, c.right)) {
                any = true;
                break;
            }
        dead[i] = any ? 0 : 1;
    });
    std::uint64_t extinct = 0;
    for (std::uint8_t d : dead) extinct += d;
    ExtinctionResult out;
    out.trials = trials;
    out.extinct = wilsonInterval(extinct, trials);
    return out;
}

std::vector<SweepRow> gammaSweep(const SpaceModel& space,
                                 const std::vector<double>& gammas, double t,
                                 std::uint64_t trials, std::uint64_t seed,
                                 int threads) {
    if (gammas.empty()) throw DomainError("need at least one gamma");
    for (std::size_t k = 0; k + 1 < gammas.size(); ++k)
        if (!(gammas[k + 1] >= gammas[k]))
            throw DomainError("gammas must be nondecreasing");
    for (double g : gammas) checkGammaScale(g, t);
    const auto cells = cellsAtScale(space, t);
    const double q = space.regularityExponent();
    const double ratePerGamma =
        space.totalMass() * (std::pow(t, -q) - 1.0) / q;
    const std::size_t levels = gammas.size();

    std::vector<double> frac(trials * levels, 0.0);
    std::vector<std::uint8_t> extinct(trials * levels, 0);
    std::vector<std::uint8_t> nested(trials * levels, 1);
    runTrials(trials, threads, [&](std::uint64_t i) {
        RngStream rng = RngStream::from(seed, {kSweepTag, i});
        std::vector<CutoutEvent> events;
        std::vector<std::pair<double, double>> prevSurviving;
        for (std::size_t k = 0; k < levels; ++k) {
            // superpose exactly the extra intensity, so the surviving sets
            // shrink along the sweep for the same trial
            const double extraGamma =
                k == 0 ? gammas[0] : gammas[k] - gammas[k - 1];
            appendEvents(space, extraGamma * ratePerGamma, t, rng, events);
            Realization real = buildCutout(space, events);
            double alive = 0;
            bool any = false;
            for (const auto& c : cells) {
                if (pointSurvives(real, c.rep)) alive += 1.0;
                if (!any && intervalSurvives(real, c.left, c.right))
                    any = true;
            }
            frac[i * levels + k] = alive / static_cast<double>(cells.size());
            extinct[i * levels + k] = any ? 0 : 1;
            nested[i * levels + k] =
                k == 0 || isNested(real.surviving, prevSurviving);
            prevSurviving = std::move(real.surviving);
        }
    });

    std::vector<SweepRow> rows(levels);
    for (std::size_t k = 0; k < levels; ++k) {
        rows[k].gamma = gammas[k];
        rows[k].nested = true;
    }
    for (std::uint64_t i = 0; i < trials; ++i)
        for (std::size_t k = 0; k < levels; ++k) {
            rows[k].cellSurvivalMean += frac[i * levels + k];
            rows[k].extinctFraction += extinct[i * levels + k] ? 1.0 : 0.0;
            if (!nested[i * levels + k]) rows[k].nested = false;
        }
    for (auto& row : rows) {
        row.cellSurvivalMean /= static_cast<double>(trials);
        row.extinctFraction /= static_cast<double>(trials);
    }
    return rows;
}

}  // namespace cutout
