#pragma once
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cutout/rng.hpp"

namespace cutout {

// Digit string addressing a cylinder of a self-similar space.
using Word = std::vector<std::uint8_t>;

struct Cylinder {
    Word word;
    double left = 0;  // left end of the cylinder interval
    double diam = 0;  // geometric length of the cylinder interval
    double mass = 0;  // natural measure of the cylinder
    double right() const { return left + diam; }
    double mid() const { return left + 0.5 * diam; }
};

struct IntegralResult {
    double value = 0;  // best estimate
    double low = 0;    // rigorous lower bound
    double high = 0;   // rigorous upper bound
    double width() const { return high - low; }
    IntegralResult& operator+=(const IntegralResult& o) {
        value += o.value;
        low += o.low;
        high += o.high;
        return *this;
    }
};

namespace detail {

// Kernel statistics over one position cell [ylo, yhi], reported per unit of
// cell mass.  `low`/`high` are rigorous bounds on the kernel over the cell,
// `estimate` is the value used for the point estimate (evaluated at the
// cell's measure barycentre), and `error` is an estimate of
// |cell mean - estimate| that never exceeds high - low.
struct CellScore {
    double low = 0, high = 0, estimate = 0, error = 0;
};

class PositionKernel {
public:
    virtual ~PositionKernel() = default;
    virtual CellScore score(double ylo, double yhi, double bary) const = 0;
};

}  // namespace detail

// Common interface of the supported metric measure spaces.  Both concrete
// kinds carry an exponent Q with c0 r^Q <= H(B(x,r)) <= C0 r^Q on the
// attractor, and expose the measure-side primitives the estimators build on.
class SpaceModel {
public:
    virtual ~SpaceModel() = default;

    double regularityExponent() const { return q_; }
    double totalMass() const { return totalMass_; }
    virtual bool isCircle() const = 0;
    virtual std::string kindName() const = 0;

    double hullLeft() const { return hullLeft_; }
    double hullRight() const { return hullRight_; }

    // Measure of the open ball B(x, r).
    virtual double ballMeasure(double x, double r, double tol = 1e-10) const = 0;

    // Measure of the open interval (lo, hi); on the circle the coordinates
    // are lifted (any window of length >= 1 has full measure).
    virtual double intervalMeasure(double lo, double hi, double tol = 1e-10) const = 0;

    // Integral of H(B(x,s)) s^{-Q-1} ds over [rlo, rhi].
    virtual IntegralResult radialIntegral(double x, double rlo, double rhi,
                                          double tol = 1e-9) const = 0;

    // One H-distributed point, located to within `resolution`.
    virtual double samplePoint(RngStream& rng, double resolution) const = 0;

protected:
    double q_ = 1;
    double totalMass_ = 1;
    double hullLeft_ = 0;
    double hullRight_ = 1;
};

// Attractor of an affine iterated function system on the line,
// g_i(y) = ratio_i * y + offset_i, with strong separation, carrying its
// natural self-similar measure (cylinder mass = product of ratio^Q).
class SelfSimilarSpace final : public SpaceModel {
public:
    SelfSimilarSpace(std::vector<double> ratios, std::vector<double> offsets);

    bool isCircle() const override { return false; }
    std::string kindName() const override { return "ifs"; }

    const std::vector<double>& ratios() const { return ratios_; }
    const std::vector<double>& offsets() const { return offsets_; }
    std::size_t branchCount() const { return ratios_.size(); }
    bool equalRatios() const { return equalRatios_; }
    double commonRatio() const;  // throws UnsupportedSpaceError when ratios differ
    double diameter() const { return hullRight_ - hullLeft_; }
    double minGap() const { return minGap_; }
    double moranResidual() const { return moranResidual_; }

    // Smallest k >= 1 such that every ball of radius max(ratios)^k centred in
    // a first-level cylinder stays clear of the other first-level cylinders;
    // below this depth the shell cocycle renormalises exactly one level.
    int renormAnchorDepth() const { return renormAnchorDepth_; }

    Cylinder cylinder(const Word& word) const;
    Cylinder rootCylinder() const;

    // Cut set at scale tau: all words whose cylinder has diameter <= tau
    // while the parent cylinder is still wider than tau.  Sorted by left end.
    std::vector<Cylinder> cutSet(double tau) const;

    // First-level cylinder containing x, if any (points in gaps have none).
    std::optional<std::size_t> firstDigit(double x) const;
    // Expanding shift: maps the cylinder of `digit` affinely onto the hull.
    double shiftPoint(double x, std::size_t digit) const;
    // Distance from x to every first-level cylinder other than `digit`.
    double escapeDistance(double x, std::size_t digit) const;

    double ballMeasure(double x, double r, double tol = 1e-10) const override;
    double intervalMeasure(double lo, double hi, double tol = 1e-10) const override;
    IntegralResult radialIntegral(double x, double rlo, double rhi,
                                  double tol = 1e-9) const override;

    // Same integral evaluated by direct cell refinement without the
    // level-by-level renormalisation; building block for cocycle tables.
    IntegralResult windowIntegral(double x, double rlo, double rhi, double tol) const;

    // Upper bound for how much the radial integral over [rlo, rhi] can move
    // when x is perturbed by at most delta: integrates the shell-weight band
    // psi(max(d-delta,0)) - psi(d+delta) against the measure.
    IntegralResult neighborhoodVariation(double x, double delta, double rlo,
                                         double rhi, double tol) const;

    // Adaptive cylinder refinement of integral k dH with rigorous brackets.
    IntegralResult integrate(const detail::PositionKernel& kernel, double tol,
                             std::size_t maxCells = 600000) const;

    double samplePoint(RngStream& rng, double resolution) const override;
    Cylinder sampleCylinder(RngStream& rng, double resolution) const;

private:
    std::vector<double> ratios_;
    std::vector<double> offsets_;
    std::vector<double> probs_;          // ratio^Q, sums to 1
    std::vector<double> cumProbs_;       // inclusive prefix sums of probs_
    std::vector<double> childRelLeft_;   // child interval placement within parent
    std::vector<double> childLeft_;      // first-level cylinder intervals
    std::vector<double> childRight_;
    double relBary_ = 0.5;  // measure barycentre, relative to the hull
    double minGap_ = 0;
    double moranResidual_ = 0;
    bool equalRatios_ = false;
    int renormAnchorDepth_ = 1;
};

// Circle of circumference 1 with a piecewise-constant density; Q = 1.
class CircleSpace final : public SpaceModel {
public:
    struct Arc {
        double from, to, weight;
    };

    explicit CircleSpace(std::vector<Arc> arcs);

    bool isCircle() const override { return true; }
    std::string kindName() const override { return "circle"; }

    const std::vector<Arc>& arcs() const { return arcs_; }
    double minWeight() const { return minWeight_; }
    double weightAt(double y) const;

    double ballMeasure(double x, double r, double tol = 1e-10) const override;
    double intervalMeasure(double lo, double hi, double tol = 1e-10) const override;
    IntegralResult radialIntegral(double x, double rlo, double rhi,
                                  double tol = 1e-9) const override;
    double samplePoint(RngStream& rng, double resolution) const override;

private:
    std::vector<Arc> arcs_;
    std::vector<double> cumMass_;
    double minWeight_ = 0;
};

// Exponent Q solving sum(ratio_i^Q) = 1 (bisection, residual <= 1e-12).
double solveMoranExponent(const std::vector<double>& ratios,
                          double* residual = nullptr);

struct RegularityBounds {
    double c0 = 0;  // min over the grid of H(B(x,r)) / r^Q
    double C0 = 0;  // max over the grid
};

// Empirical regularity constants over an explicit grid of (x, r) pairs.
RegularityBounds verifyRegularity(const SpaceModel& space,
                                  const std::vector<std::pair<double, double>>& grid);

std::shared_ptr<SpaceModel> loadSpace(const std::string& jsonText);
std::shared_ptr<SpaceModel> loadSpaceFile(const std::string& path);

}  // namespace cutout
