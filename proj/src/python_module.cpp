// Python bindings for the core operations: space loading, densities,
// pressure/spectrum analysis, and the Monte Carlo estimators.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "cutout/density.hpp"
#include "cutout/errors.hpp"
#include "cutout/sim.hpp"
#include "cutout/space.hpp"
#include "cutout/thermo.hpp"

namespace py = pybind11;
using namespace cutout;

namespace {

py::dict proportionDict(const Proportion& p) {
    py::dict d;
    d["estimate"] = p.pointEstimate;
    d["low"] = p.wilsonLow;
    d["high"] = p.wilsonHigh;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "fractal cutout simulator core";

    py::register_exception<InvalidSpaceError>(m, "InvalidSpaceError",
                                              PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<UnsupportedSpaceError>(m, "UnsupportedSpaceError",
                                                  PyExc_ValueError);

    py::class_<SpaceModel, std::shared_ptr<SpaceModel>>(m, "Space")
        .def_property_readonly("q", &SpaceModel::regularityExponent)
        .def_property_readonly("total_mass", &SpaceModel::totalMass)
        .def_property_readonly("kind", &SpaceModel::kindName)
        .def_property_readonly("hull", [](const SpaceModel& sp) {
            return py::make_tuple(sp.hullLeft(), sp.hullRight());
        });

    m.def("load_space", &loadSpace, py::arg("json_text"),
          "Build a space from a JSON description.");
    m.def("load_space_file", &loadSpaceFile, py::arg("path"));

    m.def(
        "average_density",
        [](const SpaceModel& sp, double x, double t) {
            return averageDensity(sp, x, t);
        },
        py::arg("space"), py::arg("x"), py::arg("t"));
    m.def(
        "survival_probability",
        [](const SpaceModel& sp, double x, double t, double gamma) {
            return survivalProbability(sp, x, t, gamma);
        },
        py::arg("space"), py::arg("x"), py::arg("t"), py::arg("gamma"));

    py::class_<PressureAnalyzer>(m, "PressureAnalyzer")
        .def(py::init<const SpaceModel&, int>(), py::arg("space"),
             py::arg("depth"), py::keep_alive<1, 2>())
        .def_property_readonly("depth", &PressureAnalyzer::depth)
        .def_property_readonly("q", &PressureAnalyzer::regularityExponent)
        .def("tilde",
             [](const PressureAnalyzer& pa, double q) {
                 const PressureValue v = pa.tilde(q);
                 return py::make_tuple(v.value, v.low, v.high);
             },
             py::arg("q"), "Normalized pressure (value, low, high).");

    m.def("gamma_zero", &gammaZero, py::arg("analyzer"));
    m.def("alpha_zero", &alphaZeroEstimate, py::arg("analyzer"));
    m.def(
        "spectrum",
        [](const PressureAnalyzer& pa, int grid) {
            const SpectrumTable t = spectrumTable(pa, grid);
            py::dict d;
            d["alpha_min"] = t.alphaMin;
            d["alpha_max"] = t.alphaMax;
            d["alpha_zero"] = t.alphaZero;
            d["f_at_alpha_zero"] = t.fAtAlphaZero;
            py::list pts;
            for (const SpectrumPoint& p : t.points)
                pts.append(py::make_tuple(p.alpha, p.f));
            d["points"] = pts;
            return d;
        },
        py::arg("analyzer"), py::arg("grid") = 200);

    m.def(
        "survival_estimate",
        [](const SpaceModel& sp, double x, double gamma, double t,
           std::uint64_t trials, std::uint64_t seed, int threads) {
            const SurvivalEstimate e =
                survivalEstimate(sp, x, gamma, t, trials, seed, threads);
            py::dict d;
            d["observed"] = proportionDict(e.observed);
            d["theory"] = e.theory;
            d["trials"] = e.trials;
            return d;
        },
        py::arg("space"), py::arg("x"), py::arg("gamma"), py::arg("t"),
        py::arg("trials"), py::arg("seed") = 0, py::arg("threads") = 1);

    m.def(
        "covering_exponent",
        [](const SpaceModel& sp, double gamma, const std::vector<double>& scales,
           std::uint64_t trials, std::uint64_t seed, int threads) {
            const CoveringExponent c =
                estimateCoveringExponent(sp, gamma, scales, trials, seed, threads);
            py::dict d;
            d["det_slope"] = c.detSlope;
            d["stoch_slope"] = c.stochSlope;
            d["stoch_slope_se"] = c.stochSlopeSe;
            d["r2"] = c.r2;
            return d;
        },
        py::arg("space"), py::arg("gamma"), py::arg("scales"),
        py::arg("trials_per_scale"), py::arg("seed") = 0, py::arg("threads") = 1);

    m.def(
        "martingale_check",
        [](const SpaceModel& sp, double gamma, double t, std::uint64_t trials,
           std::uint64_t seed, int threads) {
            const MartingaleResult r =
                martingaleCheck(sp, gamma, t, trials, seed, threads);
            py::dict d;
            d["whole_mean"] = r.whole.mean;
            d["whole_se"] = r.whole.se;
            d["restricted_mean"] = r.restricted.mean;
            d["restricted_se"] = r.restricted.se;
            d["restricted_theory"] = r.restrictedTheory;
            return d;
        },
        py::arg("space"), py::arg("gamma"), py::arg("t"), py::arg("trials"),
        py::arg("seed") = 0, py::arg("threads") = 1);

    m.def(
        "gamma_sweep",
        [](const SpaceModel& sp, const std::vector<double>& gammas, double t,
           std::uint64_t trials, std::uint64_t seed, int threads) {
            py::list rows;
            for (const SweepRow& r :
                 gammaSweep(sp, gammas, t, trials, seed, threads)) {
                py::dict d;
                d["gamma"] = r.gamma;
                d["cell_survival_mean"] = r.cellSurvivalMean;
                d["extinct_fraction"] = r.extinctFraction;
                d["nested"] = r.nested;
                rows.append(d);
            }
            return rows;
        },
        py::arg("space"), py::arg("gammas"), py::arg("t"), py::arg("trials"),
        py::arg("seed") = 0, py::arg("threads") = 1);
}
