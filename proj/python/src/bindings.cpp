#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hdrest/density.hpp"
#include "hdrest/errors.hpp"
#include "hdrest/hdr.hpp"
#include "hdrest/io.hpp"
#include "hdrest/metrics.hpp"
#include "hdrest/mixture.hpp"

namespace py = pybind11;
using namespace hdrest;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

PointSet to_points(const Array& a) {
    if (a.ndim() != 2 || a.shape(1) != 2) throw InvalidArgument("expected an (n, 2) array of points");
    const auto v = a.unchecked<2>();
    PointSet p(static_cast<std::size_t>(a.shape(0)));
    for (py::ssize_t i = 0; i < a.shape(0); ++i) p[i] = {v(i, 0), v(i, 1)};
    return p;
}

Array to_array(const PointSet& p) {
    Array a({static_cast<py::ssize_t>(p.size()), py::ssize_t{2}});
    auto v = a.mutable_unchecked<2>();
    for (std::size_t i = 0; i < p.size(); ++i) {
        v(i, 0) = p[i].x;
        v(i, 1) = p[i].y;
    }
    return a;
}

py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

struct Estimate {
    hdr::HdrEstimate e;
};

}  // namespace

PYBIND11_MODULE(_hdrest, m) {
    m.doc() = "Highest density region estimation in the plane";

    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

    py::class_<Estimate>(m, "Estimate")
        .def_property_readonly("method", [](const Estimate& s) { return s.e.method; })
        .def_property_readonly("status", [](const Estimate& s) { return std::string(hdr::status_name(s.e.status)); })
        .def_property_readonly("converged", [](const Estimate& s) { return s.e.converged(); })
        .def_property_readonly("tau", [](const Estimate& s) { return s.e.tau; })
        .def_property_readonly("tau_bar", [](const Estimate& s) { return s.e.tau_bar; })
        .def_property_readonly("coverage", [](const Estimate& s) { return s.e.coverage; })
        .def_property_readonly("radius", [](const Estimate& s) { return s.e.radius; })
        .def_property_readonly("components", [](const Estimate& s) { return s.e.component_count(); })
        .def(
            "contains",
            [](const Estimate& s, const Array& q) {
                const auto pts = to_points(q);
                py::array_t<bool> out(static_cast<py::ssize_t>(pts.size()));
                auto o = out.mutable_unchecked<1>();
                for (std::size_t i = 0; i < pts.size(); ++i) o(i) = s.e.region.contains(pts[i]);
                return out;
            },
            py::arg("points"))
        .def(
            "boundary", [](const Estimate& s, double spacing) { return to_array(s.e.region.boundary_sample(spacing)); },
            py::arg("spacing") = 0.01)
        .def("to_dict", [](const Estimate& s) { return to_py(io::estimate_to_json(s.e)); });

    m.def(
        "hybrid",
        [](const Array& points, double tau, std::size_t B, double p, double step, double nu, std::uint64_t seed,
           bool refit) {
            hdr::HybridConfig c;
            c.tau = tau;
            c.B = B;
            c.p = p;
            c.step = step;
            c.nu = nu;
            c.seed = seed;
            c.refit_bootstrap = refit;
            const auto pts = to_points(points);
            py::gil_scoped_release nogil;
            return Estimate{hdr::hybrid_hdr(pts, c)};
        },
        py::arg("points"), py::arg("tau") = 0.5, py::arg("B") = 250, py::arg("p") = 0.25, py::arg("step") = 0.025,
        py::arg("nu") = 1.0, py::arg("seed") = 1, py::arg("refit") = true);

    m.def(
        "plugin",
        [](const Array& points, double tau, const std::string& selector) {
            const auto pts = to_points(points);
            const auto s = density::parse_selector(selector);
            py::gil_scoped_release nogil;
            return Estimate{hdr::plugin_hdr(pts, tau, s)};
        },
        py::arg("points"), py::arg("tau") = 0.5, py::arg("selector") = "plugin");

    m.def(
        "bandwidth",
        [](const Array& points, const std::string& selector) {
            const auto h = density::select_bandwidth(to_points(points), density::parse_selector(selector));
            return py::make_tuple(h.h11, h.h12, h.h22);
        },
        py::arg("points"), py::arg("selector") = "plugin");

    m.def(
        "sample",
        [](int model, std::size_t n, std::uint64_t seed) {
            return to_array(simbench::mixture_sample(simbench::model(model), n, seed));
        },
        py::arg("model"), py::arg("n"), py::arg("seed"));

    m.def(
        "hausdorff", [](const Array& a, const Array& b) { return metrics::hausdorff(to_points(a), to_points(b)); },
        py::arg("a"), py::arg("b"));
}
