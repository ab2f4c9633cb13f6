#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "triquad/arch.hpp"
#include "triquad/circle.hpp"
#include "triquad/expsum.hpp"
#include "triquad/modcount.hpp"
#include "triquad/quadsys.hpp"

namespace py = pybind11;
using namespace triquad;

namespace {

std::array<i64, 3> to_n(const std::vector<i64>& v) {
    if (v.size() != 3) throw input_error("n must have exactly three entries");
    return {v[0], v[1], v[2]};
}

std::array<double, 3> to_d3(const std::vector<double>& v) {
    if (v.size() != 3) throw input_error("expected exactly three entries");
    return {v[0], v[1], v[2]};
}

}  // namespace

PYBIND11_MODULE(_triquad, m) {
    m.doc() = "systems of three integral quadratic forms: certification, local "
              "counting, exponential sums, fiber integrals, forecasts";

    py::register_exception<input_error>(m, "InputError", PyExc_ValueError);
    py::register_exception<budget_error>(m, "BudgetError", PyExc_RuntimeError);

    py::class_<TripleSystem>(m, "System")
        .def_readonly("k", &TripleSystem::k)
        .def("to_json", &TripleSystem::to_json)
        .def("eval", [](const TripleSystem& s, const std::vector<i64>& x) {
            auto v = s.eval(x);
            return std::vector<i64>{v[0], v[1], v[2]};
        })
        .def("__repr__", [](const TripleSystem& s) {
            return "<triquad.System k=" + std::to_string(s.k) + ">";
        });

    m.def("load_system", &load_system, py::arg("json_text"));
    m.def("random_certified_system", &random_certified_system, py::arg("k"), py::arg("seed"),
          py::arg("tries") = 64, py::arg("lim") = RunLimits{});

    m.def(
        "certify",
        [](const TripleSystem& sys, const std::string& mode) {
            CertifyMode cm;
            if (mode == "fast")
                cm = CertifyMode::FastModular;
            else if (mode == "exact")
                cm = CertifyMode::ExactLong;
            else
                throw input_error("mode must be 'fast' or 'exact'");
            return certify_cond2(sys, cm).to_json();
        },
        py::arg("system"), py::arg("mode") = "fast",
        py::call_guard<py::gil_scoped_release>());

    m.def(
        "classify",
        [](const TripleSystem& sys, u64 p, const std::vector<i64>& n, int ext) {
            return classify_prime(sys, p, to_n(n), ext).to_json();
        },
        py::arg("system"), py::arg("p"), py::arg("n"), py::arg("ext") = 2,
        py::call_guard<py::gil_scoped_release>());

    m.def(
        "count",
        [](const TripleSystem& sys, const std::vector<i64>& n, u64 q) {
            return count_N(sys, to_n(n), q).get_str();
        },
        py::arg("system"), py::arg("n"), py::arg("q"),
        py::call_guard<py::gil_scoped_release>());

    m.def(
        "tsum",
        [](const TripleSystem& sys, const std::vector<i64>& n, u64 q) {
            return T_from_counts(sys, to_n(n), q).get_str();
        },
        py::arg("system"), py::arg("n"), py::arg("q"),
        py::call_guard<py::gil_scoped_release>());

    m.def(
        "sum_all",
        [](const TripleSystem& sys, const std::vector<i64>& n, u64 q) {
            return sum_all_Sq(sys, to_n(n), q).get_str();
        },
        py::arg("system"), py::arg("n"), py::arg("q"),
        py::call_guard<py::gil_scoped_release>());

    m.def(
        "singular_series",
        [](const TripleSystem& sys, const std::vector<i64>& n, u64 qmax) {
            SeriesResult s = singular_series(sys, to_n(n), qmax);
            py::gil_scoped_acquire gil;
            py::dict d;
            d["value"] = s.value;
            d["tail"] = s.tail;
            d["soluble"] = s.soluble;
            d["lift_verified"] = s.lift_verified;
            d["note"] = s.note;
            py::list sig;
            for (auto& [p, v] : s.sigma) sig.append(py::make_tuple(p, v));
            d["sigma"] = std::move(sig);
            return d;
        },
        py::arg("system"), py::arg("n"), py::arg("qmax") = 60,
        py::call_guard<py::gil_scoped_release>());

    m.def(
        "jint",
        [](const TripleSystem& sys, const std::vector<double>& mu, double R, double C) {
            return jint(sys, transform_cache(C), to_d3(mu), R);
        },
        py::arg("system"), py::arg("mu"), py::arg("R") = 32.0, py::arg("C") = 1.0,
        py::call_guard<py::gil_scoped_release>());

    m.def(
        "predict",
        [](const TripleSystem& sys, const std::vector<i64>& n, double B, u64 qmax, double R,
           double C) {
            return predict(sys, to_n(n), B, qmax, R, Weight::radial(C)).to_json();
        },
        py::arg("system"), py::arg("n"), py::arg("B"), py::arg("qmax") = 60,
        py::arg("R") = 32.0, py::arg("C") = 1.0,
        py::call_guard<py::gil_scoped_release>());

    m.def(
        "count_reps",
        [](const TripleSystem& sys, double B, double C) {
            return count_reps(sys, B, Weight::radial(C)).to_json();
        },
        py::arg("system"), py::arg("B"), py::arg("C") = 1.0,
        py::call_guard<py::gil_scoped_release>());

    m.attr("__version__") = "0.1.0";
}
