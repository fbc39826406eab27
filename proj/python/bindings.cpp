// Thin Python layer over the simulator: configs travel as INI text plus
// "section.key" overrides, traces come back as dicts of numpy arrays.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "reflectwave/analysis.hpp"
#include "reflectwave/config.hpp"
#include "reflectwave/io.hpp"
#include "reflectwave/line.hpp"
#include "reflectwave/motor.hpp"
#include "reflectwave/mrac.hpp"
#include "reflectwave/sim.hpp"

namespace py = pybind11;
using namespace reflectwave;

namespace {

Config build(const std::string& ini, const py::dict& overrides) {
    Config c = ini.empty() ? Config{} : parse_config(ini);
    for (auto item : overrides) {
        auto key = py::str(item.first).cast<std::string>();
        auto val = py::str(item.second).cast<std::string>();
        set_value(c, key, val);
    }
    return validate(c);
}

py::dict to_dict(const Trace& t) {
    py::dict d;
    const auto& names = Trace::columns();
    for (std::size_t k = 0; k < names.size(); ++k) {
        const auto& col = *t.column(k);
        d[py::str(names[k])] = py::array_t<double>(static_cast<py::ssize_t>(col.size()), col.data());
    }
    return d;
}

Trace from_dict(const py::dict& d) {
    Trace t;
    const auto& names = Trace::columns();
    for (std::size_t k = 0; k < names.size(); ++k) {
        auto a = py::array_t<double, py::array::c_style | py::array::forcecast>::ensure(d[py::str(names[k])]);
        if (!a || a.ndim() != 1) throw std::invalid_argument("column '" + names[k] + "' must be a 1-d array");
        t.column(k)->assign(a.data(), a.data() + a.size());
        if (t.column(k)->size() != t.t_s.size()) throw std::invalid_argument("columns differ in length");
    }
    return t;
}

py::dict metrics_dict(const Metrics& m) {
    py::dict d;
    d["peak_ratio"] = m.peak_ratio;
    d["ring_freq_hz"] = m.ring_freq_hz ? py::object(py::float_(*m.ring_freq_hz)) : py::object(py::none());
    d["branch_loss_w"] = m.branch_loss_w;
    d["branch_energy_j"] = m.branch_energy_j;
    d["settle_time_s"] = m.settle_time_s;
    d["clamp_count"] = m.clamp_count;
    return d;
}

LineKind parse_line(const std::string& s) {
    if (s == "bergeron") return LineKind::bergeron;
    if (s == "ladder") return LineKind::ladder;
    throw std::invalid_argument("line must be 'bergeron' or 'ladder'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "reflected-wave simulator core";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<CsvError>(m, "CsvError", PyExc_ValueError);
    py::register_exception<SimError>(m, "SimError", PyExc_RuntimeError);

    m.def("default_config", [] { return to_ini(validate(Config{})); }, "Default configuration as INI text.");
    m.def(
        "config",
        [](const std::string& ini, const py::dict& overrides) { return to_ini(build(ini, overrides)); },
        py::arg("ini") = "", py::arg("overrides") = py::dict(), "Validated configuration as INI text.");
    m.def(
        "derived",
        [](const std::string& ini, const py::dict& overrides) {
            Config c = build(ini, overrides);
            py::dict d;
            d["z0"] = c.derived.z0;
            d["tau"] = c.derived.tau;
            d["dt"] = c.derived.dt;
            d["f_ring"] = c.derived.f_ring;
            d["steps"] = c.derived.steps;
            d["delay_steps"] = c.derived.delay_steps;
            return d;
        },
        py::arg("ini") = "", py::arg("overrides") = py::dict());

    m.def(
        "simulate",
        [](const std::string& ini, const py::dict& overrides, const std::string& mode, const std::string& line,
           int segments) {
            Config c = build(ini, overrides);
            RunOptions opt{parse_mode(mode), parse_line(line), segments};
            Trace t;
            {
                py::gil_scoped_release nogil;
                t = run_to_end(c, opt);
            }
            return to_dict(t);
        },
        py::arg("ini") = "", py::arg("overrides") = py::dict(), py::arg("mode") = "adaptive",
        py::arg("line") = "bergeron", py::arg("ladder_segments") = 200, "Run one simulation; returns the trace columns.");

    m.def(
        "metrics",
        [](const py::dict& trace, const std::string& ini, const py::dict& overrides) {
            return metrics_dict(compute_metrics(from_dict(trace), build(ini, overrides)));
        },
        py::arg("trace"), py::arg("ini") = "", py::arg("overrides") = py::dict());

    m.def("read_trace", [](const std::string& path) { return to_dict(read_trace_csv(path)); });
    m.def("write_trace", [](const std::string& path, const py::dict& trace) { write_trace_csv(path, from_dict(trace)); });

    m.def(
        "z_eq",
        [](double d, double f, double r_b, double c_b) {
            BranchParams b;
            b.r_b = r_b;
            b.c_b = c_b;
            auto z = z_eq(d, f, b);
            return py::make_tuple(z.magnitude, z.phase);
        },
        py::arg("d"), py::arg("f"), py::arg("r_b") = BranchParams{}.r_b, py::arg("c_b") = BranchParams{}.c_b,
        "|Z_eq| and phase of the switched RC branch.");
    m.def(
        "surge_impedance",
        [](double l, double c) {
            CableParams p;
            p.l_per_m = l;
            p.c_per_m = c;
            return surge_impedance(p);
        },
        py::arg("l_per_m"), py::arg("c_per_m"));
    m.def("lyapunov", &lyapunov, py::arg("e"), py::arg("z_eq"), py::arg("i_hf"));
    m.def("columns", [] { return Trace::columns(); });
}
