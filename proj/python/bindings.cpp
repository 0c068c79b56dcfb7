#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "csstokes/alignment.hpp"
#include "csstokes/checks.hpp"
#include "csstokes/init.hpp"
#include "csstokes/io.hpp"
#include "csstokes/picard.hpp"
#include "csstokes/stokes.hpp"

namespace py = pybind11;
using namespace csstokes;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<Vec3> to_vec3(const Array& a, const char* what) {
    if (a.ndim() != 2 || a.shape(1) != 3) throw std::invalid_argument(std::string(what) + " must have shape (n, 3)");
    auto r = a.unchecked<2>();
    std::vector<Vec3> out(static_cast<std::size_t>(a.shape(0)));
    for (py::ssize_t i = 0; i < a.shape(0); ++i) out[i] = {r(i, 0), r(i, 1), r(i, 2)};
    return out;
}

Array from_vec3(std::span<const Vec3> v) {
    Array out({static_cast<py::ssize_t>(v.size()), py::ssize_t{3}});
    auto w = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < v.size(); ++i)
        for (int c = 0; c < 3; ++c) w(i, c) = v[i][c];
    return out;
}

Array from_vector(std::span<const double> v) {
    Array out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

ParticleEnsemble make_ensemble(double box_length, const Array& x, const Array& v, const Array& m) {
    auto w = m.unchecked<1>();
    std::vector<double> weights(static_cast<std::size_t>(m.shape(0)));
    for (py::ssize_t i = 0; i < m.shape(0); ++i) weights[i] = w(i);
    return ParticleEnsemble(box_length, to_vec3(x, "positions"), to_vec3(v, "velocities"), std::move(weights));
}

py::dict ensemble_dict(const ParticleEnsemble& e) {
    py::dict d;
    d["positions"] = from_vec3(e.positions());
    d["velocities"] = from_vec3(e.velocities());
    d["weights"] = from_vector(e.weights());
    d["box_length"] = e.box_length();
    d["initial_support_radius"] = e.initial_support_radius();
    return d;
}

// Time series as {column: array}, matching the CSV header.
py::dict records_dict(const std::vector<DiagnosticsRecord>& records) {
    const auto& cols = timeseries_columns();
    std::vector<std::vector<double>> data(cols.size());
    for (const auto& r : records) {
        const double row[] = {r.time,           r.mass,          r.momentum.x,          r.momentum.y,
                              r.momentum.z,     r.energy_particles, r.energy_fluid,     r.dissipation_viscous,
                              r.dissipation_drag, r.dissipation_alignment, r.support_radius, r.support_bound,
                              r.moment2,        r.moment3,       r.moment6,             r.velocity_variance,
                              static_cast<double>(r.picard_iters)};
        for (std::size_t c = 0; c < cols.size(); ++c) data[c].push_back(row[c]);
    }
    py::dict d;
    for (std::size_t c = 0; c < cols.size(); ++c) d[py::str(cols[c])] = from_vector(data[c]);
    return d;
}

KernelSpec kernel_from(const std::string& family, double c) {
    if (family == "rational_decay") return {KernelFamily::rational_decay, c};
    if (family == "constant") return {KernelFamily::constant, c};
    throw std::invalid_argument("kernel family must be 'rational_decay' or 'constant'");
}

CouplingMode mode_from(const std::string& s) {
    for (auto m : {CouplingMode::pure_kinetic, CouplingMode::frozen_fluid, CouplingMode::full_coupling})
        if (to_string(m) == s) return m;
    throw std::invalid_argument("mode must be pure_kinetic, frozen_fluid or full_coupling");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Kinetic Cucker-Smale particles coupled to Stokes flow on a periodic box.";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<SimulationAbort>(m, "SimulationAbort", PyExc_RuntimeError);

    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("box_length", &SimConfig::box_length)
        .def_readwrite("grid_n", &SimConfig::grid_n)
        .def_readwrite("n_particles", &SimConfig::particle_count)
        .def_readwrite("dt", &SimConfig::dt)
        .def_readwrite("t_end", &SimConfig::t_end)
        .def_readwrite("picard_tol", &SimConfig::picard_tol)
        .def_readwrite("picard_max_iter", &SimConfig::picard_max_iter)
        .def_readwrite("output_every", &SimConfig::output_every)
        .def_readwrite("seed", &SimConfig::rng_seed)
        .def_readwrite("init_particles", &SimConfig::init_particles)
        .def_readwrite("init_fluid", &SimConfig::init_fluid)
        .def_readwrite("q", &SimConfig::q)
        .def_property(
            "mode", [](const SimConfig& c) { return to_string(c.mode); },
            [](SimConfig& c, const std::string& s) { c.mode = mode_from(s); })
        .def_property(
            "kernel", [](const SimConfig& c) { return py::make_tuple(to_string(c.kernel.family), c.kernel.c); },
            [](SimConfig& c, const py::tuple& t) { c.kernel = kernel_from(t[0].cast<std::string>(), t[1].cast<double>()); })
        .def("validate", &SimConfig::validate)
        .def("echo", [](const SimConfig& c) { return config_echo(c); })
        .def("__eq__", [](const SimConfig& a, const SimConfig& b) { return a == b; })
        .def("__repr__", [](const SimConfig& c) { return "<SimConfig\n" + config_echo(c) + ">"; });

    m.def("parse_config", [](const std::string& text) { return parse_config_text(text, "<string>"); }, py::arg("text"),
          "Parse `key = value` config text.");
    m.def("load_config", [](const std::string& path) { return parse_config(path); }, py::arg("path"));

    m.def("init_ensemble", [](const SimConfig& c) { return ensemble_dict(init_ensemble(c)); }, py::arg("config"),
          "Sample the initial particles: dict of positions, velocities, weights.");

    m.def(
        "compute_fields",
        [](double box_length, const Array& x, const Array& v, const Array& w, const std::string& family, double c) {
            const ParticleEnsemble e = make_ensemble(box_length, x, v, w);
            const AlignmentFields f = compute_fields(e, kernel_from(family, c));
            return py::make_tuple(from_vector(f.a), from_vec3(f.b));
        },
        py::arg("box_length"), py::arg("positions"), py::arg("velocities"), py::arg("weights"),
        py::arg("family") = "rational_decay", py::arg("c") = 1.0, "Kernel-weighted local mass a and momentum b.");

    m.def(
        "alignment_force",
        [](double box_length, const Array& x, const Array& v, const Array& w, const std::string& family, double c) {
            const ParticleEnsemble e = make_ensemble(box_length, x, v, w);
            return from_vec3(alignment_force(compute_fields(e, kernel_from(family, c)), e.velocities()));
        },
        py::arg("box_length"), py::arg("positions"), py::arg("velocities"), py::arg("weights"),
        py::arg("family") = "rational_decay", py::arg("c") = 1.0, "L_i = b_i - a_i V_i.");

    m.def(
        "leray_project",
        [](const std::array<double, 3>& k, const std::array<std::complex<double>, 3>& g) {
            return leray_project({k[0], k[1], k[2]}, g);
        },
        py::arg("k"), py::arg("g"), "Divergence-free part of one Fourier mode.");

    m.def(
        "run",
        [](const SimConfig& c, bool with_state, std::optional<std::string> checkpoint) {
            RunOptions opts;
            opts.keep_step_reports = false;
            opts.checkpoint_path = std::move(checkpoint);
            RunResult r;
            {
                py::gil_scoped_release release;
                r = run(c, opts);
            }
            py::dict out;
            out["records"] = records_dict(r.records);
            if (with_state) out["state"] = ensemble_dict(r.final_state.state.ensemble);
            return out;
        },
        py::arg("config"), py::arg("with_state") = false, py::arg("checkpoint") = py::none(), "Simulate to t_end; returns the time series columns.");

    m.def(
        "check",
        [](const SimConfig& c, bool refine, bool scan) {
            CheckOptions opts;
            opts.refine = refine;
            opts.scan_dt_star = scan;
            CheckReport r;
            {
                py::gil_scoped_release release;
                r = check_config(c, opts);
            }
            py::list rows;
            for (const auto& row : r.rows) {
                py::dict d;
                d["name"] = row.name;
                d["passed"] = row.passed;
                d["applicable"] = row.applicable;
                d["detail"] = row.detail;
                rows.append(d);
            }
            return rows;
        },
        py::arg("config"), py::arg("refine") = true, py::arg("scan_dt_star") = false, "Invariant table rows.");

    m.def("read_checkpoint", [](const std::string& path) {
        RunState s;
        const CheckpointData d = read_checkpoint(path, s);
        py::dict out = ensemble_dict(s.state.ensemble);
        out["step"] = d.step;
        out["time"] = d.time;
        out["grid_n"] = d.grid_n;
        out["config"] = d.config;
        return out;
    });

    m.def("weighted_norm", [](double box_length, const Array& x, const Array& v, const Array& w, int bins, double alpha, double gamma) {
        const WeightedNormEstimate est = weighted_norm_surrogate(make_ensemble(box_length, x, v, w), WeightSpec{alpha, gamma}, bins);
        py::dict d;
        d["value"] = est.value;
        d["squared"] = est.squared;
        d["squared_distinct_pairs"] = est.squared_distinct_pairs;
        d["bins_per_axis"] = est.bins_per_axis;
        d["sparse_warning"] = est.sparse_warning;
        return d;
    }, py::arg("box_length"), py::arg("positions"), py::arg("velocities"), py::arg("weights"), py::arg("bins"),
       py::arg("alpha") = 1.5, py::arg("gamma") = 1.5);

    m.attr("timeseries_columns") = timeseries_columns();
    m.attr("__version__") = version_string();
}
