#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lattwave/calculus.hpp"
#include "lattwave/config.hpp"
#include "lattwave/energy.hpp"
#include "lattwave/experiments.hpp"
#include "lattwave/norms.hpp"
#include "lattwave/solvers.hpp"
#include "lattwave/spectral.hpp"
#include "lattwave/verify.hpp"

namespace py = pybind11;
using namespace lattwave;

namespace {

using carray = py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>;

// The box is implicit in the array shape: d axes of equal even length L.
LatticeBox box_from_shape(const carray& a) {
    int d = int(a.ndim());
    if (d < 1 || d > 3)
        throw std::invalid_argument("field arrays must have 1 to 3 axes");
    auto L = a.shape(0);
    for (int j = 1; j < d; ++j)
        if (a.shape(j) != L)
            throw std::invalid_argument("field arrays must have equal axis lengths");
    return make_box(d, int(L));
}

Field to_field(const carray& a) {
    Field f(box_from_shape(a));
    const std::complex<double>* src = a.data();
    std::copy(src, src + f.box.total, f.values.begin());
    return f;
}

carray from_field(const Field& f) {
    std::vector<py::ssize_t> shape(std::size_t(f.box.d), py::ssize_t(f.box.L));
    carray out(shape);
    std::copy(f.values.begin(), f.values.end(), out.mutable_data());
    return out;
}

const char* stop_name(StopReason s) {
    switch (s) {
        case StopReason::reached_t_max: return "reached_t_max";
        case StopReason::blowup: return "blowup";
        case StopReason::threshold: return "threshold";
    }
    return "unknown";
}

py::dict trajectory_dict(const Trajectory& traj, std::uint64_t config_hash) {
    const std::size_t n = traj.samples.size();
    auto series = [&](auto getter) {
        py::array_t<double> arr(std::vector<py::ssize_t>{py::ssize_t(n)});
        double* p = arr.mutable_data();
        for (std::size_t i = 0; i < n; ++i) p[i] = getter(traj.samples[i]);
        return arr;
    };
    py::dict out;
    out["t"] = series([](const TrajectorySample& s) { return s.t; });
    out["kinetic"] = series([](const TrajectorySample& s) { return s.energy.kinetic; });
    out["gradient"] = series([](const TrajectorySample& s) { return s.energy.gradient; });
    out["potential"] = series([](const TrajectorySample& s) { return s.energy.potential; });
    out["total"] = series([](const TrajectorySample& s) { return s.energy.total; });
    out["a_value"] = series([](const TrajectorySample& s) { return s.a_value; });
    out["sup_u"] = series([](const TrajectorySample& s) { return s.sup_u; });
    out["sup_ut"] = series([](const TrajectorySample& s) { return s.sup_ut; });
    out["seam_tail"] = series([](const TrajectorySample& s) { return s.seam_tail; });
    out["u"] = from_field(traj.final_state.u);
    out["ut"] = from_field(traj.final_state.ut);
    out["t_final"] = traj.final_state.t;
    out["completed"] = traj.completed;
    out["stop"] = stop_name(traj.stop);
    if (traj.blowup) {
        py::dict b;
        b["t"] = traj.blowup->t;
        b["sup_u"] = traj.blowup->sup_u;
        b["sup_ut"] = traj.blowup->sup_ut;
        b["halvings"] = traj.blowup->halvings;
        out["blowup"] = b;
    } else {
        out["blowup"] = py::none();
    }
    out["config"] = hex_u64(config_hash);
    return out;
}

py::dict scan_dict(const ScanResult& scan, std::uint64_t config_hash) {
    py::dict out;
    out["experiment"] = scan.experiment;
    out["columns"] = scan.columns;
    py::list rows;
    for (const ScanRow& r : scan.rows) {
        py::dict row;
        row["parameter"] = r.parameter;
        row["measured"] = r.measured;
        row["secondary"] = r.secondary;
        row["predicted"] = r.predicted;
        row["status"] = r.status;
        rows.append(row);
    }
    out["rows"] = rows;
    py::list fits;
    for (const ModelFit& f : scan.fits) {
        py::dict fit;
        fit["model"] = f.model;
        fit["K"] = f.K;
        fit["satisfied"] = f.satisfied;
        fits.append(fit);
    }
    out["fits"] = fits;
    out["config"] = hex_u64(config_hash);
    return out;
}

py::dict simulate_py(const std::string& config_text, std::optional<std::uint64_t> seed) {
    RunConfig cfg = parse_config_text(config_text, seed);
    if (cfg.experiment != "simulate" && cfg.experiment != "quadratic_demo")
        throw ConfigError("config error: experiment '" + cfg.experiment +
                          "' is not runnable with simulate (use scan)");
    auto [f, g] = realize_data(cfg);
    if (cfg.experiment == "quadratic_demo") {
        QuadraticDemoReport rep = faddeev_demo(f, g, cfg.solver);
        py::dict out = trajectory_dict(rep.trajectory, cfg.hash);
        out["residual"] = rep.residual;
        out["max_a"] = rep.max_a;
        return out;
    }
    Trajectory traj = evolve(f, g, cfg.equation, cfg.solver);
    return trajectory_dict(traj, cfg.hash);
}

py::dict scan_py(const std::string& config_text, std::optional<std::uint64_t> seed, int jobs) {
    RunConfig cfg = parse_config_text(config_text, seed);
    ScanResult scan;
    if (cfg.experiment == "lifespan") {
        DataFamily family = cfg.scan.family == "profile"
                                ? [&] {
                                      auto [f, g] = realize_data(cfg);
                                      return scaled_profile_family(f, g);
                                  }()
                                : blowup_trajectory_family(cfg.box, cfg.equation.forcing.p);
        scan = lifespan_scan_family(cfg.equation, family, cfg.eps_grid(), cfg.solver,
                                    cfg.scan.threshold_R, jobs);
    } else if (cfg.experiment == "dichotomy") {
        scan = counterexample_growth(cfg.scan.L_grid, cfg.box.d == 0 ? 1 : cfg.box.d);
    } else if (cfg.experiment == "isomorphism") {
        IsomorphismReport rep = isomorphism_check(cfg.seed, cfg.scan.trials, cfg.box.L, cfg.box.d);
        scan.experiment = "isomorphism";
        scan.columns = {"trial", "ratio", "min_ratio", "max_ratio"};
        for (std::size_t i = 0; i < rep.ratios.size(); ++i) {
            ScanRow row;
            row.parameter = double(i);
            row.measured = rep.ratios[i];
            row.secondary = rep.min_ratio;
            row.predicted = rep.max_ratio;
            scan.rows.push_back(row);
        }
        if (!rep.within_bounds)
            throw std::runtime_error("isomorphism ratios left the equivalence interval");
    } else {
        throw ConfigError("config error: experiment '" + cfg.experiment +
                          "' is not a scan (use simulate)");
    }
    return scan_dict(scan, cfg.hash);
}

py::list verify_py(const std::string& suite, std::uint64_t seed) {
    py::list out;
    for (const CheckResult& r : run_verify_suite(suite, seed)) {
        py::dict d;
        d["suite"] = r.suite;
        d["name"] = r.name;
        d["pass"] = r.pass;
        d["measured"] = r.measured;
        d["bound"] = r.bound;
        out.append(d);
    }
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "nonlocal derivative calculus and wave evolution on the discrete torus (Z/LZ)^d";
    m.attr("__version__") = "0.1.0";

    py::register_exception<ConfigError>(m, "ConfigError");

    m.def(
        "kernel_value", [](std::int64_t a) { return infinite_kernel_value(a); }, py::arg("a"),
        "value of the infinite-lattice derivative kernel -4i / (pi (4 a^2 - 1))");

    m.def(
        "periodized_kernel",
        [](int d, int L, int axis) {
            Kernel ker = kernel_periodized(make_box(d, L), axis);
            py::array_t<std::complex<double>> vals(
                std::vector<py::ssize_t>{py::ssize_t(ker.values.size())});
            std::copy(ker.values.begin(), ker.values.end(), vals.mutable_data());
            py::dict out;
            out["axis"] = ker.axis;
            out["values"] = vals;   // indexed by the unsigned offset a mod L
            out["tail_bound"] = ker.tail_bound;
            out["tail_terms"] = ker.tail_terms;
            return out;
        },
        py::arg("d"), py::arg("L"), py::arg("axis") = 1,
        "periodized kernel on (Z/LZ)^d with a rigorous per-entry error bound");

    m.def(
        "partial",
        [](const carray& a, int axis) {
            Field f = to_field(a);
            Kernel ker = kernel_periodized(f.box, axis);
            return from_field(conv_partial(f, axis, ker));
        },
        py::arg("field"), py::arg("axis") = 1,
        "nonlocal axis derivative by direct-space kernel convolution (axis is 1-based)");

    m.def(
        "partial_spectral",
        [](const carray& a, int axis) {
            Field f = to_field(a);
            return from_field(apply(partial_multiplier(f.box, axis), f));
        },
        py::arg("field"), py::arg("axis") = 1,
        "the same derivative through the Fourier multiplier 2i sin(pi n/L)");

    m.def(
        "laplacian",
        [](const carray& a) { return from_field(stencil_laplacian(to_field(a))); },
        py::arg("field"), "graph Laplacian (2d-point stencil, periodic)");

    m.def(
        "lp_alpha_norm",
        [](const carray& a, double p, double alpha) {
            return lp_alpha_norm(to_field(a), NormSpec{p, alpha});
        },
        py::arg("field"), py::arg("p") = 2.0, py::arg("alpha") = 0.0,
        "weighted norm ||f <m>^alpha||_{l^p}; p = inf takes the sup");

    m.def(
        "sobolev_seminorm",
        [](const carray& a, double p) { return sobolev_seminorm(to_field(a), p); },
        py::arg("field"), py::arg("p") = 2.0,
        "l^p norm of edge differences over the undirected torus graph");

    m.def(
        "weak_l11", [](const carray& a) { return weak_l11_functional(to_field(a)); },
        py::arg("field"), "sup_alpha alpha * #{k : |f(k)| >= alpha/<k>}");

    m.def(
        "h1_equivalence_ratio",
        [](const carray& a) { return h1_equivalence_ratio(to_field(a)); }, py::arg("field"),
        "||f||_{l^{2,1}} over the discrete H^1 comparison norm; lands in [1, sqrt(2)]");

    m.def(
        "energy",
        [](const carray& u, const carray& ut, double mu, double p) {
            WaveState s{to_field(u), to_field(ut), 0.0};
            require_same_box(s.u.box, s.ut.box, "energy");
            EnergyBreakdown e = nlw_energy(s, mu, p);
            py::dict d;
            d["kinetic"] = e.kinetic;
            d["gradient"] = e.gradient;
            d["potential"] = e.potential;
            d["total"] = e.total;
            return d;
        },
        py::arg("u"), py::arg("ut"), py::arg("mu") = 0.0, py::arg("p") = 3.0,
        "energy breakdown of a state; mu = 0 gives the linear (flat) energy");

    m.def(
        "evolve_linear",
        [](const carray& u, const carray& ut, double t) {
            WaveState s{to_field(u), to_field(ut), 0.0};
            require_same_box(s.u.box, s.ut.box, "evolve_linear");
            WaveState out = exact_linear_step(s, t);
            return py::make_tuple(from_field(out.u), from_field(out.ut));
        },
        py::arg("u"), py::arg("ut"), py::arg("t"),
        "exact free evolution to time t in one frequency-diagonal step; returns (u, ut)");

    m.def("simulate", &simulate_py, py::arg("config_text"), py::arg("seed") = py::none(),
          "run one evolution from a JSON config string; returns the sampled time series,\n"
          "the final state, and the blow-up record (or None)");

    m.def("scan", &scan_py, py::arg("config_text"), py::arg("seed") = py::none(),
          py::arg("jobs") = 1,
          "run a lifespan / dichotomy / isomorphism scan from a JSON config string");

    m.def("verify", &verify_py, py::arg("suite") = "all", py::arg("seed") = 20240901,
          "run an invariant suite; returns one dict per check");

    py::class_<BlowupReference>(m, "BlowupReference",
                                "spatially constant blow-up solution C_p (t0 - t)^{-2/(p-1)}")
        .def_readonly("p", &BlowupReference::p)
        .def_readonly("t0", &BlowupReference::t0)
        .def_readonly("Cp", &BlowupReference::Cp)
        .def_readonly("u0", &BlowupReference::u0)
        .def_readonly("ut0", &BlowupReference::ut0)
        .def("value", &BlowupReference::value, py::arg("t"))
        .def("derivative", &BlowupReference::derivative, py::arg("t"));

    m.def("blowup_reference", &blowup_reference, py::arg("p"), py::arg("t0"),
          "closed-form focusing blow-up trajectory of u'' = u^p");

    m.def(
        "load_snapshot",
        [](const std::string& path) { return from_field(lattwave::load_snapshot(path)); },
        py::arg("path"), "read a 'lattwave-field v1' snapshot into a complex array");

    m.def(
        "save_snapshot",
        [](const std::string& path, const carray& a) { lattwave::save_snapshot(path, to_field(a)); },
        py::arg("path"), py::arg("field"), "write a field as a 'lattwave-field v1' snapshot");
}
