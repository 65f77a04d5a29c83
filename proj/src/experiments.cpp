#include "lattwave/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "lattwave/norms.hpp"
#include "lattwave/spectral.hpp"

namespace lattwave {

namespace {

// index-parallel loop; first exception wins and is rethrown on the caller
void parallel_for_index(int jobs, std::size_t n, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::size_t nthreads = std::min<std::size_t>(std::size_t(jobs), n);
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace

DataFamily scaled_profile_family(const Field& f0, const Field& g0) {
    require_same_box(f0.box, g0.box, "scaled_profile_family");
    DataFamily fam;
    fam.name = "scaled-profile";
    fam.make = [f0, g0](double eps) {
        return std::make_pair(scale(f0, eps), scale(g0, eps));
    };
    return fam;
}

DataFamily blowup_trajectory_family(const LatticeBox& box, double p) {
    BlowupReference ref = blowup_reference(p, 1.0);  // only Cp is used here
    const double Cp = ref.Cp;
    const double q = 2.0 / (p - 1.0);
    const double sqrtN = std::sqrt(double(box.total));

    DataFamily fam;
    fam.name = "blowup-trajectory";
    fam.make = [box, Cp, q](double eps) {
        if (!(eps > 0.0)) throw std::invalid_argument("blowup_trajectory_family: eps must be > 0");
        double t0 = std::pow(Cp / eps, 1.0 / q);
        double u0 = Cp * std::pow(t0, -q);
        double ut0 = q * Cp * std::pow(t0, -q - 1.0);
        return std::make_pair(constant_field(box, cplx(u0, 0.0)),
                              constant_field(box, cplx(ut0, 0.0)));
    };
    fam.exact_tstar = [Cp, q, sqrtN](double eps, double R) {
        // A(t) = sqrt(N) * Cp * (tau^{-q} + q tau^{-q-1}), tau = t0 - t,
        // strictly decreasing in tau; bisect for the crossing A = R.
        double t0 = std::pow(Cp / eps, 1.0 / q);
        auto a_of_tau = [&](double tau) {
            return sqrtN * Cp * (std::pow(tau, -q) + q * std::pow(tau, -q - 1.0));
        };
        if (a_of_tau(t0) >= R) return 0.0;   // already above threshold at t=0
        double lo = 1e-12, hi = t0;          // a(lo) huge, a(hi) < R
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            (a_of_tau(mid) >= R ? lo : hi) = mid;
        }
        return t0 - 0.5 * (lo + hi);
    };
    return fam;
}

double threshold_crossing_time(const Trajectory& traj, double R) {
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const auto& s = traj.samples[i];
        if (s.a_value >= R) {
            if (i == 0) return s.t;
            const auto& prev = traj.samples[i - 1];
            double da = s.a_value - prev.a_value;
            if (da <= 0.0) return s.t;
            return prev.t + (R - prev.a_value) / da * (s.t - prev.t);
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

ScanResult lifespan_scan_family(const EquationSpec& spec, const DataFamily& family,
                                const std::vector<double>& eps_grid, const SolverConfig& config,
                                double threshold_R, int jobs) {
    if (eps_grid.empty()) throw std::invalid_argument("lifespan_scan: empty eps grid");
    for (std::size_t i = 0; i < eps_grid.size(); ++i) {
        if (!(eps_grid[i] > 0.0 && eps_grid[i] < 1.0))
            throw std::invalid_argument("lifespan_scan: eps values must lie in (0,1)");
        if (i > 0 && !(eps_grid[i] < eps_grid[i - 1]))
            throw std::invalid_argument("lifespan_scan: eps grid must be strictly decreasing");
    }
    if (!(threshold_R > 0.0))
        throw std::invalid_argument("lifespan_scan: threshold R must be positive");

    ScanResult scan;
    scan.experiment = "lifespan";
    scan.columns = {"eps", "t_star", "a_end", "t_star_exact"};
    scan.rows.resize(eps_grid.size());

    parallel_for_index(jobs, eps_grid.size(), [&](std::size_t i) {
        double eps = eps_grid[i];
        auto [f, g] = family.make(eps);
        SolverConfig cfg = config;
        cfg.stop_when_a_exceeds = threshold_R;
        Trajectory traj = evolve(f, g, spec, cfg);

        ScanRow row;
        row.parameter = eps;
        row.secondary = traj.samples.empty()
                            ? std::numeric_limits<double>::quiet_NaN()
                            : traj.samples.back().a_value;
        if (family.exact_tstar) row.predicted = family.exact_tstar(eps, threshold_R);
        switch (traj.stop) {
            case StopReason::threshold:
                row.measured = threshold_crossing_time(traj, threshold_R);
                row.status = "completed";
                break;
            case StopReason::blowup:
                row.measured = traj.blowup ? traj.blowup->t : traj.final_state.t;
                row.status = "blew-up";
                break;
            case StopReason::reached_t_max:
                row.measured = cfg.t_max;
                row.status = "hit-t_max";
                break;
        }
        scan.rows[i] = std::move(row);
    });

    // one-sided lower-bound fits; censored rows never enter
    double p_exp = spec.forcing.kind == ForcingKind::power ? spec.forcing.p : 3.0;
    double exponent = (p_exp - 1.0) / (p_exp + 1.0);
    struct Shape {
        const char* label;
        std::function<double(double)> h;   // of 1/eps
    };
    std::vector<Shape> shapes;
    shapes.push_back({"loglog", [](double x) { return std::log(std::log(x)); }});
    shapes.push_back({"sqrt-log", [](double x) { return std::sqrt(std::log(x)); }});
    shapes.push_back({"power", [exponent](double x) { return std::pow(x, exponent); }});
    for (const auto& shape : shapes) {
        ModelFit fit;
        fit.model = shape.label;
        double kmin = std::numeric_limits<double>::infinity();
        bool any = false;
        for (const auto& row : scan.rows) {
            if (row.status == "hit-t_max") continue;
            double h = shape.h(1.0 / row.parameter);
            if (!(h > 0.0)) continue;   // shape not meaningful at this eps
            kmin = std::min(kmin, row.measured / h);
            any = true;
        }
        fit.K = any ? kmin : 0.0;
        fit.satisfied = any && fit.K > 0.0;
        scan.fits.push_back(fit);
    }
    return scan;
}

ScanResult lifespan_scan(const EquationSpec& spec, const Field& f, const Field& g,
                         const std::vector<double>& eps_grid, const SolverConfig& config,
                         double threshold_R, int jobs) {
    return lifespan_scan_family(spec, scaled_profile_family(f, g), eps_grid, config,
                                threshold_R, jobs);
}

ScanResult counterexample_growth(const std::vector<int>& L_grid, int d) {
    if (L_grid.empty()) throw std::invalid_argument("counterexample_growth: empty L grid");
    for (std::size_t i = 0; i < L_grid.size(); ++i) {
        int L = L_grid[i];
        if (L < 4 || (L & (L - 1)) != 0)
            throw std::invalid_argument("counterexample_growth: L grid must be powers of two");
        if (i > 0 && L != 2 * L_grid[i - 1])
            throw std::invalid_argument("counterexample_growth: L grid must double at each step");
    }

    ScanResult scan;
    scan.experiment = "dichotomy";
    scan.columns = {"L", "strong_l11", "weak_l11", "unused"};
    for (int L : L_grid) {
        LatticeBox box = make_box(d, L);
        Field dd = apply(partial_multiplier(box, 1), delta_field(box));
        ScanRow row;
        row.parameter = double(L);
        row.measured = lp_alpha_norm(dd, NormSpec{1.0, 1.0});
        row.secondary = weak_l11_functional(dd);
        scan.rows.push_back(row);
    }
    for (std::size_t i = 1; i < scan.rows.size(); ++i)
        if (!(scan.rows[i].measured > scan.rows[i - 1].measured))
            throw std::runtime_error("counterexample_growth: strong norm failed to increase");
    double wmin = scan.rows[0].secondary, wmax = wmin;
    for (const auto& row : scan.rows) {
        wmin = std::min(wmin, row.secondary);
        wmax = std::max(wmax, row.secondary);
    }
    if (!(wmax / wmin < 1.5))
        throw std::runtime_error("counterexample_growth: weak functional left the 1.5 band");
    return scan;
}

double h1_equivalence_ratio(const Field& u) {
    const LatticeBox& box = u.box;
    double num2 = 0.0, den2 = 0.0;
    for (std::int64_t i = 0; i < box.total; ++i) {
        Coord m = site_coords(box, i);
        double m2 = 0.0;
        for (int j = 0; j < box.d; ++j) m2 += double(m[std::size_t(j)]) * double(m[std::size_t(j)]);
        double a2 = std::norm(u[i]);
        num2 += a2 * (1.0 + m2);
        den2 += a2 * std::max(1.0, m2);
    }
    if (den2 == 0.0) throw std::invalid_argument("h1_equivalence_ratio: zero field");
    return std::sqrt(num2 / den2);
}

IsomorphismReport isomorphism_check(std::uint64_t seed, int trials, int L, int d) {
    if (trials <= 0) throw std::invalid_argument("isomorphism_check: trials must be positive");
    LatticeBox box = make_box(d, L);
    Rng rng(seed);
    IsomorphismReport rep;
    rep.ratios.reserve(std::size_t(trials));
    for (int t = 0; t < trials; ++t) {
        SpectralField F(box);
        for (auto& c : F.coeffs) c = rng.cnormal();
        rep.ratios.push_back(h1_equivalence_ratio(dft_inverse(F)));
    }
    rep.min_ratio = *std::min_element(rep.ratios.begin(), rep.ratios.end());
    rep.max_ratio = *std::max_element(rep.ratios.begin(), rep.ratios.end());
    const double lo = 1.0 / std::sqrt(2.0) - 1e-9;
    const double hi = std::sqrt(2.0) + 1e-9;
    rep.within_bounds = rep.min_ratio >= lo && rep.max_ratio <= hi;
    return rep;
}

QuadraticDemoReport faddeev_demo(const Field& f, const Field& g, const SolverConfig& config) {
    EquationSpec spec;
    spec.kind = EquationKind::semilinear;
    spec.forcing = Nonlinearity::dt_squared();

    SolverConfig cfg = config;
    cfg.method = Method::rk4;
    cfg.keep_states = true;
    cfg.sample_every = 1;

    QuadraticDemoReport rep;
    rep.trajectory = evolve(f, g, spec, cfg);
    rep.completed = rep.trajectory.completed;
    for (const auto& s : rep.trajectory.samples) rep.max_a = std::max(rep.max_a, s.a_value);
    if (rep.completed && rep.trajectory.states.size() >= 3)
        rep.residual = trajectory_residual(rep.trajectory.states, spec);
    return rep;
}

namespace {

std::string row_field(double v) { return format_g17(v); }

// JSON has no NaN/Inf literals; non-finite values map to null
std::string json_num(double v) { return std::isfinite(v) ? format_g17(v) : "null"; }

} // namespace

void write_scan_csv(const std::string& path, const ScanResult& scan, std::uint64_t config_hash) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_scan_csv: cannot open " + path);
    os << "# config=" << hex_u64(config_hash) << "\n";
    const auto& c = scan.columns;
    os << c.at(0) << "," << c.at(1) << "," << c.at(2) << "," << c.at(3) << ",status\n";
    for (const auto& row : scan.rows)
        os << row_field(row.parameter) << "," << row_field(row.measured) << ","
           << row_field(row.secondary) << "," << row_field(row.predicted) << ","
           << row.status << "\n";
    if (!os) throw std::runtime_error("write_scan_csv: write failed for " + path);
}

void write_energy_csv(const std::string& path, const Trajectory& traj,
                      std::uint64_t config_hash) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_energy_csv: cannot open " + path);
    os << "# config=" << hex_u64(config_hash) << "\n";
    os << "t,kinetic,gradient,potential,total,A_k,sup_u,sup_ut,seam_tail\n";
    for (const auto& s : traj.samples)
        os << row_field(s.t) << "," << row_field(s.energy.kinetic) << ","
           << row_field(s.energy.gradient) << "," << row_field(s.energy.potential) << ","
           << row_field(s.energy.total) << "," << row_field(s.a_value) << ","
           << row_field(s.sup_u) << "," << row_field(s.sup_ut) << ","
           << row_field(s.seam_tail) << "\n";
    if (traj.blowup)
        os << "# blowup t=" << row_field(traj.blowup->t) << " sup_u=" << row_field(traj.blowup->sup_u)
           << " sup_ut=" << row_field(traj.blowup->sup_ut)
           << " halvings=" << traj.blowup->halvings << "\n";
    if (!os) throw std::runtime_error("write_energy_csv: write failed for " + path);
}

void write_scan_ndjson(const std::string& path, const ScanResult& scan,
                       std::uint64_t config_hash) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_scan_ndjson: cannot open " + path);
    os << "{\"experiment\":\"" << scan.experiment << "\",\"config\":\"" << hex_u64(config_hash)
       << "\",\"fits\":[";
    for (std::size_t i = 0; i < scan.fits.size(); ++i) {
        const auto& fit = scan.fits[i];
        os << (i ? "," : "") << "{\"model\":\"" << fit.model << "\",\"K\":" << json_num(fit.K)
           << ",\"satisfied\":" << (fit.satisfied ? "true" : "false") << "}";
    }
    os << "]}\n";
    for (const auto& row : scan.rows) {
        os << "{\"" << scan.columns.at(0) << "\":" << json_num(row.parameter) << ",\""
           << scan.columns.at(1) << "\":" << json_num(row.measured) << ",\""
           << scan.columns.at(2) << "\":" << json_num(row.secondary) << ",\""
           << scan.columns.at(3) << "\":" << json_num(row.predicted) << ",\"status\":\""
           << row.status << "\"}\n";
    }
    if (!os) throw std::runtime_error("write_scan_ndjson: write failed for " + path);
}

} // namespace lattwave
