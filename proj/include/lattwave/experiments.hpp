#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "lattwave/lattice.hpp"
#include "lattwave/solvers.hpp"

namespace lattwave {

// One grid point of a parameter scan. "secondary" and "predicted" are
// experiment-specific extras (NaN when absent); see ScanResult::columns.
struct ScanRow {
    double parameter = 0.0;
    double measured = 0.0;
    double secondary = std::numeric_limits<double>::quiet_NaN();
    double predicted = std::numeric_limits<double>::quiet_NaN();
    std::string status = "completed";   // completed | blew-up | hit-t_max
};

// One-sided lower-bound fit T* >= K * shape(1/eps). K is the largest
// constant satisfying the bound on every non-censored row (min of ratios).
struct ModelFit {
    std::string model;        // loglog | sqrt-log | power
    double K = 0.0;
    bool satisfied = false;   // K > 0 over the fitted rows
};

struct ScanResult {
    std::string experiment;
    std::vector<ScanRow> rows;
    std::vector<ModelFit> fits;
    std::vector<std::string> columns;   // names of the four numeric columns
};

// Family of initial data indexed by the size parameter eps.
struct DataFamily {
    std::string name;
    std::function<std::pair<Field, Field>(double eps)> make;
    // closed-form time at which A(t) reaches R, when one exists (else null)
    std::function<double(double eps, double R)> exact_tstar;
};

// (eps * f0, eps * g0): the plain scaling family; no closed-form lifespan.
DataFamily scaled_profile_family(const Field& f0, const Field& g0);

// Spatially constant data placed exactly on the closed-form blow-up
// trajectory u(t) = C_p (t0 - t)^{-2/(p-1)} with u(0) = eps, so the lattice
// solution is the ODE solution and the A(t) = R crossing has a closed form.
DataFamily blowup_trajectory_family(const LatticeBox& box, double p);

// For each eps (grid decreasing, all < 1): evolve the family data until
// A(t) > threshold_R, blow-up, or t_max; record the crossing time T*(eps)
// (linear interpolation between samples). Rows that hit t_max are censored
// and excluded from fits. jobs > 1 fans rows across a thread pool; the merge
// is by grid index, so results are identical for any job count.
ScanResult lifespan_scan_family(const EquationSpec& spec, const DataFamily& family,
                                const std::vector<double>& eps_grid, const SolverConfig& config,
                                double threshold_R, int jobs = 1);

// Same with the plain scaling family (eps f, eps g).
ScanResult lifespan_scan(const EquationSpec& spec, const Field& f, const Field& g,
                         const std::vector<double>& eps_grid, const SolverConfig& config,
                         double threshold_R, int jobs = 1);

// Rows (L, ||d_1 delta_0||_{l^{1,1}}, weak functional of the same field).
// Enforces the dichotomy: the strong norm strictly increases at every
// doubling while the weak functional stays in a factor-1.5 band.
ScanResult counterexample_growth(const std::vector<int>& L_grid, int d = 1);

// ||u||_{l^{2,1}} / (sum |u(m)|^2 max(1,|m|)^2)^{1/2} with signed site
// coordinates: the norm-equivalence ratio, always inside [1, sqrt(2)];
// 1 exactly for mass at m=0, sqrt(2) exactly for a single site with |m| = 1.
double h1_equivalence_ratio(const Field& u);

struct IsomorphismReport {
    std::vector<double> ratios;
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    bool within_bounds = false;   // [1/sqrt(2) - 1e-9, sqrt(2) + 1e-9]
};

// Random spectral data, inverse transform, equivalence ratio per trial.
IsomorphismReport isomorphism_check(std::uint64_t seed, int trials, int L, int d);

struct QuadraticDemoReport {
    Trajectory trajectory;
    double residual = 0.0;    // centered-second-difference PDE residual
    double max_a = 0.0;       // sup over samples of A_k(t)
    bool completed = false;
};

// Local-in-time run with the quadratic derivative forcing |du/dt|^2 (small
// data): evolve over the window, check the PDE residual on the stored grid,
// report boundedness of A_k. Blow-up inside the window is reported, not thrown.
QuadraticDemoReport faddeev_demo(const Field& f, const Field& g, const SolverConfig& config);

// First sample time with A(t) >= R, linearly interpolated between the
// bracketing samples; NaN when the trajectory never reaches R.
double threshold_crossing_time(const Trajectory& traj, double R);

// CSV: "# config=<hex>", header from ScanResult::columns + "status", rows
// with 17 significant digits. NDJSON: meta line (experiment, hash, fits),
// then one object per row. Both byte-deterministic.
void write_scan_csv(const std::string& path, const ScanResult& scan, std::uint64_t config_hash);
void write_scan_ndjson(const std::string& path, const ScanResult& scan, std::uint64_t config_hash);

// Trajectory time series: "# config=<hex>" then
// t,kinetic,gradient,potential,total,A_k,sup_u,sup_ut,seam_tail per sample;
// a trailing "# blowup ..." comment flags a halted run.
void write_energy_csv(const std::string& path, const Trajectory& traj, std::uint64_t config_hash);

} // namespace lattwave
