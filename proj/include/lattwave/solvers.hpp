#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "lattwave/energy.hpp"
#include "lattwave/lattice.hpp"
#include "lattwave/spectral.hpp"

namespace lattwave {

enum class EquationKind { linear, semilinear, quasilinear };

enum class ForcingKind { none, power, dt_squared, dj_squared, custom };

// State-dependent right-hand side F(u, u') with F(0) = 0.
//   power:      mu |u|^{p-1} u
//   dt_squared: |du/dt|^2          (real-valued forcing)
//   dj_squared: |partial_axis u|^2 (real-valued forcing)
//   custom:     any smooth per-site function of (u, ut, axis derivatives)
struct Nonlinearity {
    ForcingKind kind = ForcingKind::none;
    double mu = 1.0;
    double p = 3.0;
    int axis = 1;
    std::function<cplx(cplx u, cplx ut, const std::array<cplx, 3>& du)> custom;

    static Nonlinearity none() { return {}; }
    static Nonlinearity power(double mu, double p) {
        Nonlinearity n;
        n.kind = ForcingKind::power;
        n.mu = mu;
        n.p = p;
        return n;
    }
    static Nonlinearity dt_squared() {
        Nonlinearity n;
        n.kind = ForcingKind::dt_squared;
        return n;
    }
    static Nonlinearity dj_squared(int axis) {
        Nonlinearity n;
        n.kind = ForcingKind::dj_squared;
        n.axis = axis;
        return n;
    }
};

// Pointwise symmetric coefficient matrix g^{jk}(u, u'); row-major 3x3, only
// the leading d x d block is read. Null means the identity metric.
using MetricFn = std::function<void(cplx u, cplx ut, const std::array<cplx, 3>& du,
                                    std::array<double, 9>& g)>;

MetricFn identity_metric();                 // explicit delta_jk (same as null)
MetricFn one_plus_u2_metric();              // g^{jk} = delta_jk (1 + |u|^2)

// du/dtt - g^{jk} (partial_j partial_k u) + b du/dt + b^j partial_j u + c u
//   = F(u, u') + S(t)
struct EquationSpec {
    EquationKind kind = EquationKind::linear;
    MetricFn metric;          // null => g^{jk} = delta_jk
    Nonlinearity forcing;
    double b = 0.0;
    std::array<double, 3> bj{0.0, 0.0, 0.0};
    double c = 0.0;
    std::function<Field(double)> source;   // prescribed forcing, may be null
};

enum class Method { exact_linear, exponential_duhamel, rk4, picard };

struct PicardConfig {
    int max_iters = 12;
    double tol = 1e-10;        // on sup_t C_m
    double window = 1.0;
    int max_window_halvings = 6;
};

struct BlowupConfig {
    double sup_threshold = 1e6;
    int max_halvings = 2;      // dt halvings allowed before declaring blow-up
};

struct SolverConfig {
    double dt = 1e-2;
    double t_max = 1.0;
    Method method = Method::rk4;
    PicardConfig picard;
    BlowupConfig blowup;
    int k = 0;                 // weight index for A(t)
    int sample_every = 1;
    bool keep_states = false;  // retain full states per sample (memory!)
    double stop_when_a_exceeds = 0.0;  // 0 disables the A(t) threshold stop
};

struct TrajectorySample {
    double t = 0.0;
    EnergyBreakdown energy;
    double a_value = 0.0;
    double sup_u = 0.0;
    double sup_ut = 0.0;
    double seam_tail = 0.0;
};

struct BlowUpRecord {
    double t = 0.0;         // estimated blow-up time (failing step's target)
    double sup_u = 0.0;     // witness norms from the last finite state
    double sup_ut = 0.0;
    int halvings = 0;
};

enum class StopReason { reached_t_max, blowup, threshold };

struct PicardDiagnostics {
    std::vector<double> sup_cm;   // sup_t C_m per iterate difference
    bool converged = false;
    int iterations = 0;
    double window = 0.0;          // window length actually used
    int window_halvings = 0;
    double residual = 0.0;        // centered-second-difference PDE residual, max l2 over nodes
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    WaveState final_state;
    std::optional<BlowUpRecord> blowup;
    StopReason stop = StopReason::reached_t_max;
    bool completed = false;                       // ran to t_max
    std::vector<WaveState> states;                // populated when keep_states
    std::vector<PicardDiagnostics> picard_windows;
};

struct PicardNonConvergence : std::runtime_error {
    PicardNonConvergence(const std::string& msg, std::vector<double> cm)
        : std::runtime_error(msg), sup_cm(std::move(cm)) {}
    std::vector<double> sup_cm;
};

// One step of the frequency-diagonal exact propagator; the optional source
// enters through Duhamel with Simpson quadrature at (t, t+dt/2, t+dt).
WaveState exact_linear_step(const WaveState& state, double dt,
                            const std::function<Field(double)>& source = nullptr);

// Classical RK4 on the first-order system (u, v = du/dt).
WaveState rk4_step(const WaveState& state, double dt, const EquationSpec& spec);

struct PicardResult {
    Trajectory trajectory;
    PicardDiagnostics diagnostics;
};

// Iteration for the quasilinear equation: solve the linear equation with
// coefficients and forcing frozen at the previous iterate (first iterate
// freezes at the zero state), advance with RK4, and repeat until
//   C_m = sup_t ( ||u_m - u_{m-1}||_{l^{2,k}} + ||d/dt(u_m - u_{m-1})||_{l^{2,k}} )
// drops below picard.tol. The window is halved and the iteration restarted
// whenever consecutive differences fail the contraction test C_{m+1} < C_m/2.
PicardResult picard_solve(const Field& f, const Field& g, const EquationSpec& spec,
                          const SolverConfig& config);

// Full evolution with sup-norm blow-up monitoring. Dispatch:
//   linear      -> exact propagator (or RK4 when config.method == rk4)
//   semilinear  -> RK4
//   quasilinear -> chained Picard windows
Trajectory evolve(const Field& f, const Field& g, const EquationSpec& spec,
                  const SolverConfig& config);

// The spatially constant blow-up solution u(t) = C_p (t0 - t)^{-2/(p-1)} of
// du/dtt = u^p, with C_p = (2(p+1)/(p-1)^2)^{1/(p-1)}.
struct BlowupReference {
    double p = 3.0;
    double t0 = 1.0;
    double Cp = 0.0;
    double u0 = 0.0;    // u(0)
    double ut0 = 0.0;   // du/dt(0)

    double value(double t) const;
    double derivative(double t) const;
};

BlowupReference blowup_reference(double p, double t0);

struct LipschitzReport {
    std::vector<double> deltas;   // ||(df, dg)||_A per perturbation
    std::vector<double> ratios;   // sup_t ||u_pert - u||_A / delta
    double max_ratio = 0.0;
    double stability = 0.0;       // max ratio / min ratio
};

// Data-to-solution Lipschitz probe: evolve the base data and each perturbed
// datum over the same window, report difference/perturbation ratios.
LipschitzReport lipschitz_dependence_probe(
    const Field& f, const Field& g,
    const std::vector<std::pair<Field, Field>>& perturbations,
    const EquationSpec& spec, const SolverConfig& config);

// a-norm of a state difference, shared by solver diagnostics
double state_diff_a_norm(const WaveState& a, const WaveState& b, int k);

// One-off evaluation of dv/dt at a state (the full nonlinear right-hand side).
Field equation_rhs(const WaveState& state, const EquationSpec& spec);

// max over interior nodes of || (u_{i+1} - 2u_i + u_{i-1}) / h^2 - rhs_i ||_{l^2}
// for a uniformly spaced stored trajectory; the direct check that a time
// series satisfies the equation to quadrature accuracy.
double trajectory_residual(const std::vector<WaveState>& states, const EquationSpec& spec);

} // namespace lattwave
