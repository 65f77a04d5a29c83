#pragma once

#include <utility>
#include <vector>

#include "lattwave/lattice.hpp"

namespace lattwave {

struct EnergyBreakdown {
    double kinetic = 0.0;    // (1/2) sum |du/dt|^2
    double gradient = 0.0;   // (1/2) sum_j ||axis-derivative_j u||^2
    double potential = 0.0;  // -mu * sum |u|^{p+1} / (p+1); zero for linear runs
    double total = 0.0;
};

EnergyBreakdown linear_energy(const WaveState& state);
EnergyBreakdown nlw_energy(const WaveState& state, double mu, double p);

struct EnergyA {
    int k = 0;
    double value = 0.0;   // ||u||_{l^{2,k}} + ||du/dt||_{l^{2,k}}
};

EnergyA energy_a(const WaveState& state, int k);

// Sampled scalar time series (t_i, value_i), t_i increasing.
using TimeSeries = std::vector<std::pair<double, double>>;

double trapezoid_integral(const TimeSeries& series, double t);

// (1 + |t|^{k+1}) * (||f|| + ||g|| + integral_0^t ||forcing||), the explicit
// time-dependence bound for the flat-coefficient equation.
double estimate_rhs_explicit(double f_norm, double g_norm,
                             const TimeSeries& forcing_norms, double t, int k);

struct ImplicitBound {
    double bound = 0.0;
    double exp_factor = 1.0;  // the exponential part, exposed for diagnostics
};

// (A0 + integral ||box_g u||) * exp(C * integral (sum_jk ||g^jk||_inf + 1)),
// the variable-coefficient energy bound. C is caller-supplied; the smallest
// working value can be obtained from fit_implicit_constant.
ImplicitBound estimate_rhs_implicit(double A0, const TimeSeries& forcing_norms,
                                    const TimeSeries& gjk_sup_norms, double t, double C);

// Smallest C >= 0 such that A(t_i) <= implicit bound for every sample;
// bisection on the monotone dependence. Throws if even C_hi fails.
double fit_implicit_constant(const TimeSeries& a_series, double A0,
                             const TimeSeries& forcing_norms,
                             const TimeSeries& gjk_sup_norms, double C_hi = 64.0);

// Smallest C with A(t_i) <= C * explicit bound (a plain max of ratios).
double fit_explicit_constant(const TimeSeries& a_series, double f_norm, double g_norm,
                             const TimeSeries& forcing_norms, int k);

// ||u'(t)|| <= ||u'(0)|| + integral ||dalembertian u|| with constant exactly
// one, where u' = (du/dt, axis derivatives) is assembled spectrally, so
// ||u'||^2 = 2 * E_disc.
struct StrongEnergyReport {
    std::vector<double> t;
    std::vector<double> lhs;     // ||u'(t)||
    std::vector<double> rhs;     // ||u'(0)|| + integral of forcing norm
    std::vector<double> slack;   // rhs - lhs
    double max_violation = 0.0;  // max(0, lhs - rhs) over samples
    bool ok = false;             // max_violation <= tolerance used by caller
};

StrongEnergyReport strong_energy_check(const std::vector<WaveState>& trajectory,
                                       const TimeSeries& dalembertian_norms,
                                       double tolerance = 1e-6);

} // namespace lattwave
