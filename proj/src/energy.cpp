#include "lattwave/energy.hpp"

#include <cmath>

#include "lattwave/norms.hpp"
#include "lattwave/spectral.hpp"

namespace lattwave {

namespace {

double gradient_energy(const Field& u) {
    // Parseval: sum_j ||partial_j u||^2 = L^{-d} sum_n |2 sin(pi n_j/L)|^2 |u^(n)|^2
    SpectralField U = dft_forward(u);
    Multiplier lap = laplacian_multiplier(u.box);
    double acc = 0.0;
    for (std::size_t i = 0; i < U.coeffs.size(); ++i)
        acc += -lap.values[i].real() * std::norm(U.coeffs[i]);
    return 0.5 * acc / double(u.box.total);
}

} // namespace

EnergyBreakdown linear_energy(const WaveState& state) {
    EnergyBreakdown e;
    double kin = 0.0;
    for (const auto& v : state.ut.values) kin += std::norm(v);
    e.kinetic = 0.5 * kin;
    e.gradient = gradient_energy(state.u);
    e.potential = 0.0;
    e.total = e.kinetic + e.gradient;
    return e;
}

EnergyBreakdown nlw_energy(const WaveState& state, double mu, double p) {
    if (!(p > 1.0))
        throw std::invalid_argument("nlw_energy: p must be > 1");
    EnergyBreakdown e = linear_energy(state);
    double pot = 0.0;
    for (const auto& v : state.u.values) pot += std::pow(std::abs(v), p + 1.0);
    e.potential = -mu * pot / (p + 1.0);
    e.total = e.kinetic + e.gradient + e.potential;
    return e;
}

EnergyA energy_a(const WaveState& state, int k) {
    if (k != 0 && k != 1)
        throw std::invalid_argument("energy_a: weight index k must be 0 or 1");
    NormSpec spec{2.0, double(k)};
    return EnergyA{k, lp_alpha_norm(state.u, spec) + lp_alpha_norm(state.ut, spec)};
}

double trapezoid_integral(const TimeSeries& series, double t) {
    double acc = 0.0;
    for (std::size_t i = 1; i < series.size(); ++i) {
        double t0 = series[i - 1].first, t1 = series[i].first;
        if (t1 > t + 1e-15) break;
        acc += 0.5 * (t1 - t0) * (series[i - 1].second + series[i].second);
    }
    return acc;
}

double estimate_rhs_explicit(double f_norm, double g_norm,
                             const TimeSeries& forcing_norms, double t, int k) {
    double integral = trapezoid_integral(forcing_norms, t);
    return (1.0 + std::pow(std::abs(t), double(k + 1))) * (f_norm + g_norm + integral);
}

ImplicitBound estimate_rhs_implicit(double A0, const TimeSeries& forcing_norms,
                                    const TimeSeries& gjk_sup_norms, double t, double C) {
    ImplicitBound b;
    double coeff_integral = 0.0;
    for (std::size_t i = 1; i < gjk_sup_norms.size(); ++i) {
        double t0 = gjk_sup_norms[i - 1].first, t1 = gjk_sup_norms[i].first;
        if (t1 > t + 1e-15) break;
        coeff_integral += 0.5 * (t1 - t0) *
                          ((gjk_sup_norms[i - 1].second + 1.0) + (gjk_sup_norms[i].second + 1.0));
    }
    b.exp_factor = std::exp(C * coeff_integral);
    b.bound = (A0 + trapezoid_integral(forcing_norms, t)) * b.exp_factor;
    return b;
}

double fit_implicit_constant(const TimeSeries& a_series, double A0,
                             const TimeSeries& forcing_norms,
                             const TimeSeries& gjk_sup_norms, double C_hi) {
    auto holds = [&](double C) {
        for (const auto& [t, a] : a_series) {
            if (a > estimate_rhs_implicit(A0, forcing_norms, gjk_sup_norms, t, C).bound * (1.0 + 1e-12))
                return false;
        }
        return true;
    };
    if (!holds(C_hi))
        throw std::runtime_error("fit_implicit_constant: bound violated even at C = " +
                                 format_g17(C_hi));
    double lo = 0.0, hi = C_hi;
    if (holds(lo)) return 0.0;
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        (holds(mid) ? hi : lo) = mid;
    }
    return hi;
}

double fit_explicit_constant(const TimeSeries& a_series, double f_norm, double g_norm,
                             const TimeSeries& forcing_norms, int k) {
    double c = 0.0;
    for (const auto& [t, a] : a_series) {
        double rhs = estimate_rhs_explicit(f_norm, g_norm, forcing_norms, t, k);
        if (rhs > 0.0) c = std::max(c, a / rhs);
    }
    return c;
}

StrongEnergyReport strong_energy_check(const std::vector<WaveState>& trajectory,
                                       const TimeSeries& dalembertian_norms,
                                       double tolerance) {
    StrongEnergyReport rep;
    if (trajectory.empty()) {
        rep.ok = true;
        return rep;
    }
    auto uprime = [](const WaveState& s) {
        EnergyBreakdown e = linear_energy(s);
        return std::sqrt(2.0 * e.total);
    };
    const double base = uprime(trajectory.front());
    for (const auto& s : trajectory) {
        double lhs = uprime(s);
        double rhs = base + trapezoid_integral(dalembertian_norms, s.t);
        rep.t.push_back(s.t);
        rep.lhs.push_back(lhs);
        rep.rhs.push_back(rhs);
        rep.slack.push_back(rhs - lhs);
        rep.max_violation = std::max(rep.max_violation, lhs - rhs);
    }
    rep.max_violation = std::max(rep.max_violation, 0.0);
    rep.ok = rep.max_violation <= tolerance;
    return rep;
}

} // namespace lattwave
