#include "lattwave/verify.hpp"

#include <cmath>
#include <stdexcept>

#include "lattwave/calculus.hpp"
#include "lattwave/energy.hpp"
#include "lattwave/experiments.hpp"
#include "lattwave/lattice.hpp"
#include "lattwave/norms.hpp"
#include "lattwave/solvers.hpp"
#include "lattwave/spectral.hpp"

namespace lattwave {

namespace {

Field random_field(const LatticeBox& box, Rng& rng) {
    Field f(box);
    for (auto& v : f.values) v = rng.cnormal();
    return f;
}

void add_check(std::vector<CheckResult>& out, const std::string& suite, const std::string& name,
               double measured, double bound) {
    out.push_back({suite, name, measured <= bound, measured, bound});
}

void suite_identities(std::vector<CheckResult>& out, std::uint64_t seed) {
    Rng rng(seed);
    const std::string suite = "identities";

    double conv_worst = 0.0;
    for (int d = 1; d <= 3; ++d) {
        LatticeBox box = make_box(d, d == 3 ? 8 : 16);
        for (int axis = 1; axis <= d; ++axis) {
            Kernel ker = kernel_periodized(box, axis);
            Multiplier mult = partial_multiplier(box, axis);
            for (int trial = 0; trial < 3; ++trial) {
                Field f = random_field(box, rng);
                Field a = conv_partial(f, axis, ker);
                Field b = apply(mult, f);
                conv_worst = std::max(conv_worst, sup_abs(sub(a, b)));
            }
        }
    }
    add_check(out, suite, "convolution-matches-multiplier", conv_worst, 1e-11);

    double lap_worst = 0.0;
    for (int d = 1; d <= 3; ++d) {
        LatticeBox box = make_box(d, d == 3 ? 8 : 16);
        Field f = random_field(box, rng);
        Field composed(box);
        for (int axis = 1; axis <= d; ++axis) {
            Multiplier pj = partial_multiplier(box, axis);
            axpy(composed, cplx(1.0, 0.0), apply(pj, apply(pj, f)));
        }
        Field sten = stencil_laplacian(f);
        lap_worst = std::max(lap_worst, sup_abs(sub(composed, sten)) / sup_abs(f));
    }
    add_check(out, suite, "derivatives-compose-to-laplacian", lap_worst, 1e-11);

    LatticeBox line = make_box(1, 64);
    Field f1 = random_field(line, rng);
    Field lhs = apply(partial_multiplier(line, 1), f1);
    Field rhs = apply(scale(k_multiplier(line), cplx(0.0, 1.0)), f1);
    add_check(out, suite, "sqrt-laplacian-identity-1d",
              lp_alpha_norm(sub(lhs, rhs), NormSpec::l2()) / lp_alpha_norm(f1, NormSpec::l2()),
              1e-11);

    // ||d f||^2 summed over axes equals the forward-difference energy
    double grad_worst = 0.0;
    for (int d = 1; d <= 2; ++d) {
        LatticeBox box = make_box(d, 16);
        Field f = random_field(box, rng);
        double nl = 0.0, loc = 0.0;
        for (int axis = 1; axis <= d; ++axis) {
            double a = lp_alpha_norm(apply(partial_multiplier(box, axis), f), NormSpec::l2());
            double b = lp_alpha_norm(difference(f, axis), NormSpec::l2());
            nl += a * a;
            loc += b * b;
        }
        double f2 = lp_alpha_norm(f, NormSpec::l2());
        grad_worst = std::max(grad_worst, std::abs(nl - loc) / (f2 * f2));
    }
    add_check(out, suite, "gradient-energy-identity", grad_worst, 1e-10);

    Kernel ker = kernel_periodized(make_box(1, 32), 1);
    cplx total(0.0, 0.0);
    for (const auto& v : ker.values) total += v;
    add_check(out, suite, "kernel-zero-sum", std::abs(total), 1e-12);
}

void suite_adjointness(std::vector<CheckResult>& out, std::uint64_t seed) {
    Rng rng(seed + 1);
    double worst = 0.0;
    for (int d = 1; d <= 2; ++d) {
        LatticeBox box = make_box(d, 16);
        for (int axis = 1; axis <= d; ++axis) {
            Multiplier pj = partial_multiplier(box, axis);
            for (int trial = 0; trial < 10; ++trial) {
                Field u = random_field(box, rng);
                Field v = random_field(box, rng);
                cplx s = inner(apply(pj, u), v) + inner(u, apply(pj, v));
                double denom = lp_alpha_norm(u, NormSpec::l2()) * lp_alpha_norm(v, NormSpec::l2());
                worst = std::max(worst, std::abs(s) / denom);
            }
        }
    }
    add_check(out, "adjointness", "derivative-is-skew-adjoint", worst, 1e-11);
}

void suite_conservation(std::vector<CheckResult>& out, std::uint64_t seed) {
    Rng rng(seed + 2);
    LatticeBox box = make_box(1, 32);
    Field f = random_field(box, rng);
    Field g = random_field(box, rng);

    EquationSpec spec;
    spec.kind = EquationKind::linear;
    SolverConfig cfg;
    cfg.dt = 0.05;
    cfg.t_max = 10.0;
    cfg.method = Method::exact_linear;
    Trajectory traj = evolve(f, g, spec, cfg);

    double e0 = traj.samples.front().energy.total;
    double drift = 0.0;
    for (const auto& s : traj.samples) drift = std::max(drift, std::abs(s.energy.total / e0 - 1.0));
    add_check(out, "conservation", "exact-propagator-energy", drift, 1e-10);

    double n0 = std::sqrt(2.0 * traj.samples.front().energy.total);
    double ndrift = 0.0;
    for (const auto& s : traj.samples)
        ndrift = std::max(ndrift, std::abs(std::sqrt(2.0 * s.energy.total) - n0));
    add_check(out, "conservation", "first-order-norm-constant", ndrift, 1e-9);
}

void suite_counterexample(std::vector<CheckResult>& out) {
    ScanResult scan = counterexample_growth({16, 32, 64});
    double min_gain = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < scan.rows.size(); ++i)
        min_gain = std::min(min_gain, scan.rows[i].measured - scan.rows[i - 1].measured);
    // growth check: -min_gain <= 0 iff strictly increasing
    add_check(out, "counterexample", "strong-norm-grows", -min_gain, 0.0);
    double wmin = scan.rows.front().secondary, wmax = wmin;
    for (const auto& row : scan.rows) {
        wmin = std::min(wmin, row.secondary);
        wmax = std::max(wmax, row.secondary);
    }
    add_check(out, "counterexample", "weak-functional-band", wmax / wmin, 1.5);
}

void suite_isomorphism(std::vector<CheckResult>& out, std::uint64_t seed) {
    IsomorphismReport rep = isomorphism_check(seed + 3, 25, 32, 1);
    const double lo = 1.0 / std::sqrt(2.0) - 1e-9;
    const double hi = std::sqrt(2.0) + 1e-9;
    add_check(out, "isomorphism", "ratio-upper", rep.max_ratio, hi);
    // lower bound phrased as a <= check
    add_check(out, "isomorphism", "ratio-lower", lo, rep.min_ratio);
}

} // namespace

std::vector<std::string> verify_suite_names() {
    return {"identities", "adjointness", "conservation", "counterexample", "isomorphism"};
}

std::vector<CheckResult> run_verify_suite(const std::string& suite, std::uint64_t seed) {
    std::vector<CheckResult> out;
    bool all = suite == "all";
    bool known = all;
    if (all || suite == "identities") suite_identities(out, seed), known = true;
    if (all || suite == "adjointness") suite_adjointness(out, seed), known = true;
    if (all || suite == "conservation") suite_conservation(out, seed), known = true;
    if (all || suite == "counterexample") suite_counterexample(out), known = true;
    if (all || suite == "isomorphism") suite_isomorphism(out, seed), known = true;
    if (!known) throw std::invalid_argument("unknown verify suite: " + suite);
    return out;
}

} // namespace lattwave
