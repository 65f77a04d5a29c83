#include <doctest.h>

#include <cmath>

#include "lattwave/calculus.hpp"
#include "lattwave/energy.hpp"
#include "lattwave/solvers.hpp"
#include "lattwave/spectral.hpp"
#include "oracle.hpp"

using namespace lattwave;

TEST_CASE("linear energy: closed forms and the difference-operator identity") {
    LatticeBox box = make_box(1, 16);

    WaveState zero{zero_field(box), zero_field(box), 0.0};
    CHECK(linear_energy(zero).total == 0.0);

    WaveState kin{zero_field(box), delta_field(box), 0.0};
    EnergyBreakdown ek = linear_energy(kin);
    CHECK(ek.kinetic == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(ek.gradient == doctest::Approx(0.0));
    CHECK(ek.total == doctest::Approx(0.5).epsilon(1e-14));

    // ||D delta||^2 = 2, so the gradient part is 1
    WaveState grad{delta_field(box), zero_field(box), 0.0};
    CHECK(linear_energy(grad).gradient == doctest::Approx(1.0).epsilon(1e-13));

    // spectral gradient equals (1/2) sum_j ||D_j u||^2 on random fields
    LatticeBox big = make_box(2, 16);
    Field u = oracle::random_field(big, 3);
    WaveState s{u, zero_field(big), 0.0};
    double via_diff = 0.0;
    for (int j = 1; j <= 2; ++j) {
        double n = l2_norm(difference(u, j));
        via_diff += 0.5 * n * n;
    }
    CHECK(linear_energy(s).gradient == doctest::Approx(via_diff).epsilon(1e-11));
}

TEST_CASE("power-law energy: sign convention and the constant-field value") {
    LatticeBox box = make_box(1, 8);

    WaveState zero{zero_field(box), zero_field(box), 0.0};
    CHECK(nlw_energy(zero, 1.0, 3.0).total == 0.0);

    // defocusing makes the potential nonnegative
    Field u = oracle::random_field(box, 4);
    WaveState s{u, zero_field(box), 0.0};
    CHECK(nlw_energy(s, -1.0, 3.0).potential >= 0.0);
    CHECK(nlw_energy(s, 1.0, 3.0).potential <= 0.0);

    // u = c constant, ut = 0, mu = 1, p = 3: potential = -L c^4 / 4 = -2 c^4
    double c = 0.7;
    WaveState sc{constant_field(box, cplx(c, 0.0)), zero_field(box), 0.0};
    EnergyBreakdown e = nlw_energy(sc, 1.0, 3.0);
    CHECK(e.gradient <= 1e-13);
    CHECK(e.potential == doctest::Approx(-2.0 * std::pow(c, 4.0)).epsilon(1e-13));
    CHECK(e.total == doctest::Approx(e.kinetic + e.gradient + e.potential));

    CHECK_THROWS_AS(nlw_energy(s, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("A(t) is the sum of two weighted norms and scales linearly") {
    LatticeBox box = make_box(1, 8);
    WaveState s{delta_field(box), zero_field(box), 0.0};
    CHECK(energy_a(s, 1).value == doctest::Approx(1.0));
    CHECK(energy_a(s, 0).value == doctest::Approx(1.0));

    WaveState zero{zero_field(box), zero_field(box), 0.0};
    CHECK(energy_a(zero, 0).value == 0.0);

    WaveState r{oracle::random_field(box, 5), oracle::random_field(box, 6), 0.0};
    WaveState r3{scale(r.u, cplx(3.0, 0.0)), scale(r.ut, cplx(3.0, 0.0)), 0.0};
    for (int k : {0, 1})
        CHECK(energy_a(r3, k).value == doctest::Approx(3.0 * energy_a(r, k).value).epsilon(1e-13));
    CHECK_THROWS_AS(energy_a(r, 2), std::invalid_argument);
}

TEST_CASE("trapezoid rule integrates whole sample intervals up to t") {
    TimeSeries s{{0.0, 1.0}, {1.0, 3.0}, {2.0, 5.0}};
    CHECK(trapezoid_integral(s, 2.0) == doctest::Approx(6.0));
    CHECK(trapezoid_integral(s, 1.0) == doctest::Approx(2.0));
    CHECK(trapezoid_integral(s, 0.5) == 0.0);   // no complete interval yet
    CHECK(trapezoid_integral(s, 100.0) == doctest::Approx(6.0));
    CHECK(trapezoid_integral({}, 1.0) == 0.0);
}

TEST_CASE("explicit bound formula and its fitted constant") {
    CHECK(estimate_rhs_explicit(2.0, 3.0, {}, 0.0, 0) == doctest::Approx(5.0));
    CHECK(estimate_rhs_explicit(2.0, 3.0, {}, 2.0, 1) == doctest::Approx(25.0));   // (1+4)*5

    TimeSeries forcing{{0.0, 1.0}, {1.0, 1.0}};
    CHECK(estimate_rhs_explicit(0.0, 0.0, forcing, 1.0, 0) == doctest::Approx(2.0));

    TimeSeries a{{0.0, 5.0}, {1.0, 10.0}};
    double c = fit_explicit_constant(a, 2.0, 3.0, {}, 0);
    CHECK(c == doctest::Approx(1.0));   // 5/5 at t=0, 10/10 at t=1
}

TEST_CASE("implicit bound: formula, monotonicity, and the fitted exponent") {
    TimeSeries none;
    TimeSeries gzero{{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}};
    ImplicitBound b = estimate_rhs_implicit(2.0, none, gzero, 2.0, 0.5);
    CHECK(b.exp_factor == doctest::Approx(std::exp(1.0)));   // integral of (0+1) over [0,2]
    CHECK(b.bound == doctest::Approx(2.0 * std::exp(1.0)));
    CHECK(estimate_rhs_implicit(2.0, none, gzero, 2.0, 0.5).bound >=
          estimate_rhs_implicit(2.0, none, gzero, 1.0, 0.5).bound);

    // A(t) = A0 e^{ct} against exp(C * integral(g+1)): with g = 1 the smallest
    // C is c/2, with g = 0 it is c
    double c = 0.8, A0 = 1.5;
    TimeSeries a, gone;
    for (int i = 0; i <= 40; ++i) {
        double t = 0.05 * i;
        a.emplace_back(t, A0 * std::exp(c * t));
        gone.emplace_back(t, 1.0);
    }
    CHECK(fit_implicit_constant(a, A0, none, gone, 64.0) == doctest::Approx(c / 2.0).epsilon(1e-9));
    TimeSeries gz;
    for (const auto& pt : gone) gz.emplace_back(pt.first, 0.0);
    CHECK(fit_implicit_constant(a, A0, none, gz, 64.0) == doctest::Approx(c).epsilon(1e-9));

    // insufficient ceiling
    TimeSeries steep{{0.0, A0}, {1.0, A0 * 1e40}};
    CHECK_THROWS_AS(fit_implicit_constant(steep, A0, none, gz, 4.0), std::runtime_error);
}

TEST_CASE("free evolution satisfies the unit-constant energy inequality") {
    LatticeBox box = make_box(1, 32);
    SolverConfig cfg;
    cfg.dt = 0.01;
    cfg.t_max = 1.0;
    cfg.method = Method::exact_linear;
    cfg.sample_every = 10;
    cfg.keep_states = true;

    Trajectory traj = evolve(delta_field(box), zero_field(box), EquationSpec{}, cfg);
    REQUIRE(traj.completed);
    REQUIRE(traj.states.size() >= 5);

    TimeSeries no_forcing{{0.0, 0.0}, {1.0, 0.0}};
    StrongEnergyReport rep = strong_energy_check(traj.states, no_forcing, 1e-9);
    CHECK(rep.ok);
    CHECK(rep.max_violation <= 1e-9);
    // ||u'(t)|| is constant for the free wave, so the slack stays near zero
    for (double s : rep.slack) CHECK(std::abs(s) <= 1e-9);

    // fabricated energy injection must be flagged
    std::vector<WaveState> cooked = traj.states;
    cooked.back().ut = scale(cooked.back().ut, cplx(2.0, 0.0));
    StrongEnergyReport bad = strong_energy_check(cooked, no_forcing, 1e-9);
    CHECK_FALSE(bad.ok);
    CHECK(bad.max_violation > 1e-3);
}

TEST_CASE("semilinear energy drift shrinks at fourth order in the step") {
    LatticeBox box = make_box(1, 16);
    EquationSpec spec;
    spec.kind = EquationKind::semilinear;
    spec.forcing = Nonlinearity::power(-1.0, 3.0);

    Field f = oracle::random_field(box, 12, 0.3);
    Field g = oracle::random_field(box, 13, 0.3);

    auto drift = [&](double dt) {
        SolverConfig cfg;
        cfg.dt = dt;
        cfg.t_max = 1.0;
        cfg.method = Method::rk4;
        cfg.sample_every = 1 << 20;   // only endpoints matter here
        Trajectory traj = evolve(f, g, spec, cfg);
        REQUIRE(traj.completed);
        double e0 = traj.samples.front().energy.total;
        double e1 = traj.samples.back().energy.total;
        return std::abs(e1 - e0);
    };

    double d1 = drift(0.05), d2 = drift(0.025);
    double order = std::log2(d1 / d2);
    CHECK(order > 3.0);
    CHECK(order < 5.3);
}
