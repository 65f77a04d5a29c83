#include <doctest.h>

#include <cmath>
#include <complex>

#include "lattwave/calculus.hpp"
#include "lattwave/norms.hpp"
#include "lattwave/spectral.hpp"
#include "oracle.hpp"

using namespace lattwave;

namespace {

double max_coeff_diff(const SpectralField& a, const std::vector<cplx>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.coeffs.size(); ++i)
        worst = std::max(worst, std::abs(a.coeffs[i] - b[i]));
    return worst;
}

} // namespace

TEST_CASE("forward transform matches the definition on small boxes") {
    // includes a non-power-of-two length to exercise the plain DFT path
    struct Case {
        int d, L;
    };
    for (Case c : {Case{1, 4}, Case{1, 8}, Case{1, 12}, Case{2, 4}, Case{2, 8}, Case{3, 4}}) {
        LatticeBox box = make_box(c.d, c.L);
        Field f = oracle::random_field(box, 100 + std::uint64_t(c.d * 16 + c.L));
        SpectralField F = dft_forward(f);
        auto ref = oracle::slow_dft(f);
        double scale = std::sqrt(double(box.total));
        CHECK(max_coeff_diff(F, ref) <= 1e-12 * scale);
    }
}

TEST_CASE("transform of delta and constant fields") {
    LatticeBox box = make_box(2, 8);
    SpectralField D = dft_forward(delta_field(box));
    for (const auto& c : D.coeffs) CHECK(std::abs(c - cplx(1.0, 0.0)) <= 1e-13);

    SpectralField O = dft_forward(constant_field(box, cplx(1.0, 0.0)));
    CHECK(std::abs(O.coeffs[0] - cplx(64.0, 0.0)) <= 1e-11);
    for (std::size_t i = 1; i < O.coeffs.size(); ++i) CHECK(std::abs(O.coeffs[i]) <= 1e-11);
}

TEST_CASE("inverse transform undoes the forward transform") {
    LatticeBox box = make_box(2, 16);
    Field f = oracle::random_field(box, 7);
    Field g = dft_inverse(dft_forward(f));
    CHECK(oracle::max_abs_diff(f, g) <= 1e-12 * sup_abs(f));
}

TEST_CASE("Parseval holds with the L^-d convention") {
    for (int d : {1, 2, 3}) {
        LatticeBox box = make_box(d, 8);
        Field f = oracle::random_field(box, 40 + std::uint64_t(d));
        SpectralField F = dft_forward(f);
        double site = l2_norm(f);
        double freq = spectral_l2_norm(F);
        CHECK(std::abs(site - freq) <= 1e-12 * site);
    }
}

TEST_CASE("axis derivative multiplier is 2i sin(pi n_j / L)") {
    LatticeBox box = make_box(1, 16);
    Multiplier m = partial_multiplier(box, 1);
    CHECK(m.values[0] == cplx(0.0, 0.0));                       // constants annihilated
    CHECK(std::abs(m.values[8] - cplx(0.0, 2.0)) <= 1e-15);     // n = L/2
    for (int n = 0; n < 16; ++n) {
        cplx want(0.0, 2.0 * std::sin(oracle::pi * n / 16.0));
        CHECK(std::abs(m.values[std::size_t(n)] - want) <= 1e-15);
    }
    CHECK_THROWS_AS(partial_multiplier(box, 2), std::invalid_argument);
    CHECK_THROWS_AS(partial_multiplier(box, 0), std::invalid_argument);
}

TEST_CASE("squared axis multipliers sum to the Laplacian multiplier") {
    for (int d : {1, 2, 3}) {
        LatticeBox box = make_box(d, 8);
        Multiplier lap = laplacian_multiplier(box);
        std::vector<cplx> acc(std::size_t(box.total), cplx(0.0, 0.0));
        for (int j = 1; j <= d; ++j) {
            Multiplier pj = partial_multiplier(box, j);
            for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += pj.values[i] * pj.values[i];
        }
        for (std::size_t i = 0; i < acc.size(); ++i) {
            CHECK(std::abs(acc[i] - lap.values[i]) <= 1e-15 * 4.0 * d);
            CHECK(lap.values[i].imag() == 0.0);
            CHECK(lap.values[i].real() <= 0.0);
            CHECK(lap.values[i].real() >= -4.0 * d);
        }
    }
}

TEST_CASE("K multiplier is the square root of minus the Laplacian") {
    LatticeBox box = make_box(3, 8);
    Multiplier K = k_multiplier(box);
    Multiplier lap = laplacian_multiplier(box);
    CHECK(K.values[0] == cplx(0.0, 0.0));
    // all n_j = L/2: K = 2 sqrt(d)
    std::int64_t corner = coord_index(box, {-4, -4, -4});
    CHECK(std::abs(K.values[std::size_t(corner)].real() - 2.0 * std::sqrt(3.0)) <= 1e-14);
    for (std::size_t i = 0; i < K.values.size(); ++i) {
        double k = K.values[i].real();
        CHECK(k >= 0.0);
        CHECK(std::abs(k * k + lap.values[i].real()) <= 1e-14 * 4.0 * 3);
    }
}

TEST_CASE("propagator pair: values, limits, and the Pythagorean identity") {
    LatticeBox box = make_box(2, 16);

    auto [cos0, sinc0] = propagator_pair(box, 0.0);
    for (std::size_t i = 0; i < cos0.values.size(); ++i) {
        CHECK(cos0.values[i] == cplx(1.0, 0.0));
        CHECK(sinc0.values[i] == cplx(0.0, 0.0));
    }

    double t = 2.5;
    auto [cost, sinct] = propagator_pair(box, t);
    Multiplier K = k_multiplier(box);
    CHECK(sinct.values[0].real() == doctest::Approx(t).epsilon(1e-15));   // K = 0 row
    for (std::size_t i = 0; i < K.values.size(); ++i) {
        double k = K.values[i].real();
        double c = cost.values[i].real(), s = sinct.values[i].real();
        CHECK(std::abs(c * c + k * k * s * s - 1.0) <= 1e-12);
        CHECK(std::abs(s) <= std::abs(t) + 1e-15);
    }

    // Taylor branch at tiny tK agrees with sin(tK)/K to first order
    double eps = 1e-7;
    auto [ce, se] = propagator_pair(box, eps);
    for (std::size_t i = 0; i < K.values.size(); ++i) {
        double k = K.values[i].real();
        // Taylor remainder plus a couple of ulps for the evaluation itself
        CHECK(std::abs(se.values[i].real() - eps) <= eps * (eps * k) * (eps * k) / 6.0 + 4e-16 * eps);
        CHECK(std::abs(ce.values[i].real() - 1.0) <= 0.5 * (eps * k) * (eps * k) + 4e-16);
    }
}

TEST_CASE("multiplier application is diagonal in frequency") {
    LatticeBox box = make_box(2, 16);
    Field f = oracle::random_field(box, 55);

    Field same = apply(identity_multiplier(box), f);
    CHECK(oracle::max_abs_diff(same, f) <= 1e-12 * sup_abs(f));

    // spectral Laplacian equals the neighbor stencil
    Field lap_spec = apply(laplacian_multiplier(box), f);
    Field lap_sten = stencil_laplacian(f);
    CHECK(oracle::max_abs_diff(lap_spec, lap_sten) <= 1e-11 * sup_abs(f));

    // compose = pointwise product
    Multiplier p1 = partial_multiplier(box, 1);
    Field twice = apply(p1, apply(p1, f));
    Field composed = apply(compose(p1, p1), f);
    CHECK(oracle::max_abs_diff(twice, composed) <= 1e-11 * sup_abs(f));

    LatticeBox other = make_box(2, 8);
    CHECK_THROWS(apply(identity_multiplier(other), f));
}

TEST_CASE("axis derivative has l2 operator norm at most 2") {
    LatticeBox box = make_box(1, 32);
    auto op = [&](const Field& f) { return apply(partial_multiplier(box, 1), f); };
    double ratio = empirical_operator_ratio(op, NormSpec::l2(), adversarial_ensemble(box, 99, 20));
    CHECK(ratio <= 2.0 + 1e-12);
    CHECK(ratio > 1.0);   // the seam mode comes close to saturating the bound
}
