#include <doctest.h>

#include <cmath>
#include <complex>

#include "lattwave/calculus.hpp"
#include "lattwave/norms.hpp"
#include "lattwave/spectral.hpp"
#include "oracle.hpp"

using namespace lattwave;

namespace {

// raw partial periodization sum_{|n| <= N} phi(a + nL), smallest terms first
cplx partial_periodization(int a, int L, int N) {
    cplx acc(0.0, 0.0);
    for (int n = N; n >= 1; --n)
        acc += infinite_kernel_value(a + std::int64_t(n) * L) +
               infinite_kernel_value(a - std::int64_t(n) * L);
    return acc + infinite_kernel_value(a);
}

} // namespace

TEST_CASE("infinite kernel values match the closed form and are even") {
    CHECK(infinite_kernel_value(0).real() == 0.0);
    CHECK(infinite_kernel_value(0).imag() == doctest::Approx(4.0 / oracle::pi).epsilon(1e-15));
    CHECK(infinite_kernel_value(1).imag() ==
          doctest::Approx(-4.0 / (3.0 * oracle::pi)).epsilon(1e-15));
    CHECK(infinite_kernel_value(2).imag() ==
          doctest::Approx(-4.0 / (15.0 * oracle::pi)).epsilon(1e-15));
    for (std::int64_t a : {1, 2, 3, 17, 1000})
        CHECK(infinite_kernel_value(a) == infinite_kernel_value(-a));
}

TEST_CASE("kernel partial sums telescope: sum over |a| <= M equals (4i/pi)/(2M+1)") {
    // 1/(4a^2-1) = (1/2)(1/(2a-1) - 1/(2a+1)), so the symmetric partial sum
    // collapses in closed form; this is the zero-sum property at finite M
    for (int M : {1, 5, 50, 400}) {
        cplx acc = infinite_kernel_value(0);
        for (int a = 1; a <= M; ++a)
            acc += infinite_kernel_value(a) + infinite_kernel_value(-a);
        double want = 4.0 / oracle::pi / double(2 * M + 1);
        CHECK(std::abs(acc.real()) <= 1e-16);
        CHECK(acc.imag() == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("periodized kernel: purely imaginary, even, zero sum, tiny tail bound") {
    for (int L : {8, 64}) {
        LatticeBox box = make_box(1, L);
        Kernel ker = kernel_periodized(box, 1);
        CHECK(ker.tail_bound < 1e-13);
        CHECK(ker.tail_terms >= 1);

        cplx sum(0.0, 0.0);
        for (const auto& v : ker.values) {
            sum += v;
            CHECK(std::abs(v.real()) <= 1e-15);
        }
        CHECK(std::abs(sum) <= 1e-12);

        // phi_per(a) = phi_per(-a) wherever both offsets are representable
        for (int a = 1; a < L / 2; ++a) {
            cplx plus = ker.values[std::size_t(a)];
            cplx minus = ker.values[std::size_t(L - a)];
            CHECK(std::abs(plus - minus) <= 1e-15);
        }
    }
}

TEST_CASE("direct partial sums converge to the periodized kernel from the definition") {
    LatticeBox box = make_box(1, 16);
    Kernel ker = kernel_periodized(box, 1);
    for (int a : {0, 1, 5, -7}) {
        std::size_t idx = std::size_t(unsigned_index(box, a));
        double e50 = std::abs(partial_periodization(a, 16, 50) - ker.values[idx]);
        double e200 = std::abs(partial_periodization(a, 16, 200) - ker.values[idx]);
        double e800 = std::abs(partial_periodization(a, 16, 800) - ker.values[idx]);
        CHECK(e200 < e50);
        CHECK(e800 < e200);
        CHECK(e800 <= 1e-4);
    }
}

TEST_CASE("transform of the periodized kernel is the axis multiplier") {
    // Poisson summation, checked with the O(N^2) transform oracle
    for (int L : {8, 16}) {
        LatticeBox box = make_box(1, L);
        Kernel ker = kernel_periodized(box, 1);
        Field as_field(box);
        for (std::int64_t i = 0; i < box.total; ++i) as_field[i] = ker.values[std::size_t(i)];
        auto hat = oracle::slow_dft(as_field);
        for (int n = 0; n < L; ++n) {
            cplx want(0.0, 2.0 * std::sin(oracle::pi * n / double(L)));
            CHECK(std::abs(hat[std::size_t(n)] - want) <= 1e-12);
        }
    }
}

TEST_CASE("axis convolution realizes the derivative") {
    LatticeBox box = make_box(2, 16);
    Kernel k1 = kernel_periodized(box, 1);
    Kernel k2 = kernel_periodized(box, 2);

    // delta: the kernel laid along the axis, zero off-axis
    Field dd = conv_partial(delta_field(box), 1, k1);
    for (std::int64_t i = 0; i < box.total; ++i) {
        Coord m = site_coords(box, i);
        if (m[1] != 0)
            CHECK(std::abs(dd[i]) == 0.0);
        else
            CHECK(std::abs(dd[i] - k1.values[std::size_t(unsigned_index(box, m[0]))]) <= 1e-15);
    }

    // constants are annihilated
    Field dc = conv_partial(constant_field(box, cplx(2.0, 1.0)), 1, k1);
    CHECK(sup_abs(dc) <= 1e-13);

    // random field: agrees with the spectral application on both axes
    Field f = oracle::random_field(box, 77);
    CHECK(oracle::max_abs_diff(conv_partial(f, 1, k1), apply(partial_multiplier(box, 1), f)) <=
          1e-11 * sup_abs(f));
    CHECK(oracle::max_abs_diff(conv_partial(f, 2, k2), apply(partial_multiplier(box, 2), f)) <=
          1e-11 * sup_abs(f));

    CHECK_THROWS_AS(conv_partial(f, 2, k1), std::invalid_argument);   // axis mismatch
}

TEST_CASE("derivative of a real field is purely imaginary and nonlocal") {
    LatticeBox box = make_box(1, 128);
    Kernel ker = kernel_periodized(box, 1);

    Field f = oracle::random_real_field(box, 3);
    Field df = conv_partial(f, 1, ker);
    double max_re = 0.0;
    for (const auto& v : df.values) max_re = std::max(max_re, std::abs(v.real()));
    CHECK(max_re <= 1e-13 * sup_abs(f));

    // the derivative of a point mass touches every site
    Field dd = conv_partial(delta_field(box), 1, ker);
    for (const auto& v : dd.values) CHECK(std::abs(v) > 0.0);
}

TEST_CASE("forward difference: stencil values and the Parseval norm identity") {
    LatticeBox box = make_box(1, 8);
    Field dc = difference(constant_field(box, cplx(3.0, 0.0)), 1);
    CHECK(sup_abs(dc) == 0.0);

    Field dd = difference(delta_field(box), 1);
    CHECK(dd[coord_index(box, {0, 0, 0})] == cplx(-1.0, 0.0));
    CHECK(dd[coord_index(box, {-1, 0, 0})] == cplx(1.0, 0.0));

    // |e^{ix} - 1| = |2 sin(x/2)|, so D_j and the derivative are isometric on l2
    LatticeBox big = make_box(2, 16);
    Field f = oracle::random_field(big, 8);
    for (int j : {1, 2}) {
        double a = l2_norm(difference(f, j));
        double b = l2_norm(apply(partial_multiplier(big, j), f));
        CHECK(std::abs(a - b) <= 1e-11 * a);
    }
}

TEST_CASE("stencil Laplacian values and spectral agreement") {
    LatticeBox box = make_box(1, 8);
    Field ld = stencil_laplacian(delta_field(box));
    CHECK(ld[coord_index(box, {0, 0, 0})] == cplx(-2.0, 0.0));
    CHECK(ld[coord_index(box, {1, 0, 0})] == cplx(1.0, 0.0));
    CHECK(ld[coord_index(box, {-1, 0, 0})] == cplx(1.0, 0.0));
    CHECK(sup_abs(stencil_laplacian(constant_field(box, cplx(5.0, 2.0)))) == 0.0);

    LatticeBox big = make_box(3, 8);
    Field f = oracle::random_field(big, 9);
    CHECK(oracle::max_abs_diff(stencil_laplacian(f), apply(laplacian_multiplier(big), f)) <=
          1e-11 * sup_abs(f));
}

TEST_CASE("inner product and the two adjointness identities") {
    LatticeBox box = make_box(1, 8);
    Field d0 = delta_field(box);
    CHECK(inner(d0, d0) == cplx(1.0, 0.0));

    LatticeBox big = make_box(2, 16);
    Multiplier p1 = partial_multiplier(big, 1);
    for (std::uint64_t seed : {21ull, 22ull, 23ull}) {
        Field u = oracle::random_field(big, seed);
        Field v = oracle::random_field(big, seed + 100);
        // sesquilinear: <d u, v> = -<u, d v>
        cplx lhs = inner(apply(p1, u), v);
        cplx rhs = inner(u, apply(p1, v));
        CHECK(std::abs(lhs + rhs) <= 1e-11 * l2_norm(u) * l2_norm(v));

        // bilinear on real fields: sum (d u) v = sum u (d v)
        Field ur = oracle::random_real_field(big, seed + 200);
        Field vr = oracle::random_real_field(big, seed + 300);
        Field du = apply(p1, ur), dv = apply(p1, vr);
        cplx bl(0.0, 0.0), br(0.0, 0.0);
        for (std::int64_t i = 0; i < big.total; ++i) {
            bl += du[i] * vr[i];
            br += ur[i] * dv[i];
        }
        CHECK(std::abs(bl - br) <= 1e-11 * l2_norm(ur) * l2_norm(vr));
    }
}

TEST_CASE("derivative and difference norms stay comparable when L doubles") {
    // Riesz-transform style equivalence: the ratio band at L is close to the
    // band at 2L for p where the transform is bounded
    for (double p : {1.5, 2.0, 3.0}) {
        double lo[2], hi[2];
        int slot = 0;
        for (int L : {32, 64}) {
            LatticeBox box = make_box(1, L);
            Multiplier d1 = partial_multiplier(box, 1);
            double mn = 1e300, mx = 0.0;
            for (const Field& f : adversarial_ensemble(box, 5, 10)) {
                double num = lp_alpha_norm(apply(d1, f), NormSpec{p, 0.0});
                double den = lp_alpha_norm(difference(f, 1), NormSpec{p, 0.0});
                if (den == 0.0) continue;
                double r = num / den;
                mn = std::min(mn, r);
                mx = std::max(mx, r);
            }
            lo[slot] = mn;
            hi[slot] = mx;
            ++slot;
        }
        CHECK(hi[1] <= 2.0 * hi[0]);
        CHECK(lo[1] >= 0.5 * lo[0]);
        CHECK(hi[0] < 1e3);
        CHECK(lo[0] > 1e-3);
    }
}

TEST_CASE("digamma matches known values and the recurrence") {
    const double euler_gamma = 0.57721566490153286;
    CHECK(digamma(1.0) == doctest::Approx(-euler_gamma).epsilon(1e-13));
    CHECK(digamma(0.5) == doctest::Approx(-euler_gamma - 2.0 * std::log(2.0)).epsilon(1e-13));
    CHECK(digamma(2.0) == doctest::Approx(1.0 - euler_gamma).epsilon(1e-13));
    for (double x : {0.3, 1.7, 9.25, 40.0})
        CHECK(digamma(x + 1.0) - digamma(x) == doctest::Approx(1.0 / x).epsilon(1e-12));
    CHECK_THROWS_AS(digamma(0.0), std::invalid_argument);
    CHECK_THROWS_AS(digamma(-2.5), std::invalid_argument);
}
