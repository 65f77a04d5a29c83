#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "lattwave/lattice.hpp"
#include "oracle.hpp"

using namespace lattwave;

TEST_CASE("make_box accepts even L in 1..3 dimensions and rejects the rest") {
    LatticeBox b1 = make_box(1, 8);
    CHECK(b1.total == 8);
    std::set<int> coords;
    for (std::int64_t i = 0; i < b1.total; ++i) coords.insert(site_coords(b1, i)[0]);
    CHECK(coords == std::set<int>{-4, -3, -2, -1, 0, 1, 2, 3});

    CHECK(make_box(2, 4).total == 16);
    CHECK(make_box(3, 4).total == 64);

    CHECK_THROWS_AS(make_box(3, 3), std::invalid_argument);   // odd L
    CHECK_THROWS_AS(make_box(0, 8), std::invalid_argument);
    CHECK_THROWS_AS(make_box(4, 8), std::invalid_argument);
    CHECK_THROWS_AS(make_box(1, 2), std::invalid_argument);   // below minimum size
}

TEST_CASE("index and coordinate maps invert each other on every site") {
    for (int d : {1, 2, 3}) {
        for (int L : {4, 8}) {
            LatticeBox box = make_box(d, L);
            for (std::int64_t i = 0; i < box.total; ++i) {
                Coord m = site_coords(box, i);
                CHECK(coord_index(box, m) == i);
                for (int j = 0; j < d; ++j) {
                    CHECK(m[std::size_t(j)] >= -L / 2);
                    CHECK(m[std::size_t(j)] < L / 2);
                }
                for (int j = d; j < 3; ++j) CHECK(m[std::size_t(j)] == 0);
            }
        }
    }
}

TEST_CASE("weight is <m> with signed representatives") {
    LatticeBox b1 = make_box(1, 8);
    CHECK(weight(b1, {0, 0, 0}) == 1.0);
    CHECK(weight(b1, {-4, 0, 0}) == doctest::Approx(std::sqrt(17.0)).epsilon(1e-15));

    LatticeBox b2 = make_box(2, 16);
    CHECK(weight(b2, {3, 4, 0}) == doctest::Approx(std::sqrt(26.0)).epsilon(1e-15));

    // even under m -> -m wherever both representatives exist
    for (std::int64_t i = 0; i < b2.total; ++i) {
        Coord m = site_coords(b2, i);
        if (m[0] == -8 || m[1] == -8) continue;   // -m not representable
        Coord neg{-m[0], -m[1], 0};
        CHECK(weight(b2, m) == weight(b2, neg));
        CHECK(weight_at(b2, i) == weight(b2, m));
    }
}

TEST_CASE("delta field puts a single unit at the requested site") {
    LatticeBox box = make_box(1, 8);
    Field d0 = delta_field(box);
    cplx sum(0.0, 0.0);
    int nonzero = 0;
    for (const auto& v : d0.values) {
        sum += v;
        if (v != cplx(0.0, 0.0)) ++nonzero;
    }
    CHECK(sum == cplx(1.0, 0.0));
    CHECK(nonzero == 1);
    CHECK(d0[coord_index(box, {0, 0, 0})] == cplx(1.0, 0.0));

    Field shifted = delta_field(box, {-3, 0, 0});
    CHECK(shifted[coord_index(box, {-3, 0, 0})] == cplx(1.0, 0.0));
}

TEST_CASE("field arithmetic obeys the usual algebra") {
    LatticeBox box = make_box(2, 8);
    Field a = oracle::random_field(box, 11);
    Field b = oracle::random_field(box, 12);

    CHECK(oracle::max_abs_diff(sub(add(a, b), b), a) <= 1e-14);
    CHECK(oracle::max_abs_diff(scale(a, cplx(2.0, 0.0)), add(a, a)) <= 1e-14);

    Field y = a;
    axpy(y, cplx(-1.0, 0.0), a);
    CHECK(sup_abs(y) == 0.0);

    Field c = constant_field(box, cplx(3.0, -1.0));
    CHECK(c.values[0] == cplx(3.0, -1.0));
    CHECK(sup_abs(c) == doctest::Approx(std::sqrt(10.0)).epsilon(1e-15));
    CHECK(all_finite(c));

    Field bad = c;
    bad.values[5] = cplx(std::nan(""), 0.0);
    CHECK_FALSE(all_finite(bad));
    CHECK_THROWS(check_finite(bad, "test"));

    LatticeBox other = make_box(2, 4);
    CHECK_THROWS(add(a, Field(other)));
}

TEST_CASE("seam tail fraction isolates mass near |m_j| = L/2") {
    LatticeBox box = make_box(1, 8);
    CHECK(seam_tail_fraction(delta_field(box)) == 0.0);
    CHECK(seam_tail_fraction(delta_field(box, {-4, 0, 0})) == 1.0);
    CHECK(seam_tail_fraction(zero_field(box)) == 0.0);
    // |m| >= 3 holds at m in {-4,-3,3}: three of eight sites
    CHECK(seam_tail_fraction(constant_field(box, cplx(1.0, 0.0))) ==
          doctest::Approx(3.0 / 8.0).epsilon(1e-15));
}

TEST_CASE("snapshots round-trip bit for bit") {
    LatticeBox box = make_box(2, 8);
    Field f = oracle::random_field(box, 21);

    std::stringstream ss;
    write_snapshot(ss, f);

    std::string header;
    std::getline(ss, header);
    CHECK(header == "lattwave-field v1 d=2 L=8");

    ss.clear();
    ss.seekg(0);
    Field g = read_snapshot(ss);
    CHECK(g.box == f.box);
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        CHECK(g.values[i].real() == f.values[i].real());
        CHECK(g.values[i].imag() == f.values[i].imag());
    }

    std::stringstream bad("lattwave-field v9 d=2 L=8\n");
    CHECK_THROWS(read_snapshot(bad));
}

TEST_CASE("checkpoints carry both fields, the time, and the spec hash") {
    LatticeBox box = make_box(1, 16);
    WaveState s{oracle::random_field(box, 31), oracle::random_field(box, 32), 2.625};

    std::stringstream ss;
    write_checkpoint(ss, s, 0xdeadbeefcafeull);
    std::uint64_t h = 0;
    WaveState r = read_checkpoint(ss, &h);

    CHECK(h == 0xdeadbeefcafeull);
    CHECK(r.t == 2.625);
    CHECK(oracle::max_abs_diff(r.u, s.u) == 0.0);
    CHECK(oracle::max_abs_diff(r.ut, s.ut) == 0.0);
}
