#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "lattwave/common.hpp"

namespace lattwave {

// Periodic truncation of the integer lattice: the discrete torus (Z/LZ)^d,
// 1 <= d <= 3, L even. Sites carry signed coordinates m_j in [-L/2, L/2);
// storage is row-major over the unsigned per-axis index i_j in [0, L),
// axis 0 slowest. The layout is part of the snapshot file contract.
struct LatticeBox {
    int d = 0;
    int L = 0;
    std::int64_t total = 0;

    bool operator==(const LatticeBox&) const = default;
};

LatticeBox make_box(int d, int L);

// Coordinates are carried as array<int,3>; axes >= d are zero.
using Coord = std::array<int, 3>;

// unsigned index i in [0,L) -> signed representative in [-L/2, L/2)
inline int signed_coord(const LatticeBox& box, int i) {
    return i < box.L / 2 ? i : i - box.L;
}
// signed (or any integer) -> unsigned index in [0,L)
inline int unsigned_index(const LatticeBox& box, int m) {
    int r = m % box.L;
    return r < 0 ? r + box.L : r;
}

Coord site_coords(const LatticeBox& box, std::int64_t flat);   // signed
std::int64_t coord_index(const LatticeBox& box, const Coord& m);

// <m> = (1 + |m|^2)^{1/2}
double weight(const LatticeBox& box, const Coord& m);
double weight_at(const LatticeBox& box, std::int64_t flat);

struct Field {
    LatticeBox box;
    std::vector<cplx> values;

    Field() = default;
    explicit Field(const LatticeBox& b) : box(b), values(b.total, cplx(0.0, 0.0)) {}

    cplx& operator[](std::int64_t i) { return values[std::size_t(i)]; }
    const cplx& operator[](std::int64_t i) const { return values[std::size_t(i)]; }
};

Field zero_field(const LatticeBox& box);
Field constant_field(const LatticeBox& box, cplx value);
Field delta_field(const LatticeBox& box, const Coord& site = {0, 0, 0});

// elementwise helpers (fields must share a box)
Field add(const Field& a, const Field& b);
Field sub(const Field& a, const Field& b);
Field scale(const Field& a, cplx s);
void axpy(Field& y, cplx a, const Field& x);   // y += a*x

void require_same_box(const LatticeBox& a, const LatticeBox& b, const char* where);
void check_finite(const Field& f, const char* where);
bool all_finite(const Field& f);
double sup_abs(const Field& f);

// l^2 mass fraction within one site of the seam |m_j| = L/2 (wrap artifacts
// concentrate there; reported per trajectory sample). Zero field -> 0.
double seam_tail_fraction(const Field& f);

struct WaveState {
    Field u;
    Field ut;
    double t = 0.0;
};

// Snapshot format (external contract):
//   line 1: "lattwave-field v1 d=<d> L=<L>"
//   then L^d lines "re im", row-major, 17 significant digits.
void write_snapshot(std::ostream& os, const Field& f);
Field read_snapshot(std::istream& is);
void save_snapshot(const std::string& path, const Field& f);
Field load_snapshot(const std::string& path);

// Checkpoint = u snapshot + ut snapshot + "t=<t> spec_hash=<hex>".
void write_checkpoint(std::ostream& os, const WaveState& s, std::uint64_t spec_hash);
WaveState read_checkpoint(std::istream& is, std::uint64_t* spec_hash_out = nullptr);
void save_checkpoint(const std::string& path, const WaveState& s, std::uint64_t spec_hash);
WaveState load_checkpoint(const std::string& path, std::uint64_t* spec_hash_out = nullptr);

} // namespace lattwave
