#include "lattwave/lattice.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace lattwave {

std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string hex_u64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

LatticeBox make_box(int d, int L) {
    if (d < 1 || d > 3)
        throw std::invalid_argument("make_box: dimension must be 1, 2 or 3, got " + std::to_string(d));
    if (L < 4)
        throw std::invalid_argument("make_box: L must be >= 4, got " + std::to_string(L));
    if (L % 2 != 0)
        throw std::invalid_argument("make_box: L must be even (signed coordinates need the "
                                    "symmetric range [-L/2, L/2)), got " + std::to_string(L));
    LatticeBox box;
    box.d = d;
    box.L = L;
    box.total = 1;
    for (int j = 0; j < d; ++j) box.total *= L;
    return box;
}

Coord site_coords(const LatticeBox& box, std::int64_t flat) {
    Coord m{0, 0, 0};
    for (int j = box.d - 1; j >= 0; --j) {
        int i = int(flat % box.L);
        flat /= box.L;
        m[std::size_t(j)] = signed_coord(box, i);
    }
    return m;
}

std::int64_t coord_index(const LatticeBox& box, const Coord& m) {
    std::int64_t flat = 0;
    for (int j = 0; j < box.d; ++j)
        flat = flat * box.L + unsigned_index(box, m[std::size_t(j)]);
    return flat;
}

double weight(const LatticeBox& box, const Coord& m) {
    double s = 1.0;
    for (int j = 0; j < box.d; ++j) s += double(m[std::size_t(j)]) * double(m[std::size_t(j)]);
    return std::sqrt(s);
}

double weight_at(const LatticeBox& box, std::int64_t flat) {
    return weight(box, site_coords(box, flat));
}

Field zero_field(const LatticeBox& box) { return Field(box); }

Field constant_field(const LatticeBox& box, cplx value) {
    Field f(box);
    for (auto& v : f.values) v = value;
    return f;
}

Field delta_field(const LatticeBox& box, const Coord& site) {
    Field f(box);
    f[coord_index(box, site)] = cplx(1.0, 0.0);
    return f;
}

void require_same_box(const LatticeBox& a, const LatticeBox& b, const char* where) {
    if (!(a == b))
        throw std::invalid_argument(std::string(where) + ": box mismatch (d=" + std::to_string(a.d) +
                                    ",L=" + std::to_string(a.L) + " vs d=" + std::to_string(b.d) +
                                    ",L=" + std::to_string(b.L) + ")");
}

Field add(const Field& a, const Field& b) {
    require_same_box(a.box, b.box, "add");
    Field out(a.box);
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = a.values[i] + b.values[i];
    return out;
}

Field sub(const Field& a, const Field& b) {
    require_same_box(a.box, b.box, "sub");
    Field out(a.box);
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = a.values[i] - b.values[i];
    return out;
}

Field scale(const Field& a, cplx s) {
    Field out(a.box);
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = a.values[i] * s;
    return out;
}

void axpy(Field& y, cplx a, const Field& x) {
    require_same_box(y.box, x.box, "axpy");
    for (std::size_t i = 0; i < y.values.size(); ++i) y.values[i] += a * x.values[i];
}

bool all_finite(const Field& f) {
    for (const auto& v : f.values)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

void check_finite(const Field& f, const char* where) {
    if (!all_finite(f))
        throw std::runtime_error(std::string(where) + ": field contains NaN/Inf");
}

double sup_abs(const Field& f) {
    double m = 0.0;
    for (const auto& v : f.values) m = std::max(m, std::abs(v));
    return m;
}

double seam_tail_fraction(const Field& f) {
    const int half = f.box.L / 2;
    double tail = 0.0, total = 0.0;
    for (std::int64_t i = 0; i < f.box.total; ++i) {
        double a2 = std::norm(f.values[std::size_t(i)]);
        total += a2;
        Coord m = site_coords(f.box, i);
        int far = 0;
        for (int j = 0; j < f.box.d; ++j) far = std::max(far, std::abs(m[std::size_t(j)]));
        if (far >= half - 1) tail += a2;
    }
    return total > 0.0 ? tail / total : 0.0;
}

void write_snapshot(std::ostream& os, const Field& f) {
    os << "lattwave-field v1 d=" << f.box.d << " L=" << f.box.L << "\n";
    for (const auto& v : f.values)
        os << format_g17(v.real()) << " " << format_g17(v.imag()) << "\n";
}

Field read_snapshot(std::istream& is) {
    std::string header;
    if (!std::getline(is, header))
        throw std::runtime_error("read_snapshot: empty stream");
    int d = 0, L = 0;
    if (std::sscanf(header.c_str(), "lattwave-field v1 d=%d L=%d", &d, &L) != 2)
        throw std::runtime_error("read_snapshot: bad header '" + header + "'");
    Field f(make_box(d, L));
    for (std::int64_t i = 0; i < f.box.total; ++i) {
        double re = 0.0, im = 0.0;
        if (!(is >> re >> im))
            throw std::runtime_error("read_snapshot: truncated at value " + std::to_string(i) +
                                     " of " + std::to_string(f.box.total));
        f[i] = cplx(re, im);
    }
    is >> std::ws;
    return f;
}

void save_snapshot(const std::string& path, const Field& f) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_snapshot: cannot open " + path);
    write_snapshot(os, f);
}

Field load_snapshot(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_snapshot: cannot open " + path);
    return read_snapshot(is);
}

void write_checkpoint(std::ostream& os, const WaveState& s, std::uint64_t spec_hash) {
    require_same_box(s.u.box, s.ut.box, "write_checkpoint");
    write_snapshot(os, s.u);
    write_snapshot(os, s.ut);
    os << "t=" << format_g17(s.t) << " spec_hash=" << hex_u64(spec_hash) << "\n";
}

WaveState read_checkpoint(std::istream& is, std::uint64_t* spec_hash_out) {
    WaveState s;
    s.u = read_snapshot(is);
    s.ut = read_snapshot(is);
    require_same_box(s.u.box, s.ut.box, "read_checkpoint");
    std::string meta;
    if (!std::getline(is, meta))
        throw std::runtime_error("read_checkpoint: missing metadata line");
    double t = 0.0;
    unsigned long long h = 0;
    if (std::sscanf(meta.c_str(), "t=%lf spec_hash=%llx", &t, &h) != 2)
        throw std::runtime_error("read_checkpoint: bad metadata line '" + meta + "'");
    s.t = t;
    if (spec_hash_out) *spec_hash_out = h;
    return s;
}

void save_checkpoint(const std::string& path, const WaveState& s, std::uint64_t spec_hash) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
    write_checkpoint(os, s, spec_hash);
}

WaveState load_checkpoint(const std::string& path, std::uint64_t* spec_hash_out) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
    return read_checkpoint(is, spec_hash_out);
}

} // namespace lattwave
