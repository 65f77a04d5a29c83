#include "lattwave/spectral.hpp"

#include <cmath>
#include <numbers>

#include "lattwave/fft.hpp"

namespace lattwave {

namespace {

// Apply the 1-d transform along every line of the given axis (0-based).
void transform_axis(const LatticeBox& box, std::vector<cplx>& vals, int axis, bool inverse) {
    const int L = box.L;
    std::int64_t stride = 1;
    for (int j = box.d - 1; j > axis; --j) stride *= L;
    const std::int64_t block = stride * L;
    std::vector<cplx> line(static_cast<std::size_t>(L));
    for (std::int64_t base = 0; base < box.total; base += block) {
        for (std::int64_t off = 0; off < stride; ++off) {
            for (int i = 0; i < L; ++i)
                line[std::size_t(i)] = vals[std::size_t(base + off + stride * i)];
            detail::fft_line(line, inverse);
            for (int i = 0; i < L; ++i)
                vals[std::size_t(base + off + stride * i)] = line[std::size_t(i)];
        }
    }
}

void check_axis(const LatticeBox& box, int axis, const char* where) {
    if (axis < 1 || axis > box.d)
        throw std::invalid_argument(std::string(where) + ": axis " + std::to_string(axis) +
                                    " out of range for d=" + std::to_string(box.d));
}

} // namespace

SpectralField dft_forward(const Field& f) {
    SpectralField F(f.box);
    F.coeffs = f.values;
    for (int j = 0; j < f.box.d; ++j) transform_axis(f.box, F.coeffs, j, false);
    return F;
}

Field dft_inverse(const SpectralField& F) {
    Field f(F.box);
    f.values = F.coeffs;
    for (int j = 0; j < F.box.d; ++j) transform_axis(F.box, f.values, j, true);
    const double inv = 1.0 / double(F.box.total);
    for (auto& v : f.values) v *= inv;
    return f;
}

Multiplier identity_multiplier(const LatticeBox& box) {
    return Multiplier{box, std::vector<cplx>(std::size_t(box.total), cplx(1.0, 0.0)), "id"};
}

namespace {

// per-axis frequency integer of a flat spectral index
inline int freq_component(const LatticeBox& box, std::int64_t flat, int axis0) {
    for (int j = box.d - 1; j > axis0; --j) flat /= box.L;
    return int(flat % box.L);
}

} // namespace

Multiplier partial_multiplier(const LatticeBox& box, int axis) {
    check_axis(box, axis, "partial_multiplier");
    Multiplier m{box, std::vector<cplx>(std::size_t(box.total)), "partial_" + std::to_string(axis)};
    for (std::int64_t i = 0; i < box.total; ++i) {
        int n = freq_component(box, i, axis - 1);
        double s = std::sin(std::numbers::pi * double(n) / double(box.L));
        m.values[std::size_t(i)] = cplx(0.0, 2.0 * s);
    }
    return m;
}

Multiplier laplacian_multiplier(const LatticeBox& box) {
    Multiplier m{box, std::vector<cplx>(std::size_t(box.total)), "laplacian"};
    for (std::int64_t i = 0; i < box.total; ++i) {
        double acc = 0.0;
        for (int j = 0; j < box.d; ++j) {
            int n = freq_component(box, i, j);
            double s = std::sin(std::numbers::pi * double(n) / double(box.L));
            acc += s * s;
        }
        m.values[std::size_t(i)] = cplx(-4.0 * acc, 0.0);
    }
    return m;
}

Multiplier k_multiplier(const LatticeBox& box) {
    Multiplier m{box, std::vector<cplx>(std::size_t(box.total)), "K"};
    for (std::int64_t i = 0; i < box.total; ++i) {
        double acc = 0.0;
        for (int j = 0; j < box.d; ++j) {
            int n = freq_component(box, i, j);
            double s = std::sin(std::numbers::pi * double(n) / double(box.L));
            acc += s * s;
        }
        m.values[std::size_t(i)] = cplx(2.0 * std::sqrt(acc), 0.0);
    }
    return m;
}

std::pair<Multiplier, Multiplier> propagator_pair(const LatticeBox& box, double t) {
    if (!std::isfinite(t))
        throw std::invalid_argument("propagator_pair: t must be finite");
    Multiplier K = k_multiplier(box);
    Multiplier c{box, std::vector<cplx>(std::size_t(box.total)), "cos(tK)"};
    Multiplier s{box, std::vector<cplx>(std::size_t(box.total)), "sin(tK)/K"};
    for (std::size_t i = 0; i < K.values.size(); ++i) {
        double k = K.values[i].real();
        double z = t * k;
        c.values[i] = cplx(std::cos(z), 0.0);
        double sinc;
        if (std::abs(z) < 1e-6) {
            // Taylor in z = tK keeps the removable singularity smooth and
            // accurate to ~1e-14 at the crossover.
            sinc = t * (1.0 - z * z / 6.0 + z * z * z * z / 120.0);
        } else {
            sinc = std::sin(z) / k;
        }
        s.values[i] = cplx(sinc, 0.0);
    }
    return {std::move(c), std::move(s)};
}

Multiplier compose(const Multiplier& a, const Multiplier& b) {
    require_same_box(a.box, b.box, "compose");
    Multiplier m{a.box, std::vector<cplx>(a.values.size()), a.label + "*" + b.label};
    for (std::size_t i = 0; i < a.values.size(); ++i) m.values[i] = a.values[i] * b.values[i];
    return m;
}

Multiplier scale(const Multiplier& a, cplx s) {
    Multiplier m{a.box, a.values, a.label + "*scalar"};
    for (auto& v : m.values) v *= s;
    return m;
}

Field apply(const Multiplier& mult, const Field& f) {
    require_same_box(mult.box, f.box, "apply");
    SpectralField F = dft_forward(f);
    apply_inplace(mult, F);
    return dft_inverse(F);
}

void apply_inplace(const Multiplier& mult, SpectralField& F) {
    require_same_box(mult.box, F.box, "apply_inplace");
    for (std::size_t i = 0; i < F.coeffs.size(); ++i) F.coeffs[i] *= mult.values[i];
}

double l2_norm(const Field& f) {
    double acc = 0.0;
    for (const auto& v : f.values) acc += std::norm(v);
    return std::sqrt(acc);
}

double spectral_l2_norm(const SpectralField& F) {
    double acc = 0.0;
    for (const auto& v : F.coeffs) acc += std::norm(v);
    return std::sqrt(acc / double(F.box.total));
}

} // namespace lattwave
