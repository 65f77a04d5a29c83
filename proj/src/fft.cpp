#include "lattwave/fft.hpp"

#include <cmath>
#include <numbers>

namespace lattwave::detail {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

namespace {

// Iterative radix-2 Cooley-Tukey, bit-reversal order, twiddles from
// std::polar per stage. Deterministic: no threading, fixed operation order.
void fft_pow2(std::vector<cplx>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * std::numbers::pi / double(len);
        const cplx wlen = std::polar(1.0, ang);
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                cplx u = a[i + k];
                cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

} // namespace

void dft_line(std::vector<cplx>& a, bool inverse) {
    const std::size_t n = a.size();
    const double sign = inverse ? 1.0 : -1.0;
    std::vector<cplx> out(n, cplx(0.0, 0.0));
    for (std::size_t f = 0; f < n; ++f) {
        cplx acc(0.0, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            double ang = sign * 2.0 * std::numbers::pi * double(f * k % n) / double(n);
            acc += a[k] * std::polar(1.0, ang);
        }
        out[f] = acc;
    }
    a = std::move(out);
}

void fft_line(std::vector<cplx>& a, bool inverse) {
    if (is_pow2(int(a.size())))
        fft_pow2(a, inverse);
    else
        dft_line(a, inverse);
}

} // namespace lattwave::detail
