#pragma once

#include <vector>

#include "lattwave/common.hpp"

namespace lattwave::detail {

bool is_pow2(int n);

// In-place unnormalized transform of one line.
// forward:  a[n] <- sum_k a[k] exp(-2*pi*i*k*n/N)
// inverse:  same with + sign (the 1/N factor is applied by the caller).
// Radix-2 for power-of-two N, O(N^2) direct sum otherwise (boxes only require
// even N; non-power-of-two sizes stay small so the direct path is fine).
void fft_line(std::vector<cplx>& a, bool inverse);

// Direct O(N^2) evaluation of the same sums; used as the test oracle and as
// the fallback inside fft_line.
void dft_line(std::vector<cplx>& a, bool inverse);

} // namespace lattwave::detail
