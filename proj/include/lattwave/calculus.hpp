#pragma once

#include <vector>

#include "lattwave/lattice.hpp"

namespace lattwave {

// Direct-space axis derivative: convolution with the nonlocal kernel
//   phi(a) = -4i / (pi (4a^2 - 1)),  a in Z
// whose Fourier multiplier on the torus branch [0, 2pi) is 2i*sin(x/2).
// The kernel is purely imaginary and even in a (phi depends on a^2); its
// multiplier is odd on (-pi, pi) only because the [0, 2pi) branch of
// sin(x/2) is the periodic extension of |sin(x/2)|.
cplx infinite_kernel_value(std::int64_t a);   // phi(a) on the infinite lattice

struct Kernel {
    int axis = 1;           // 1-based, matches the derivative index
    LatticeBox box;
    // periodized values phi_per(a) = sum_{n in Z} phi(a + nL), indexed by the
    // unsigned offset a mod L (so values[u] = phi_per(signed(u)))
    std::vector<cplx> values;
    double tail_bound = 0.0;   // rigorous bound on the evaluation error per entry
    int tail_terms = 0;
};

// Periodization: partial sum over |n| <= tail_terms plus the exact remainder.
// The remainder of sum_n 1/(4(a+nL)^2 - 1) telescopes through the partial
// fractions 1/(4m^2-1) = (1/2)(1/(2m-1) - 1/(2m+1)) into digamma differences,
// so both one-sided tails are evaluated in closed form and tail_bound only
// covers floating-point error (a few 1e-15), never analytic truncation.
Kernel kernel_periodized(const LatticeBox& box, int axis, int tail_terms = 64);

// Circular convolution along the kernel's axis (the kernel vanishes off-axis).
Field conv_partial(const Field& f, int axis, const Kernel& kernel);

// Forward difference D_j u(m) = u(m + e_j) - u(m), periodic.
Field difference(const Field& f, int axis);

// Graph Laplacian: sum of the 2d neighbors minus 2d times the center.
Field stencil_laplacian(const Field& f);

// <f, g> = sum f conj(g)
cplx inner(const Field& f, const Field& g);

double digamma(double x);   // exposed for tests of the periodization remainder

} // namespace lattwave
