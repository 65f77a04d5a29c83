#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lattwave/lattice.hpp"

namespace lattwave {

// Transform conventions on the discrete torus, matching the lattice layout
// (frequencies n_j in {0,...,L-1}, x_j = 2*pi*n_j/L, row-major):
//   forward:  F(u)(n) = sum_k u(k) exp(-2*pi*i*k.n/L)
//   inverse:  u(k) = L^{-d} sum_n F(u)(n) exp(+2*pi*i*k.n/L)
// Parseval: sum_k |u(k)|^2 = L^{-d} sum_n |F(u)(n)|^2.
//
// The frequency range [0, 2pi) rather than [-pi, pi) is deliberate:
// sin(x_j/2) >= 0 on it, so the axis-derivative multiplier 2i*sin(x_j/2)
// composes with a plain square root into K(x), and on Z the identity
// "first derivative = i * sqrt(-Laplacian)" holds without branch cuts.
struct SpectralField {
    LatticeBox box;
    std::vector<cplx> coeffs;

    SpectralField() = default;
    explicit SpectralField(const LatticeBox& b) : box(b), coeffs(b.total, cplx(0.0, 0.0)) {}
};

struct Multiplier {
    LatticeBox box;
    std::vector<cplx> values;
    std::string label;
};

SpectralField dft_forward(const Field& f);
Field dft_inverse(const SpectralField& F);

Multiplier identity_multiplier(const LatticeBox& box);
Multiplier partial_multiplier(const LatticeBox& box, int axis);  // axis in 1..d: 2i*sin(pi*n_j/L)
Multiplier laplacian_multiplier(const LatticeBox& box);          // -4 sum_j sin^2(pi*n_j/L)
Multiplier k_multiplier(const LatticeBox& box);                  // 2 sqrt(sum_j sin^2(pi*n_j/L))

// cos(tK) and sin(tK)/K with the removable singularity at K=0 handled by a
// Taylor branch for |tK| < 1e-6; |sinc_t| <= |t| everywhere.
std::pair<Multiplier, Multiplier> propagator_pair(const LatticeBox& box, double t);

Multiplier compose(const Multiplier& a, const Multiplier& b);  // pointwise product
Multiplier scale(const Multiplier& a, cplx s);

Field apply(const Multiplier& mult, const Field& f);
void apply_inplace(const Multiplier& mult, SpectralField& F);

double l2_norm(const Field& f);
double spectral_l2_norm(const SpectralField& F);   // L^{-d/2} * ||coeffs||_2 (Parseval-matched)

} // namespace lattwave
