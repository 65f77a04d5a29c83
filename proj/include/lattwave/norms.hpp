#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "lattwave/lattice.hpp"

namespace lattwave {

// Weighted sequence norm ||f <m>^alpha||_{l^p}. p = infinity takes the sup
// path; it is not approximated by large p.
struct NormSpec {
    double p = 2.0;
    double alpha = 0.0;

    static NormSpec l2() { return {2.0, 0.0}; }
    static NormSpec linf(double alpha = 0.0) { return {std::numeric_limits<double>::infinity(), alpha}; }
    bool is_inf() const { return std::isinf(p); }
};

double lp_alpha_norm(const Field& f, const NormSpec& spec);

// (sum over undirected torus edges of |f(u)-f(v)|^p)^{1/p}; this equals the
// usual (1/2 * sum over ordered adjacent pairs)^{1/p}. p = infinity gives the
// max edge difference. Zero exactly on constants.
double sobolev_seminorm(const Field& f, double p);

// sup_{alpha>0} alpha * #{k : |g(k)| >= alpha/<k>}, evaluated exactly by
// scanning the finitely many breakpoints alpha = |g(k)|<k> in sorted order.
double weak_l11_functional(const Field& g);

// max over the ensemble of ||op(f)||_spec / ||f||_spec. Fields with zero
// norm are rejected (the contract requires nonzero fields).
double empirical_operator_ratio(const std::function<Field(const Field&)>& op,
                                const NormSpec& spec,
                                const std::vector<Field>& ensemble);

// The documented adversarial ensemble: delta_0, the <m>^{-2} power decay,
// single Fourier modes (lowest and seam), plus n_random seeded Gaussians.
std::vector<Field> adversarial_ensemble(const LatticeBox& box, std::uint64_t seed, int n_random);

} // namespace lattwave
