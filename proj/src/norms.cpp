#include "lattwave/norms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lattwave {

double lp_alpha_norm(const Field& f, const NormSpec& spec) {
    if (!(spec.p >= 1.0) && !spec.is_inf())
        throw std::invalid_argument("lp_alpha_norm: p must be >= 1 or infinity");
    if (spec.is_inf()) {
        double m = 0.0;
        for (std::int64_t i = 0; i < f.box.total; ++i) {
            double w = spec.alpha == 0.0 ? 1.0 : std::pow(weight_at(f.box, i), spec.alpha);
            m = std::max(m, std::abs(f.values[std::size_t(i)]) * w);
        }
        return m;
    }
    double acc = 0.0;
    for (std::int64_t i = 0; i < f.box.total; ++i) {
        double w = spec.alpha == 0.0 ? 1.0 : std::pow(weight_at(f.box, i), spec.alpha);
        acc += std::pow(std::abs(f.values[std::size_t(i)]) * w, spec.p);
    }
    return std::pow(acc, 1.0 / spec.p);
}

double sobolev_seminorm(const Field& f, double p) {
    const bool inf = std::isinf(p);
    if (!inf && !(p >= 1.0))
        throw std::invalid_argument("sobolev_seminorm: p must be >= 1 or infinity");
    const LatticeBox& box = f.box;
    const int L = box.L;
    double acc = 0.0;
    std::int64_t stride = box.total;
    for (int j = 0; j < box.d; ++j) {
        stride /= L;
        const std::int64_t block = stride * L;
        for (std::int64_t base = 0; base < box.total; base += block) {
            for (std::int64_t off = 0; off < stride; ++off) {
                for (int i = 0; i < L; ++i) {
                    int up = i + 1 == L ? 0 : i + 1;
                    double diff = std::abs(f.values[std::size_t(base + off + stride * up)] -
                                           f.values[std::size_t(base + off + stride * i)]);
                    if (inf)
                        acc = std::max(acc, diff);
                    else
                        acc += std::pow(diff, p);
                }
            }
        }
    }
    return inf ? acc : std::pow(acc, 1.0 / p);
}

double weak_l11_functional(const Field& g) {
    std::vector<double> w(std::size_t(g.box.total));
    for (std::int64_t i = 0; i < g.box.total; ++i)
        w[std::size_t(i)] = std::abs(g.values[std::size_t(i)]) * weight_at(g.box, i);
    std::sort(w.begin(), w.end(), std::greater<double>());
    double best = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        if (w[j] == 0.0) break;
        best = std::max(best, double(j + 1) * w[j]);
    }
    return best;
}

double empirical_operator_ratio(const std::function<Field(const Field&)>& op,
                                const NormSpec& spec,
                                const std::vector<Field>& ensemble) {
    if (ensemble.empty())
        throw std::invalid_argument("empirical_operator_ratio: empty ensemble");
    double best = 0.0;
    for (const Field& f : ensemble) {
        double denom = lp_alpha_norm(f, spec);
        if (denom == 0.0)
            throw std::invalid_argument("empirical_operator_ratio: ensemble contains a field "
                                        "with zero norm");
        best = std::max(best, lp_alpha_norm(op(f), spec) / denom);
    }
    return best;
}

std::vector<Field> adversarial_ensemble(const LatticeBox& box, std::uint64_t seed, int n_random) {
    std::vector<Field> out;
    out.push_back(delta_field(box));

    Field decay(box);
    for (std::int64_t i = 0; i < box.total; ++i) {
        double w = weight_at(box, i);
        decay[i] = cplx(1.0 / (w * w), 0.0);
    }
    out.push_back(std::move(decay));

    // single Fourier modes: the lowest nonzero one and the seam mode
    for (int n : {1, box.L / 2}) {
        Field mode(box);
        for (std::int64_t i = 0; i < box.total; ++i) {
            Coord m = site_coords(box, i);
            double phase = 2.0 * std::numbers::pi * double(n) * double(m[0]) / double(box.L);
            mode[i] = std::polar(1.0, phase);
        }
        out.push_back(std::move(mode));
    }

    Rng rng(seed);
    for (int r = 0; r < n_random; ++r) {
        Field f(box);
        for (auto& v : f.values) v = rng.cnormal();
        out.push_back(std::move(f));
    }
    return out;
}

} // namespace lattwave
