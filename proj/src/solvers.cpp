#include "lattwave/solvers.hpp"

#include <algorithm>
#include <cmath>

#include "lattwave/norms.hpp"

namespace lattwave {

MetricFn identity_metric() {
    return [](cplx, cplx, const std::array<cplx, 3>&, std::array<double, 9>& g) {
        g.fill(0.0);
        g[0] = g[4] = g[8] = 1.0;
    };
}

MetricFn one_plus_u2_metric() {
    return [](cplx u, cplx, const std::array<cplx, 3>&, std::array<double, 9>& g) {
        g.fill(0.0);
        double v = 1.0 + std::norm(u);
        g[0] = g[4] = g[8] = v;
    };
}

double state_diff_a_norm(const WaveState& a, const WaveState& b, int k) {
    NormSpec spec{2.0, double(k)};
    return lp_alpha_norm(sub(a.u, b.u), spec) + lp_alpha_norm(sub(a.ut, b.ut), spec);
}

namespace {

bool forcing_needs_du(const Nonlinearity& f) {
    return f.kind == ForcingKind::dj_squared || f.kind == ForcingKind::custom;
}

cplx eval_forcing(const Nonlinearity& f, cplx u, cplx ut, const std::array<cplx, 3>& du) {
    switch (f.kind) {
        case ForcingKind::none: return cplx(0.0, 0.0);
        case ForcingKind::power: {
            double a = std::abs(u);
            if (a == 0.0) return cplx(0.0, 0.0);
            return f.mu * std::pow(a, f.p - 1.0) * u;
        }
        case ForcingKind::dt_squared: return cplx(std::norm(ut), 0.0);
        case ForcingKind::dj_squared: return cplx(std::norm(du[std::size_t(f.axis - 1)]), 0.0);
        case ForcingKind::custom: return f.custom(u, ut, du);
    }
    return cplx(0.0, 0.0);
}

// Evaluates dv/dt = g^{jk} d_{jk} u + F(u,u') + S(t) - b v - b^j d_j u - c u.
// One instance per evolution; reuses internal buffers, not thread-safe.
class RhsEvaluator {
  public:
    RhsEvaluator(const LatticeBox& box, const EquationSpec& spec)
        : box_(box), spec_(spec), lap_(laplacian_multiplier(box)) {
        has_bj_ = false;
        for (int j = 0; j < box.d; ++j)
            if (spec.bj[std::size_t(j)] != 0.0) has_bj_ = true;
        needs_du_ = bool(spec.metric) || forcing_needs_du(spec.forcing) || has_bj_;
        if (spec.metric || needs_du_)
            for (int j = 0; j < box.d; ++j) partial_.push_back(partial_multiplier(box, j + 1));
        if (spec.metric)
            for (int j = 0; j < box.d; ++j)
                for (int k = j; k < box.d; ++k)
                    second_.push_back(compose(partial_[std::size_t(j)], partial_[std::size_t(k)]));
    }

    void eval(const Field& u, const Field& v, double t, Field& out) {
        const std::int64_t n = box_.total;
        SpectralField U = dft_forward(u);

        std::array<const Field*, 3> du{nullptr, nullptr, nullptr};
        if (needs_du_) {
            du_buf_.clear();
            for (int j = 0; j < box_.d; ++j) {
                SpectralField D = U;
                apply_inplace(partial_[std::size_t(j)], D);
                du_buf_.push_back(dft_inverse(D));
            }
            for (int j = 0; j < box_.d; ++j) du[std::size_t(j)] = &du_buf_[std::size_t(j)];
        }

        if (!spec_.metric) {
            SpectralField Lap = U;
            apply_inplace(lap_, Lap);
            out = dft_inverse(Lap);
        } else {
            d2_buf_.clear();
            for (const auto& m : second_) {
                SpectralField D = U;
                apply_inplace(m, D);
                d2_buf_.push_back(dft_inverse(D));
            }
            out = Field(box_);
            std::array<cplx, 3> dus{};
            std::array<double, 9> g{};
            for (std::int64_t i = 0; i < n; ++i) {
                for (int j = 0; j < box_.d; ++j) dus[std::size_t(j)] = (*du[std::size_t(j)])[i];
                spec_.metric(u[i], v[i], dus, g);
                cplx acc(0.0, 0.0);
                std::size_t idx = 0;
                for (int j = 0; j < box_.d; ++j) {
                    for (int k = j; k < box_.d; ++k, ++idx) {
                        double factor = (j == k) ? g[std::size_t(3 * j + k)]
                                                 : 2.0 * g[std::size_t(3 * j + k)];
                        acc += factor * d2_buf_[idx][i];
                    }
                }
                out[i] = acc;
            }
        }

        if (spec_.forcing.kind != ForcingKind::none) {
            std::array<cplx, 3> dus{};
            for (std::int64_t i = 0; i < n; ++i) {
                if (needs_du_)
                    for (int j = 0; j < box_.d; ++j) dus[std::size_t(j)] = (*du[std::size_t(j)])[i];
                out[i] += eval_forcing(spec_.forcing, u[i], v[i], dus);
            }
        }
        if (spec_.source) {
            Field s = spec_.source(t);
            require_same_box(s.box, box_, "RhsEvaluator source");
            for (std::int64_t i = 0; i < n; ++i) out[i] += s[i];
        }
        if (spec_.b != 0.0)
            for (std::int64_t i = 0; i < n; ++i) out[i] -= spec_.b * v[i];
        if (has_bj_)
            for (int j = 0; j < box_.d; ++j)
                if (spec_.bj[std::size_t(j)] != 0.0)
                    for (std::int64_t i = 0; i < n; ++i)
                        out[i] -= spec_.bj[std::size_t(j)] * (*du[std::size_t(j)])[i];
        if (spec_.c != 0.0)
            for (std::int64_t i = 0; i < n; ++i) out[i] -= spec_.c * u[i];
    }

    // sup over sites of sum_jk |g^{jk}| at the given state (stability metric)
    double metric_sup(const Field& u, const Field& v) {
        if (!spec_.metric) return double(box_.d);
        SpectralField U = dft_forward(u);
        du_buf_.clear();
        if (needs_du_) {
            for (int j = 0; j < box_.d; ++j) {
                SpectralField D = U;
                apply_inplace(partial_[std::size_t(j)], D);
                du_buf_.push_back(dft_inverse(D));
            }
        }
        double best = 0.0;
        std::array<cplx, 3> dus{};
        std::array<double, 9> g{};
        for (std::int64_t i = 0; i < box_.total; ++i) {
            if (needs_du_)
                for (int j = 0; j < box_.d; ++j) dus[std::size_t(j)] = du_buf_[std::size_t(j)][i];
            spec_.metric(u[i], v[i], dus, g);
            double s = 0.0;
            for (int j = 0; j < box_.d; ++j)
                for (int k = 0; k < box_.d; ++k) s += std::abs(g[std::size_t(3 * j + k)]);
            best = std::max(best, s);
        }
        return best;
    }

  private:
    LatticeBox box_;
    EquationSpec spec_;
    Multiplier lap_;
    std::vector<Multiplier> partial_;
    std::vector<Multiplier> second_;   // d_{jk}, j <= k, row-major order
    std::vector<Field> du_buf_;
    std::vector<Field> d2_buf_;
    bool needs_du_ = false;
    bool has_bj_ = false;
};

void rk4_advance(RhsEvaluator& rhs, WaveState& s, double h) {
    const Field& u = s.u;
    const Field& v = s.ut;
    Field k1v;
    rhs.eval(u, v, s.t, k1v);
    const Field& k1u = v;

    Field u2 = u, v2 = v;
    axpy(u2, 0.5 * h, k1u);
    axpy(v2, 0.5 * h, k1v);
    Field k2v;
    rhs.eval(u2, v2, s.t + 0.5 * h, k2v);
    const Field& k2u = v2;

    Field u3 = u, v3 = v;
    axpy(u3, 0.5 * h, k2u);
    axpy(v3, 0.5 * h, k2v);
    Field k3v;
    rhs.eval(u3, v3, s.t + 0.5 * h, k3v);
    const Field& k3u = v3;

    Field u4 = u, v4 = v;
    axpy(u4, h, k3u);
    axpy(v4, h, k3v);
    Field k4v;
    rhs.eval(u4, v4, s.t + h, k4v);
    const Field& k4u = v4;

    Field nu = u, nv = v;
    const double w = h / 6.0;
    for (std::int64_t i = 0; i < u.box.total; ++i) {
        nu[i] += w * (k1u[i] + 2.0 * k2u[i] + 2.0 * k3u[i] + k4u[i]);
        nv[i] += w * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
    }
    s.u = std::move(nu);
    s.ut = std::move(nv);
    s.t += h;
}

TrajectorySample make_sample(const WaveState& s, const EquationSpec& spec, int k) {
    TrajectorySample smp;
    smp.t = s.t;
    smp.energy = (spec.forcing.kind == ForcingKind::power)
                     ? nlw_energy(s, spec.forcing.mu, spec.forcing.p)
                     : linear_energy(s);
    smp.a_value = energy_a(s, k).value;
    smp.sup_u = sup_abs(s.u);
    smp.sup_ut = sup_abs(s.ut);
    smp.seam_tail = std::max(seam_tail_fraction(s.u), seam_tail_fraction(s.ut));
    return smp;
}

void validate_rk4_stability(double dt, int d, double metric_sup) {
    double bound = 0.5 / std::sqrt(double(d) * std::max(metric_sup, 1e-300));
    if (dt > bound)
        throw std::invalid_argument("rk4: dt=" + format_g17(dt) + " exceeds the stability bound " +
                                    format_g17(bound) + " (0.5/sqrt(d*sup|g|))");
}

} // namespace

WaveState exact_linear_step(const WaveState& state, double dt,
                            const std::function<Field(double)>& source) {
    require_same_box(state.u.box, state.ut.box, "exact_linear_step");
    const LatticeBox& box = state.u.box;
    auto [cos_dt, sinc_dt] = propagator_pair(box, dt);
    Multiplier K = k_multiplier(box);

    SpectralField U = dft_forward(state.u);
    SpectralField V = dft_forward(state.ut);
    SpectralField Un(box), Vn(box);
    for (std::int64_t i = 0; i < box.total; ++i) {
        auto idx = std::size_t(i);
        cplx c = cos_dt.values[idx];
        cplx s = sinc_dt.values[idx];
        cplx k2 = -K.values[idx] * K.values[idx];  // = laplacian multiplier value
        Un.coeffs[idx] = c * U.coeffs[idx] + s * V.coeffs[idx];
        Vn.coeffs[idx] = k2 * s * U.coeffs[idx] + c * V.coeffs[idx];
    }

    if (source) {
        // Duhamel, Simpson on [t, t+dt]:
        //   u  += int sin(K(t+dt-s))/K S(s) ds
        //   u_t += int cos(K(t+dt-s))   S(s) ds
        auto [cos_half, sinc_half] = propagator_pair(box, 0.5 * dt);
        SpectralField S0 = dft_forward(source(state.t));
        SpectralField S1 = dft_forward(source(state.t + 0.5 * dt));
        SpectralField S2 = dft_forward(source(state.t + dt));
        const double w = dt / 6.0;
        for (std::int64_t i = 0; i < box.total; ++i) {
            auto idx = std::size_t(i);
            // weights at s = t, t+dt/2, t+dt correspond to lags dt, dt/2, 0
            cplx iu = sinc_dt.values[idx] * S0.coeffs[idx] +
                      4.0 * sinc_half.values[idx] * S1.coeffs[idx];
            cplx iv = cos_dt.values[idx] * S0.coeffs[idx] +
                      4.0 * cos_half.values[idx] * S1.coeffs[idx] + S2.coeffs[idx];
            Un.coeffs[idx] += w * iu;
            Vn.coeffs[idx] += w * iv;
        }
    }

    WaveState out;
    out.u = dft_inverse(Un);
    out.ut = dft_inverse(Vn);
    out.t = state.t + dt;
    return out;
}

WaveState rk4_step(const WaveState& state, double dt, const EquationSpec& spec) {
    require_same_box(state.u.box, state.ut.box, "rk4_step");
    RhsEvaluator rhs(state.u.box, spec);
    validate_rk4_stability(dt, state.u.box.d, rhs.metric_sup(state.u, state.ut));
    WaveState s = state;
    rk4_advance(rhs, s, dt);
    return s;
}

namespace {

void push_sample(Trajectory& traj, const WaveState& s, const EquationSpec& spec,
                 const SolverConfig& cfg) {
    traj.samples.push_back(make_sample(s, spec, cfg.k));
    if (cfg.keep_states) traj.states.push_back(s);
}

bool threshold_hit(const Trajectory& traj, const SolverConfig& cfg) {
    return cfg.stop_when_a_exceeds > 0.0 &&
           traj.samples.back().a_value >= cfg.stop_when_a_exceeds;
}

Trajectory evolve_exact_linear(const Field& f, const Field& g, const EquationSpec& spec,
                               const SolverConfig& cfg) {
    Trajectory traj;
    WaveState s{f, g, 0.0};
    push_sample(traj, s, spec, cfg);
    if (threshold_hit(traj, cfg)) {
        traj.stop = StopReason::threshold;
        traj.final_state = s;
        return traj;
    }
    std::int64_t step_index = 0;
    const double tiny = 1e-12 * std::max(1.0, cfg.t_max);
    while (s.t < cfg.t_max - tiny) {
        double h = std::min(cfg.dt, cfg.t_max - s.t);
        s = exact_linear_step(s, h, spec.source);
        ++step_index;
        bool at_end = s.t >= cfg.t_max - tiny;
        if (step_index % cfg.sample_every == 0 || at_end) {
            push_sample(traj, s, spec, cfg);
            if (threshold_hit(traj, cfg)) {
                traj.stop = StopReason::threshold;
                traj.final_state = s;
                return traj;
            }
        }
    }
    traj.final_state = s;
    traj.completed = true;
    traj.stop = StopReason::reached_t_max;
    return traj;
}

Trajectory evolve_rk4(const Field& f, const Field& g, const EquationSpec& spec,
                      const SolverConfig& cfg) {
    Trajectory traj;
    WaveState s{f, g, 0.0};
    RhsEvaluator rhs(s.u.box, spec);
    validate_rk4_stability(cfg.dt, s.u.box.d, rhs.metric_sup(s.u, s.ut));

    push_sample(traj, s, spec, cfg);
    if (threshold_hit(traj, cfg)) {
        traj.stop = StopReason::threshold;
        traj.final_state = s;
        return traj;
    }

    double dt_cur = cfg.dt;
    int halvings = 0;
    std::int64_t step_index = 0;
    const double tiny = 1e-12 * std::max(1.0, cfg.t_max);
    while (s.t < cfg.t_max - tiny) {
        double h = std::min(dt_cur, cfg.t_max - s.t);
        WaveState cand = s;
        rk4_advance(rhs, cand, h);
        bool finite = all_finite(cand.u) && all_finite(cand.ut);
        double growth = finite ? sup_abs(cand.u) + sup_abs(cand.ut)
                               : std::numeric_limits<double>::infinity();
        if (!finite || growth > cfg.blowup.sup_threshold) {
            if (halvings < cfg.blowup.max_halvings) {
                dt_cur *= 0.5;
                ++halvings;
                continue;
            }
            BlowUpRecord rec;
            rec.t = s.t + h;
            rec.sup_u = sup_abs(s.u);
            rec.sup_ut = sup_abs(s.ut);
            rec.halvings = halvings;
            traj.blowup = rec;
            traj.stop = StopReason::blowup;
            traj.final_state = s;
            if (traj.samples.empty() || traj.samples.back().t < s.t)
                push_sample(traj, s, spec, cfg);
            return traj;
        }
        s = std::move(cand);
        ++step_index;
        bool at_end = s.t >= cfg.t_max - tiny;
        if (step_index % cfg.sample_every == 0 || at_end) {
            push_sample(traj, s, spec, cfg);
            if (threshold_hit(traj, cfg)) {
                traj.stop = StopReason::threshold;
                traj.final_state = s;
                return traj;
            }
        }
    }
    traj.final_state = s;
    traj.completed = true;
    traj.stop = StopReason::reached_t_max;
    return traj;
}

} // namespace

PicardResult picard_solve(const Field& f, const Field& g, const EquationSpec& spec,
                          const SolverConfig& config) {
    require_same_box(f.box, g.box, "picard_solve");
    const LatticeBox& box = f.box;
    const int d = box.d;

    const bool needs_prev_du = bool(spec.metric) || forcing_needs_du(spec.forcing);

    struct IterGrid {
        std::vector<Field> u, v, w;                  // value, velocity, acceleration
        std::vector<std::vector<Field>> du, dv;      // [axis][node], filled on demand
    };

    std::vector<Multiplier> partials;
    for (int j = 0; j < d; ++j) partials.push_back(partial_multiplier(box, j + 1));

    auto fill_derivative_nodes = [&](IterGrid& grid) {
        if (!needs_prev_du) return;
        const std::size_t n = grid.u.size();
        grid.du.assign(std::size_t(d), {});
        grid.dv.assign(std::size_t(d), {});
        for (int j = 0; j < d; ++j) {
            grid.du[std::size_t(j)].reserve(n);
            grid.dv[std::size_t(j)].reserve(n);
        }
        for (std::size_t i = 0; i < n; ++i) {
            SpectralField U = dft_forward(grid.u[i]);
            SpectralField V = dft_forward(grid.v[i]);
            for (int j = 0; j < d; ++j) {
                SpectralField DU = U, DV = V;
                apply_inplace(partials[std::size_t(j)], DU);
                apply_inplace(partials[std::size_t(j)], DV);
                grid.du[std::size_t(j)].push_back(dft_inverse(DU));
                grid.dv[std::size_t(j)].push_back(dft_inverse(DV));
            }
        }
    };

    // cubic Hermite on the node grid: value nodes y with derivative nodes dy
    auto hermite = [](const std::vector<Field>& y, const std::vector<Field>& dy, double h,
                      double tau) -> Field {
        const std::size_t nseg = y.size() - 1;
        double pos = tau / h;
        auto idx = std::size_t(std::clamp<double>(std::floor(pos + 1e-12), 0.0, double(nseg - 1)));
        double sloc = pos - double(idx);
        if (std::abs(sloc) < 1e-13) return y[idx];
        if (std::abs(sloc - 1.0) < 1e-13) return y[idx + 1];
        double s2 = sloc * sloc, s3 = s2 * sloc;
        double h00 = 1.0 - 3.0 * s2 + 2.0 * s3;
        double h10 = sloc - 2.0 * s2 + s3;
        double h01 = 3.0 * s2 - 2.0 * s3;
        double h11 = s3 - s2;
        Field out = scale(y[idx], h00);
        axpy(out, h * h10, dy[idx]);
        axpy(out, h01, y[idx + 1]);
        axpy(out, h * h11, dy[idx + 1]);
        return out;
    };

    // one frozen-coefficient stage: coefficient fields and forcing at time tau
    struct FrozenStage {
        std::vector<Field> gjk;  // j <= k, row-major pair order; empty => identity metric
        Field force;             // F(prev, prev') + S(tau)
        bool has_force = false;
    };

    std::vector<Multiplier> seconds;
    for (int j = 0; j < d; ++j)
        for (int k = j; k < d; ++k) seconds.push_back(compose(partials[std::size_t(j)], partials[std::size_t(k)]));
    Multiplier lap = laplacian_multiplier(box);

    auto make_stage = [&](const IterGrid* prev, double h, double tau) -> FrozenStage {
        FrozenStage st;
        Field up, vp;
        std::vector<Field> dup(static_cast<std::size_t>(d));
        if (prev) {
            up = hermite(prev->u, prev->v, h, tau);
            vp = hermite(prev->v, prev->w, h, tau);
            if (needs_prev_du)
                for (int j = 0; j < d; ++j)
                    dup[std::size_t(j)] = hermite(prev->du[std::size_t(j)], prev->dv[std::size_t(j)], h, tau);
        } else {
            up = Field(box);
            vp = Field(box);
            if (needs_prev_du)
                for (int j = 0; j < d; ++j) dup[std::size_t(j)] = Field(box);
        }
        if (spec.metric) {
            st.gjk.assign(seconds.size(), Field(box));
            std::array<cplx, 3> dus{};
            std::array<double, 9> gm{};
            for (std::int64_t i = 0; i < box.total; ++i) {
                if (needs_prev_du)
                    for (int j = 0; j < d; ++j) dus[std::size_t(j)] = dup[std::size_t(j)][i];
                spec.metric(up[i], vp[i], dus, gm);
                std::size_t idx = 0;
                for (int j = 0; j < d; ++j)
                    for (int k = j; k < d; ++k, ++idx) {
                        double factor = (j == k) ? gm[std::size_t(3 * j + k)]
                                                 : 2.0 * gm[std::size_t(3 * j + k)];
                        st.gjk[idx][i] = factor;
                    }
            }
        }
        if (spec.forcing.kind != ForcingKind::none || spec.source) {
            st.force = Field(box);
            st.has_force = true;
            if (spec.forcing.kind != ForcingKind::none) {
                std::array<cplx, 3> dus{};
                for (std::int64_t i = 0; i < box.total; ++i) {
                    if (needs_prev_du)
                        for (int j = 0; j < d; ++j) dus[std::size_t(j)] = dup[std::size_t(j)][i];
                    st.force[i] = eval_forcing(spec.forcing, up[i], vp[i], dus);
                }
            }
            if (spec.source) {
                Field s = spec.source(tau);
                for (std::int64_t i = 0; i < box.total; ++i) st.force[i] += s[i];
            }
        }
        return st;
    };

    // frozen linear RHS at one stage
    auto frozen_rhs = [&](const FrozenStage& st, const Field& u, const Field& v, Field& out) {
        SpectralField U = dft_forward(u);
        std::vector<Field> du(static_cast<std::size_t>(d));
        bool want_du = false;
        for (int j = 0; j < d; ++j)
            if (spec.bj[std::size_t(j)] != 0.0) want_du = true;
        if (want_du)
            for (int j = 0; j < d; ++j) {
                SpectralField D = U;
                apply_inplace(partials[std::size_t(j)], D);
                du[std::size_t(j)] = dft_inverse(D);
            }
        if (st.gjk.empty()) {
            SpectralField Lap = U;
            apply_inplace(lap, Lap);
            out = dft_inverse(Lap);
        } else {
            out = Field(box);
            for (std::size_t m = 0; m < seconds.size(); ++m) {
                SpectralField D = U;
                apply_inplace(seconds[m], D);
                Field dm = dft_inverse(D);
                for (std::int64_t i = 0; i < box.total; ++i) out[i] += st.gjk[m][i] * dm[i];
            }
        }
        if (st.has_force)
            for (std::int64_t i = 0; i < box.total; ++i) out[i] += st.force[i];
        if (spec.b != 0.0)
            for (std::int64_t i = 0; i < box.total; ++i) out[i] -= spec.b * v[i];
        if (want_du)
            for (int j = 0; j < d; ++j)
                if (spec.bj[std::size_t(j)] != 0.0)
                    for (std::int64_t i = 0; i < box.total; ++i)
                        out[i] -= spec.bj[std::size_t(j)] * du[std::size_t(j)][i];
        if (spec.c != 0.0)
            for (std::int64_t i = 0; i < box.total; ++i) out[i] -= spec.c * u[i];
    };

    PicardDiagnostics diag;
    double window = config.picard.window;
    if (window <= 0.0) throw std::invalid_argument("picard_solve: window must be positive");

    for (int halving = 0; halving <= config.picard.max_window_halvings; ++halving) {
        const int nsteps = std::max<int>(1, int(std::llround(window / config.dt)));
        const double h = window / double(nsteps);

        IterGrid prev;                // unused until the first iterate is stored
        bool have_prev = false;
        diag.sup_cm.clear();
        diag.iterations = 0;
        bool converged = false;
        bool need_restart = false;

        for (int m = 0; m < config.picard.max_iters && !converged && !need_restart; ++m) {
            // stage data: nodes 0..nsteps at t, plus midpoints
            std::vector<FrozenStage> at_node(std::size_t(nsteps) + 1);
            std::vector<FrozenStage> at_half(static_cast<std::size_t>(nsteps));
            const IterGrid* pgrid = have_prev ? &prev : nullptr;
            for (int i = 0; i <= nsteps; ++i) at_node[std::size_t(i)] = make_stage(pgrid, h, h * i);
            for (int i = 0; i < nsteps; ++i) at_half[std::size_t(i)] = make_stage(pgrid, h, h * (i + 0.5));

            IterGrid cur;
            cur.u.reserve(std::size_t(nsteps) + 1);
            cur.v.reserve(std::size_t(nsteps) + 1);
            cur.w.reserve(std::size_t(nsteps) + 1);
            Field u = f, v = g;
            Field w0;
            frozen_rhs(at_node[0], u, v, w0);
            cur.u.push_back(u);
            cur.v.push_back(v);
            cur.w.push_back(w0);

            for (int i = 0; i < nsteps; ++i) {
                // RK4 with the frozen linear operator
                Field k1v = cur.w.back();   // RHS at the node, already computed
                const Field& k1u = v;
                Field u2 = u, v2 = v;
                axpy(u2, 0.5 * h, k1u);
                axpy(v2, 0.5 * h, k1v);
                Field k2v;
                frozen_rhs(at_half[std::size_t(i)], u2, v2, k2v);
                const Field& k2u = v2;
                Field u3 = u, v3 = v;
                axpy(u3, 0.5 * h, k2u);
                axpy(v3, 0.5 * h, k2v);
                Field k3v;
                frozen_rhs(at_half[std::size_t(i)], u3, v3, k3v);
                const Field& k3u = v3;
                Field u4 = u, v4 = v;
                axpy(u4, h, k3u);
                axpy(v4, h, k3v);
                Field k4v;
                frozen_rhs(at_node[std::size_t(i) + 1], u4, v4, k4v);
                const Field& k4u = v4;

                const double wgt = h / 6.0;
                for (std::int64_t s = 0; s < box.total; ++s) {
                    u[s] += wgt * (k1u[s] + 2.0 * k2u[s] + 2.0 * k3u[s] + k4u[s]);
                    v[s] += wgt * (k1v[s] + 2.0 * k2v[s] + 2.0 * k3v[s] + k4v[s]);
                }
                if (!all_finite(u) || !all_finite(v) ||
                    sup_abs(u) + sup_abs(v) > config.blowup.sup_threshold)
                    throw std::runtime_error("picard_solve: frozen-coefficient iterate exceeded "
                                             "the blow-up threshold inside the window");
                Field wn;
                frozen_rhs(at_node[std::size_t(i) + 1], u, v, wn);
                cur.u.push_back(u);
                cur.v.push_back(v);
                cur.w.push_back(wn);
            }
            ++diag.iterations;

            if (have_prev) {
                double cm = 0.0;
                NormSpec nk{2.0, double(config.k)};
                for (std::size_t i = 0; i < cur.u.size(); ++i) {
                    double dnorm = lp_alpha_norm(sub(cur.u[i], prev.u[i]), nk) +
                                   lp_alpha_norm(sub(cur.v[i], prev.v[i]), nk);
                    cm = std::max(cm, dnorm);
                }
                diag.sup_cm.push_back(cm);
                std::size_t nc = diag.sup_cm.size();
                if (cm < config.picard.tol) {
                    converged = true;
                } else if (nc >= 2 && diag.sup_cm[nc - 2] > config.picard.tol &&
                           cm >= 0.5 * diag.sup_cm[nc - 2]) {
                    need_restart = true;   // no contraction: window too long
                }
            }
            fill_derivative_nodes(cur);
            prev = std::move(cur);
            have_prev = true;
        }

        if (converged) {
            diag.converged = true;
            diag.window = window;
            diag.window_halvings = halving;

            // PDE residual of the fixed point via centered second differences
            double res = 0.0;
            const int nsteps_used = int(prev.u.size()) - 1;
            std::array<cplx, 3> dus{};
            std::array<double, 9> gm{};
            for (int i = 1; i < nsteps_used; ++i) {
                Field dtt = prev.u[std::size_t(i + 1)];
                axpy(dtt, cplx(-2.0, 0.0), prev.u[std::size_t(i)]);
                axpy(dtt, cplx(1.0, 0.0), prev.u[std::size_t(i - 1)]);
                double inv_h2 = 1.0 / (h * h);

                // nonlinear RHS at the node itself
                FrozenStage self;
                {
                    // coefficients from the converged iterate at node i
                    if (spec.metric) {
                        self.gjk.assign(seconds.size(), Field(box));
                        for (std::int64_t s = 0; s < box.total; ++s) {
                            if (needs_prev_du)
                                for (int j = 0; j < d; ++j)
                                    dus[std::size_t(j)] = prev.du[std::size_t(j)][std::size_t(i)][s];
                            spec.metric(prev.u[std::size_t(i)][s], prev.v[std::size_t(i)][s], dus, gm);
                            std::size_t idx = 0;
                            for (int j = 0; j < d; ++j)
                                for (int k = j; k < d; ++k, ++idx) {
                                    double factor = (j == k) ? gm[std::size_t(3 * j + k)]
                                                             : 2.0 * gm[std::size_t(3 * j + k)];
                                    self.gjk[idx][s] = factor;
                                }
                        }
                    }
                    if (spec.forcing.kind != ForcingKind::none || spec.source) {
                        self.force = Field(box);
                        self.has_force = true;
                        if (spec.forcing.kind != ForcingKind::none)
                            for (std::int64_t s = 0; s < box.total; ++s) {
                                if (needs_prev_du)
                                    for (int j = 0; j < d; ++j)
                                        dus[std::size_t(j)] = prev.du[std::size_t(j)][std::size_t(i)][s];
                                self.force[s] = eval_forcing(spec.forcing, prev.u[std::size_t(i)][s],
                                                             prev.v[std::size_t(i)][s], dus);
                            }
                        if (spec.source) {
                            Field sf = spec.source(h * i);
                            for (std::int64_t s = 0; s < box.total; ++s) self.force[s] += sf[s];
                        }
                    }
                }
                Field rhs_i;
                frozen_rhs(self, prev.u[std::size_t(i)], prev.v[std::size_t(i)], rhs_i);
                double acc = 0.0;
                for (std::int64_t s = 0; s < box.total; ++s)
                    acc += std::norm(dtt[s] * inv_h2 - rhs_i[s]);
                res = std::max(res, std::sqrt(acc));
            }
            diag.residual = res;

            PicardResult result;
            result.diagnostics = diag;
            Trajectory& traj = result.trajectory;
            for (int i = 0; i <= nsteps_used; ++i) {
                if (i % config.sample_every != 0 && i != nsteps_used) continue;
                WaveState s{prev.u[std::size_t(i)], prev.v[std::size_t(i)], h * i};
                push_sample(traj, s, spec, config);
            }
            traj.final_state = WaveState{prev.u.back(), prev.v.back(), window};
            traj.completed = true;
            traj.stop = StopReason::reached_t_max;
            traj.picard_windows.push_back(diag);
            return result;
        }

        if (!need_restart)
            throw PicardNonConvergence(
                "picard_solve: no convergence in " + std::to_string(config.picard.max_iters) +
                    " iterates (window " + format_g17(window) + ")",
                diag.sup_cm);
        window *= 0.5;   // contraction failed: halve the window and retry
    }
    throw PicardNonConvergence("picard_solve: contraction not reached after " +
                                   std::to_string(config.picard.max_window_halvings) +
                                   " window halvings",
                               diag.sup_cm);
}

namespace {

Trajectory evolve_quasilinear(const Field& f, const Field& g, const EquationSpec& spec,
                              const SolverConfig& cfg) {
    Trajectory traj;
    Field cu = f, cv = g;
    double t0 = 0.0;
    bool first = true;
    const double tiny = 1e-12 * std::max(1.0, cfg.t_max);
    while (t0 < cfg.t_max - tiny) {
        SolverConfig wcfg = cfg;
        wcfg.picard.window = std::min(cfg.picard.window, cfg.t_max - t0);
        wcfg.keep_states = cfg.keep_states;
        PicardResult pr = picard_solve(cu, cv, spec, wcfg);
        for (std::size_t i = 0; i < pr.trajectory.samples.size(); ++i) {
            if (!first && i == 0) continue;   // window endpoints coincide
            TrajectorySample smp = pr.trajectory.samples[i];
            smp.t += t0;
            traj.samples.push_back(smp);
            if (cfg.keep_states) {
                WaveState st = pr.trajectory.states[i];
                st.t += t0;
                traj.states.push_back(st);
            }
            if (cfg.stop_when_a_exceeds > 0.0 && smp.a_value >= cfg.stop_when_a_exceeds) {
                traj.stop = StopReason::threshold;
                traj.final_state = WaveState{pr.trajectory.final_state.u,
                                             pr.trajectory.final_state.ut, smp.t};
                traj.picard_windows.push_back(pr.diagnostics);
                return traj;
            }
        }
        traj.picard_windows.push_back(pr.diagnostics);
        cu = pr.trajectory.final_state.u;
        cv = pr.trajectory.final_state.ut;
        t0 += pr.trajectory.final_state.t;
        first = false;
    }
    traj.final_state = WaveState{cu, cv, t0};
    traj.completed = true;
    traj.stop = StopReason::reached_t_max;
    return traj;
}

} // namespace

Field equation_rhs(const WaveState& state, const EquationSpec& spec) {
    require_same_box(state.u.box, state.ut.box, "equation_rhs");
    RhsEvaluator rhs(state.u.box, spec);
    Field out;
    rhs.eval(state.u, state.ut, state.t, out);
    return out;
}

double trajectory_residual(const std::vector<WaveState>& states, const EquationSpec& spec) {
    if (states.size() < 3)
        throw std::invalid_argument("trajectory_residual: need at least 3 states");
    const double h = states[1].t - states[0].t;
    for (std::size_t i = 1; i < states.size(); ++i)
        if (std::abs(states[i].t - states[i - 1].t - h) > 1e-9 * std::max(1.0, std::abs(h)))
            throw std::invalid_argument("trajectory_residual: nonuniform time grid");
    RhsEvaluator rhs(states[0].u.box, spec);
    const double inv_h2 = 1.0 / (h * h);
    double worst = 0.0;
    Field r;
    for (std::size_t i = 1; i + 1 < states.size(); ++i) {
        rhs.eval(states[i].u, states[i].ut, states[i].t, r);
        double acc = 0.0;
        for (std::int64_t s = 0; s < r.box.total; ++s) {
            cplx dtt = (states[i + 1].u[s] - 2.0 * states[i].u[s] + states[i - 1].u[s]) * inv_h2;
            acc += std::norm(dtt - r[s]);
        }
        worst = std::max(worst, std::sqrt(acc));
    }
    return worst;
}

Trajectory evolve(const Field& f, const Field& g, const EquationSpec& spec,
                  const SolverConfig& config) {
    require_same_box(f.box, g.box, "evolve");
    if (!(config.dt > 0.0)) throw std::invalid_argument("evolve: dt must be positive");
    if (!(config.t_max >= 0.0)) throw std::invalid_argument("evolve: t_max must be >= 0");
    check_finite(f, "evolve initial u");
    check_finite(g, "evolve initial du/dt");

    switch (spec.kind) {
        case EquationKind::linear:
            if (config.method == Method::rk4) return evolve_rk4(f, g, spec, config);
            return evolve_exact_linear(f, g, spec, config);
        case EquationKind::semilinear:
            if (config.method == Method::picard) return evolve_quasilinear(f, g, spec, config);
            return evolve_rk4(f, g, spec, config);
        case EquationKind::quasilinear:
            // direct method-of-lines on the full nonlinear system, or chained
            // frozen-coefficient windows; the two must agree (uniqueness)
            if (config.method == Method::rk4) return evolve_rk4(f, g, spec, config);
            return evolve_quasilinear(f, g, spec, config);
    }
    throw std::logic_error("evolve: unknown equation kind");
}

double BlowupReference::value(double t) const {
    return Cp * std::pow(t0 - t, -2.0 / (p - 1.0));
}

double BlowupReference::derivative(double t) const {
    return Cp * (2.0 / (p - 1.0)) * std::pow(t0 - t, -2.0 / (p - 1.0) - 1.0);
}

BlowupReference blowup_reference(double p, double t0) {
    if (!(p > 1.0)) throw std::invalid_argument("blowup_reference: p must be > 1");
    if (!(t0 > 0.0)) throw std::invalid_argument("blowup_reference: t0 must be > 0");
    BlowupReference r;
    r.p = p;
    r.t0 = t0;
    r.Cp = std::pow(2.0 * (p + 1.0) / ((p - 1.0) * (p - 1.0)), 1.0 / (p - 1.0));
    r.u0 = r.value(0.0);
    r.ut0 = r.derivative(0.0);
    return r;
}

LipschitzReport lipschitz_dependence_probe(
    const Field& f, const Field& g,
    const std::vector<std::pair<Field, Field>>& perturbations,
    const EquationSpec& spec, const SolverConfig& config) {
    SolverConfig cfg = config;
    cfg.keep_states = true;
    Trajectory base = evolve(f, g, spec, cfg);
    if (base.blowup)
        throw std::runtime_error("lipschitz_dependence_probe: base run blew up");

    LipschitzReport rep;
    NormSpec nk{2.0, double(cfg.k)};
    for (const auto& [df, dg] : perturbations) {
        double delta = lp_alpha_norm(df, nk) + lp_alpha_norm(dg, nk);
        if (delta == 0.0)
            throw std::invalid_argument("lipschitz_dependence_probe: zero perturbation");
        Trajectory pert = evolve(add(f, df), add(g, dg), spec, cfg);
        if (pert.blowup)
            throw std::runtime_error("lipschitz_dependence_probe: perturbed run blew up");
        if (pert.states.size() != base.states.size())
            throw std::runtime_error("lipschitz_dependence_probe: trajectories sampled differently");
        double sup_diff = 0.0;
        for (std::size_t i = 0; i < base.states.size(); ++i)
            sup_diff = std::max(sup_diff,
                                state_diff_a_norm(pert.states[i], base.states[i], cfg.k));
        rep.deltas.push_back(delta);
        rep.ratios.push_back(sup_diff / delta);
    }
    if (!rep.ratios.empty()) {
        double lo = rep.ratios[0], hi = rep.ratios[0];
        for (double r : rep.ratios) {
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        rep.max_ratio = hi;
        rep.stability = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    }
    return rep;
}

} // namespace lattwave
