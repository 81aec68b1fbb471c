#include "rydsim/coupled.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "rydsim/threadpool.hpp"
#include "rydsim/wigner.hpp"

namespace rydsim {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInvSqrt2 = 0.7071067811865475244;
}

double vacuum_transfer_time(double mass, double omega, double g) {
    if (g <= 0.0) return std::numeric_limits<double>::infinity();
    return std::numbers::pi * mass * omega / g;
}

double coupled_beat_frequency(double mass, double omega, double g) {
    const double w2 = omega * omega;
    const double wp = std::sqrt(w2 - g / mass);
    const double wm = std::sqrt(w2 + g / mass);
    return wm - wp;
}

TransferTrace coupled_transfer(const RydbergScales& scales, double separation,
                               const PlasmaParams& params, const MaterialContext& ctx,
                               double t_max, int n_out, long n_traj, std::uint64_t seed,
                               double tau_thermal, const CoupledOptions& opt) {
    if (separation <= 0.0) throw std::invalid_argument("coupled_transfer: D > 0");
    if (n_out < 2 || n_traj < 1) throw std::invalid_argument("coupled_transfer: bad sizes");

    const double m = opt.use_electron_mass ? ctx.m_e_scaled : 0.5;
    const double w = scales.omega;
    const double g = 2.0 / (separation * separation * separation);
    const int n0 = scales.n_osc;
    const double z_norm = abs_wigner_norm(n0);  // ground-state factor is 1

    TransferTrace trace;
    trace.g = g;
    trace.mass = m;
    trace.omega = w;
    trace.separation = separation;
    trace.transfer_time_pred = vacuum_transfer_time(m, w, g);
    trace.lifetime_used = tau_thermal;
    trace.regime_valid = !(tau_thermal > 0.0 && trace.transfer_time_pred >= tau_thermal);
    trace.n_traj = n_traj;
    trace.times.resize(std::size_t(n_out));
    for (int k = 0; k < n_out; ++k)
        trace.times[std::size_t(k)] = t_max * double(k) / double(n_out - 1);

    // Normal modes u+- = (x1 -+ ... u_plus = (x1+x2)/sqrt2 with
    // w+^2 = w^2 - g/m, u_minus with w-^2 = w^2 + g/m.
    const double w_plus = std::sqrt(w * w - g / m);
    const double w_minus = std::sqrt(w * w + g / m);
    if (!(w * w > g / m))
        throw std::invalid_argument("coupled_transfer: coupling exceeds oscillator stiffness");

    const Vec3 pos1{-0.5 * separation, 0.0, 0.0};
    const Vec3 pos2{+0.5 * separation, 0.0, 0.0};
    const double h_cap = opt.h_cap_fraction * kTwoPi / w;

    const long chunk = std::max(1L, opt.chunk);
    const long n_chunks = (n_traj + chunk - 1) / chunk;
    // Per output time: sums of w*E1, w*E2, w*(E1-E2) and squares.
    const std::size_t cells = std::size_t(n_out) * 3;
    std::vector<double> sum1(std::size_t(n_chunks) * cells, 0.0);
    std::vector<double> sum2(std::size_t(n_chunks) * cells, 0.0);
    std::vector<long> completed(std::size_t(n_chunks), 0);

    parallel_chunks(std::size_t(n_chunks), opt.workers, [&](std::size_t cidx) {
        double* s1 = sum1.data() + cidx * cells;
        double* s2 = sum2.data() + cidx * cells;
        std::vector<double> local(cells);
        const long j0 = long(cidx) * chunk;
        const long j1 = std::min(n_traj, j0 + chunk);
        for (long j = j0; j < j1; ++j) {
            Rng rng(seed, std::uint64_t(j));
            double x1, p1, x2, p2;
            signed char w1, w2;
            sample_signed_point(n0, m, w, rng, x1, p1, w1);
            sample_signed_point(0, m, w, rng, x2, p2, w2);
            const double wgt = double(w1) * double(w2);

            DrivenOscillator mode_p{m, w_plus, kInvSqrt2 * (x1 + x2), kInvSqrt2 * (p1 + p2)};
            DrivenOscillator mode_m{m, w_minus, kInvSqrt2 * (x1 - x2), kInvSqrt2 * (p1 - p2)};

            auto observables = [&](int k) {
                const double x1n = kInvSqrt2 * (mode_p.x + mode_m.x);
                const double x2n = kInvSqrt2 * (mode_p.x - mode_m.x);
                const double p1n = kInvSqrt2 * (mode_p.p + mode_m.p);
                const double p2n = kInvSqrt2 * (mode_p.p - mode_m.p);
                const double e1 = p1n * p1n / (2.0 * m) + 0.5 * m * w * w * x1n * x1n;
                const double e2 = p2n * p2n / (2.0 * m) + 0.5 * m * w * w * x2n * x2n;
                local[std::size_t(k) * 3 + 0] = wgt * e1;
                local[std::size_t(k) * 3 + 1] = wgt * e2;
                local[std::size_t(k) * 3 + 2] = wgt * (e1 - e2);
            };

            bool ok = true;
            std::fill(local.begin(), local.end(), 0.0);
            if (opt.n_plasma <= 0) {
                observables(0);
                for (int k = 1; k < n_out; ++k) {
                    const double h =
                        trace.times[std::size_t(k)] - trace.times[std::size_t(k - 1)];
                    mode_p.rotate(h);
                    mode_m.rotate(h);
                    observables(k);
                }
            } else {
                try {
                    PlasmaState plasma = init_plasma(opt.n_plasma, params, ctx, rng);
                    IntegratorConfig cfg;
                    cfg.rtol = opt.rtol;
                    cfg.h_init = 0.02 * params.tau_p();
                    cfg.h_min = 1e-13 * scales.period;
                    PlasmaDynamics dyn(std::move(plasma), cfg, 1);
                    if (opt.prerun_periods > 0.0)
                        dyn.advance_to(opt.prerun_periods * params.tau_p());
                    dyn.state().t = 0.0;
                    dyn.h_cap = h_cap;
                    if (opt.back_reaction)
                        dyn.dipoles.assign({DipoleReaction{pos1, 0.0}, DipoleReaction{pos2, 0.0}});

                    double f1, r1, f2, r2;
                    plasma_field_z(dyn.state(), pos1, f1, r1);
                    plasma_field_z(dyn.state(), pos2, f2, r2);
                    observables(0);
                    for (int k = 1; k < n_out; ++k) {
                        const double t_k = trace.times[std::size_t(k)];
                        while (dyn.state().t < t_k - 1e-9) {
                            if (opt.back_reaction) {
                                const double h_pred = std::min(h_cap, t_k - dyn.state().t);
                                DrivenOscillator mp = mode_p, mm = mode_m;
                                mp.rotate(0.5 * h_pred);
                                mm.rotate(0.5 * h_pred);
                                dyn.dipoles[0].p_z = kInvSqrt2 * (mp.x + mm.x);
                                dyn.dipoles[1].p_z = kInvSqrt2 * (mp.x - mm.x);
                            }
                            const double h = dyn.step_to(t_k);
                            double f1n, r1n, f2n, r2n;
                            plasma_field_z(dyn.state(), pos1, f1n, r1n);
                            plasma_field_z(dyn.state(), pos2, f2n, r2n);
                            // Mode drives: F+- = (F1 +- F2)/sqrt(2).
                            double cp[4], cm[4];
                            DrivenOscillator::hermite_coeffs(
                                kInvSqrt2 * (f1 + f2), kInvSqrt2 * (r1 + r2),
                                kInvSqrt2 * (f1n + f2n), kInvSqrt2 * (r1n + r2n), h, cp);
                            DrivenOscillator::hermite_coeffs(
                                kInvSqrt2 * (f1 - f2), kInvSqrt2 * (r1 - r2),
                                kInvSqrt2 * (f1n - f2n), kInvSqrt2 * (r1n - r2n), h, cm);
                            mode_p.advance(h, cp);
                            mode_m.advance(h, cm);
                            f1 = f1n; r1 = r1n; f2 = f2n; r2 = r2n;
                        }
                        observables(k);
                    }
                } catch (const IntegrationError&) {
                    ok = false;
                }
            }
            if (ok) {
                ++completed[cidx];
                for (std::size_t i = 0; i < cells; ++i) {
                    s1[i] += local[i];
                    s2[i] += local[i] * local[i];
                }
            }
        }
    });

    long n_eff = 0;
    for (long c = 0; c < n_chunks; ++c) n_eff += completed[std::size_t(c)];
    trace.n_dropped = n_traj - n_eff;
    trace.drop_flagged = double(trace.n_dropped) > opt.drop_flag_fraction * double(n_traj);
    if (n_eff < 2) throw std::runtime_error("coupled_transfer: all trajectories dropped");

    std::vector<double> tot1(cells, 0.0), tot2(cells, 0.0);
    for (long c = 0; c < n_chunks; ++c)
        for (std::size_t i = 0; i < cells; ++i) {
            tot1[i] += sum1[std::size_t(c) * cells + i];
            tot2[i] += sum2[std::size_t(c) * cells + i];
        }
    const double N = double(n_eff);
    auto reduce = [&](std::size_t k, int comp, double& mean, double& err) {
        const std::size_t i = k * 3 + std::size_t(comp);
        const double mu = tot1[i] / N;
        const double var = std::max(0.0, tot2[i] / N - mu * mu);
        mean = z_norm * mu;
        err = z_norm * std::sqrt(var / (N - 1.0));
    };
    trace.e1.resize(std::size_t(n_out));
    trace.e1_err.resize(std::size_t(n_out));
    trace.e2.resize(std::size_t(n_out));
    trace.e2_err.resize(std::size_t(n_out));
    trace.de.resize(std::size_t(n_out));
    trace.de_err.resize(std::size_t(n_out));
    for (int k = 0; k < n_out; ++k) {
        reduce(std::size_t(k), 0, trace.e1[std::size_t(k)], trace.e1_err[std::size_t(k)]);
        reduce(std::size_t(k), 1, trace.e2[std::size_t(k)], trace.e2_err[std::size_t(k)]);
        reduce(std::size_t(k), 2, trace.de[std::size_t(k)], trace.de_err[std::size_t(k)]);
    }
    if (tau_thermal > 0.0) compensate_thermalization(trace, tau_thermal);
    else {
        trace.de_scaled = trace.de;
        trace.de_scaled_err = trace.de_err;
    }
    return trace;
}

void compensate_thermalization(TransferTrace& trace, double tau) {
    if (tau <= 0.0) throw std::invalid_argument("compensate_thermalization: tau > 0");
    trace.de_scaled.resize(trace.de.size());
    trace.de_scaled_err.resize(trace.de.size());
    for (std::size_t k = 0; k < trace.de.size(); ++k) {
        const double f = std::exp(trace.times[k] / tau);
        trace.de_scaled[k] = trace.de[k] * f;
        trace.de_scaled_err[k] = trace.de_err[k] * f;
    }
}

ZeroCrossing first_zero_crossing(const std::vector<double>& times,
                                 const std::vector<double>& values,
                                 const std::vector<double>& errors) {
    ZeroCrossing z;
    for (std::size_t k = 1; k < values.size(); ++k) {
        if (values[k - 1] > 0.0 && values[k] <= 0.0) {
            const double dv = values[k] - values[k - 1];
            const double frac = values[k - 1] / -dv;
            z.t = times[k - 1] + frac * (times[k] - times[k - 1]);
            const double slope = dv / (times[k] - times[k - 1]);
            const double err = errors.empty()
                                   ? 0.0
                                   : 0.5 * (errors[k - 1] + errors[k]);
            z.t_err = std::abs(slope) > 0.0 ? err / std::abs(slope) : 0.0;
            z.found = true;
            return z;
        }
    }
    return z;
}

}  // namespace rydsim
