#include "rydsim/twa.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "rydsim/threadpool.hpp"

namespace rydsim {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// x - sin x, stable for small x.
double g1(double x) {
    if (std::abs(x) < 0.1) {
        const double x2 = x * x;
        return x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)));
    }
    return x - std::sin(x);
}

/// x^2 - 4 sin^2(x/2) = x^2 - 2(1 - cos x), stable for small x.
double g2(double x) {
    if (std::abs(x) < 0.1) {
        const double x2 = x * x;
        return x2 * x2 / 12.0 * (1.0 - x2 / 30.0 * (1.0 - x2 / 56.0));
    }
    const double sh = std::sin(0.5 * x);
    return x * x - 4.0 * sh * sh;
}

/// x^3 - 6(x - sin x), stable for small x.
double f3(double x) {
    if (std::abs(x) < 0.1) {
        const double x2 = x * x;
        return x2 * x2 * x / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0));
    }
    return x * x * x - 6.0 * g1(x);
}
}  // namespace

void DrivenOscillator::hermite_coeffs(double d0, double r0, double d1, double r1, double h,
                                      double c[4]) {
    c[0] = d0;
    c[1] = r0;
    c[2] = (3.0 * (d1 - d0) - h * (2.0 * r0 + r1)) / (h * h);
    c[3] = (2.0 * (d0 - d1) + h * (r0 + r1)) / (h * h * h);
}

void DrivenOscillator::rotate(double h) {
    const double c = std::cos(omega * h), s = std::sin(omega * h);
    const double x0 = x, p0 = p;
    x = x0 * c + p0 / (mass * omega) * s;
    p = -mass * omega * x0 * s + p0 * c;
}

void DrivenOscillator::advance(double h, const double c[4]) {
    const double w = omega;
    const double xarg = w * h;
    const double s = std::sin(xarg);
    const double sh2 = std::sin(0.5 * xarg);
    const double cosx = std::cos(xarg);
    const double one_minus_cos = 2.0 * sh2 * sh2;

    const double w2 = w * w, w3 = w2 * w, w4 = w2 * w2;
    // I_k = int_0^h s^k sin(w(h-s)) ds, J_k with cos.
    const double I0 = one_minus_cos / w;
    const double I1 = g1(xarg) / w2;
    const double I2 = g2(xarg) / w3;
    const double I3 = f3(xarg) / w4;
    const double J0 = s / w;
    const double J1 = one_minus_cos / w2;
    const double J2 = 2.0 * g1(xarg) / w3;
    const double J3 = 3.0 * g2(xarg) / w4;

    const double drive_sin = c[0] * I0 + c[1] * I1 + c[2] * I2 + c[3] * I3;
    const double drive_cos = c[0] * J0 + c[1] * J1 + c[2] * J2 + c[3] * J3;

    const double x0 = x, p0 = p;
    x = x0 * cosx + p0 / (mass * w) * s + drive_sin / (mass * w);
    p = -mass * w * x0 * s + p0 * cosx + drive_cos;
}

void plasma_field_z(const PlasmaState& st, const Vec3& at, double& e_z, double& dez_dt) {
    const double as2 = st.a_s * st.a_s;
    double ez = 0.0, dez = 0.0;
    const std::size_t n = st.n();
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = at.x - st.px[i];
        const double dy = at.y - st.py[i];
        const double dz = at.z - st.pz[i];
        const double D = dx * dx + dy * dy + dz * dz + as2;
        const double invD32 = 1.0 / (D * std::sqrt(D));
        const double q2 = 2.0 * st.q[i];
        ez += q2 * dz * invD32;
        // d(at - r_i)/dt = -v_i
        const double ddot = -(dx * st.vx[i] + dy * st.vy[i] + dz * st.vz[i]);
        dez += q2 * invD32 * (-st.vz[i] - 3.0 * dz * ddot / D);
    }
    e_z = ez;
    dez_dt = dez;
}

std::size_t PopulationTrace::level_index(int level) const {
    for (std::size_t i = 0; i < levels.size(); ++i)
        if (levels[i] == level) return i;
    throw std::out_of_range("PopulationTrace: level not tracked");
}

PopulationTrace twa_evolve(const RydbergScales& scales, const PlasmaParams& params,
                           const MaterialContext& ctx, double t_max, int n_out, long n_traj,
                           std::uint64_t seed, const TwaOptions& opt) {
    if (n_out < 2) throw std::invalid_argument("twa_evolve: n_out >= 2");
    if (n_traj < 1) throw std::invalid_argument("twa_evolve: n_traj >= 1");

    const int n0 = scales.n_osc;
    const double m = opt.use_electron_mass ? ctx.m_e_scaled : 0.5;
    const double w = scales.omega;
    const int m_lo = std::max(0, n0 - opt.band_halfwidth);
    const int m_hi = n0 + opt.band_halfwidth;
    const std::size_t n_levels = std::size_t(m_hi - m_lo + 1);
    const double z_norm = abs_wigner_norm(n0);

    PopulationTrace trace;
    trace.n_osc = n0;
    trace.z_norm = z_norm;
    trace.n_traj = n_traj;
    trace.levels.resize(n_levels);
    for (std::size_t i = 0; i < n_levels; ++i) trace.levels[i] = m_lo + int(i);
    trace.times.resize(std::size_t(n_out));
    for (int k = 0; k < n_out; ++k)
        trace.times[std::size_t(k)] = t_max * double(k) / double(n_out - 1);

    const long chunk = std::max(1L, opt.chunk);
    const long n_chunks = (n_traj + chunk - 1) / chunk;
    const std::size_t cells = std::size_t(n_out) * n_levels;
    std::vector<double> sum1(std::size_t(n_chunks) * cells, 0.0);
    std::vector<double> sum2(std::size_t(n_chunks) * cells, 0.0);
    std::vector<long> completed(std::size_t(n_chunks), 0);

    const double h_cap = opt.h_cap_fraction * kTwoPi / w;

    parallel_chunks(std::size_t(n_chunks), opt.workers, [&](std::size_t cidx) {
        double* s1 = sum1.data() + cidx * cells;
        double* s2 = sum2.data() + cidx * cells;
        std::vector<double> local(cells);
        std::vector<double> band;
        const long j0 = long(cidx) * chunk;
        const long j1 = std::min(n_traj, j0 + chunk);
        for (long j = j0; j < j1; ++j) {
            Rng rng(seed, std::uint64_t(j));
            DrivenOscillator osc{m, w, 0.0, 0.0};
            signed char wgt = 1;
            sample_signed_point(n0, m, w, rng, osc.x, osc.p, wgt);

            bool ok = true;
            std::fill(local.begin(), local.end(), 0.0);
            auto record = [&](int k) {
                weyl_population_band(m_lo, m_hi, osc.x, osc.p, m, w, band);
                for (std::size_t l = 0; l < n_levels; ++l)
                    local[std::size_t(k) * n_levels + l] = double(wgt) * band[l];
            };

            if (opt.n_plasma <= 0) {
                // Vacuum: eigenstate Wigner is stationary; record the exact
                // free rotation.
                record(0);
                for (int k = 1; k < n_out; ++k) {
                    osc.rotate(trace.times[std::size_t(k)] - trace.times[std::size_t(k - 1)]);
                    record(k);
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
                    if (opt.back_reaction) dyn.dipoles.assign(1, DipoleReaction{{}, 0.0});

                    double e0, r0;
                    plasma_field_z(dyn.state(), {}, e0, r0);
                    record(0);
                    for (int k = 1; k < n_out; ++k) {
                        const double t_k = trace.times[std::size_t(k)];
                        while (dyn.state().t < t_k - 1e-9) {
                            if (opt.back_reaction) {
                                // Freeze the reaction dipole at the midpoint
                                // of the free oscillator rotation.
                                DrivenOscillator mid = osc;
                                const double h_pred =
                                    std::min({h_cap, t_k - dyn.state().t});
                                mid.rotate(0.5 * h_pred);
                                dyn.dipoles[0].p_z = mid.x;
                            }
                            const double h = dyn.step_to(t_k);
                            double e1, r1;
                            plasma_field_z(dyn.state(), {}, e1, r1);
                            double c[4];
                            DrivenOscillator::hermite_coeffs(e0, r0, e1, r1, h, c);
                            osc.advance(h, c);
                            e0 = e1;
                            r0 = r1;
                        }
                        record(k);
                    }
                } catch (const IntegrationError&) {
                    ok = false;
                }
            }

            std::size_t chunk_slot = cidx;
            if (ok) {
                ++completed[chunk_slot];
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
    if (n_eff < 2) throw std::runtime_error("twa_evolve: all trajectories dropped");

    trace.pop.assign(cells, 0.0);
    trace.pop_err.assign(cells, 0.0);
    for (long c = 0; c < n_chunks; ++c) {
        const double* s1 = sum1.data() + std::size_t(c) * cells;
        const double* s2 = sum2.data() + std::size_t(c) * cells;
        for (std::size_t i = 0; i < cells; ++i) {
            trace.pop[i] += s1[i];
            trace.pop_err[i] += s2[i];
        }
    }
    const double N = double(n_eff);
    for (std::size_t i = 0; i < cells; ++i) {
        const double mean = trace.pop[i] / N;
        const double var = std::max(0.0, trace.pop_err[i] / N - mean * mean);
        trace.pop[i] = z_norm * mean;
        trace.pop_err[i] = z_norm * std::sqrt(var / (N - 1.0));
    }

    double band_max = 0.0;
    for (int k = 0; k < n_out; ++k) {
        double s = 0.0;
        for (std::size_t l = 0; l < n_levels; ++l) s += trace.at(std::size_t(k), l);
        band_max = std::max(band_max, s);
    }
    trace.band_sum_max = band_max;
    return trace;
}

LifetimeFit fit_lifetime_series(const std::vector<double>& times, const std::vector<double>& pop,
                                const std::vector<double>& err) {
    LifetimeFit out;
    std::vector<double> ts, ln_p, sig;
    bool left_ceiling = false;
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double r = pop[k];
        if (r < 0.98) left_ceiling = true;
        if (r >= out.window_lo && r <= out.window_hi) {
            ts.push_back(times[k]);
            ln_p.push_back(std::log(r));
            const double e = err.empty() ? 0.0 : err[k];
            sig.push_back(e > 0.0 ? e / r : 1e-3);
        }
    }
    if (!left_ceiling) {
        out.censored = true;
        return out;
    }
    if (ts.size() < 3)
        throw std::invalid_argument("fit_lifetime: fewer than 3 points in the fit window");
    const LineFit lf = fit_line(ts, ln_p, sig);
    out.n_points = ts.size();
    if (lf.slope >= 0.0) {
        out.censored = true;
        return out;
    }
    out.tau = -1.0 / lf.slope;
    out.tau_err = lf.slope_err / (lf.slope * lf.slope);
    return out;
}

LifetimeFit fit_lifetime(const PopulationTrace& trace) {
    const std::size_t lvl = trace.level_index(trace.n_osc);
    std::vector<double> pop(trace.times.size()), err(trace.times.size());
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
        pop[k] = trace.at(k, lvl);
        err[k] = trace.err_at(k, lvl);
    }
    return fit_lifetime_series(trace.times, pop, err);
}

CriticalDensity critical_density_from_fit(const PowerLawFit& f, double omega_ryd) {
    if (std::abs(f.exponent_err) > 0.5)
        throw std::invalid_argument(
            "critical_density_from_fit: exponent too uncertain, refusing extrapolation");
    if (f.exponent >= 0.0)
        throw std::invalid_argument("critical_density_from_fit: lifetime must fall with density");
    CriticalDensity c;
    const double ln_rho = -(std::log(f.prefactor) + std::log(omega_ryd)) / f.exponent;
    c.rho_cr = std::exp(ln_rho);
    const double d_lnA = f.log_prefactor_err / std::abs(f.exponent);
    const double d_exp = std::abs(ln_rho * f.exponent_err / f.exponent);
    c.log_rho_err = std::sqrt(d_lnA * d_lnA + d_exp * d_exp);
    return c;
}

}  // namespace rydsim
