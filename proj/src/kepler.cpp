#include "rydsim/kepler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rydsim/integrator.hpp"
#include "rydsim/threadpool.hpp"

namespace rydsim {

namespace {
constexpr double kXiCap = 1.0 - 1e-9;

/// Fills the cartesian pair state of `o` from (a, xi, phase) at mean anomaly
/// `mean`, apsidal angle `apsidal`.
void fill_state(OrbitPair& o, double mean, double apsidal) {
    const double xi = o.eccentricity;
    const double ea = solve_kepler(mean, xi);
    const double a = o.semi_major;
    const double x = a * (std::cos(ea) - xi);
    const double y = a * std::sqrt(1.0 - xi * xi) * std::sin(ea);
    // v from eccentric-anomaly rates: dE/dt = omega / (1 - xi cos E)
    const double edot = o.omega / (1.0 - xi * std::cos(ea));
    const double vx = -a * std::sin(ea) * edot;
    const double vy = a * std::sqrt(1.0 - xi * xi) * std::cos(ea) * edot;
    const double c = std::cos(apsidal), s = std::sin(apsidal);
    const Vec3 r_rel{c * x - s * y, s * x + c * y, 0.0};
    const Vec3 v_rel{c * vx - s * vy, s * vx + c * vy, 0.0};
    o.r_e = r_rel * -o.mass_ratio_e;
    o.v_e = v_rel * -o.mass_ratio_e;
    o.r_h = r_rel * o.mass_ratio_h;
    o.v_h = v_rel * o.mass_ratio_h;
}
}  // namespace

OrbitPair init_kepler(int n, int l, const MaterialContext& ctx) {
    if (n < 1) throw std::invalid_argument("init_kepler: n >= 1");
    if (l < 0 || l >= n) throw std::invalid_argument("init_kepler: need 0 <= l < n");
    const RydbergScales sc = rydberg_scales(n, ctx);
    OrbitPair o;
    o.n = n;
    o.l = l;
    o.semi_major = sc.semi_major;
    o.omega = sc.omega;
    // xi^2 = 1 - L^2/(mu k) (mu w^2/k)^{1/3} reduces to 1 - l(l+1)/n^2 in
    // scaled units (mu = 1/2, k = 2, w = 2/n^3).
    const double L2 = double(l) * (l + 1);
    const double xi2 = 1.0 - (L2 / (0.5 * 2.0)) * std::cbrt(0.5 * o.omega * o.omega / 2.0);
    o.eccentricity = std::min(kXiCap, std::sqrt(std::max(0.0, xi2)));
    o.mass_ratio_e = ctx.mu / ctx.m_e_eff;
    o.mass_ratio_h = ctx.mu / ctx.m_h_eff;
    o.phase0 = std::numbers::pi;  // start at apoapsis
    fill_state(o, o.phase0, 0.0);
    return o;
}

OrbitPair precess(OrbitPair orbit, double omega_prec) {
    if (omega_prec < 0.0) throw std::invalid_argument("precess: omega_prec >= 0");
    orbit.omega_prec = omega_prec;
    return orbit;
}

double pair_energy(const Vec3& r_e, const Vec3& v_e, const Vec3& r_h, const Vec3& v_h,
                   const MaterialContext& ctx) {
    (void)ctx;  // masses are fixed by the scaled unit system
    const Vec3 v_rel = v_h - v_e;
    const double r = norm(r_h - r_e);
    if (r == 0.0) return -std::numeric_limits<double>::infinity();
    // mu = 1/2 scaled; bare Coulomb -2/r.
    return 0.25 * norm2(v_rel) - 2.0 / r;
}

ExternalSource prescribed_orbit_source(const OrbitPair& orbit) {
    if (!orbit.prescribed)
        throw std::invalid_argument("prescribed_orbit_source: orbit must be in prescribed mode");
    PrescribedOrbit src;
    src.n_semi_major = orbit.semi_major;
    src.eccentricity = orbit.eccentricity;
    src.omega_orbit = orbit.omega;
    src.omega_prec = orbit.omega_prec;
    src.mass_ratio_e = orbit.mass_ratio_e;
    src.mass_ratio_h = orbit.mass_ratio_h;
    src.phase0 = orbit.phase0;
    return src;
}

namespace {

/// Monolithic ODE for pair + plasma with full back-action. Layout:
/// [plasma pos x|y|z, plasma vel x|y|z, pair(12): re, rh, ve, vh].
struct PairPlasmaSystem {
    PlasmaState* plasma = nullptr;
    const MaterialContext* ctx = nullptr;
    unsigned threads = 1;
    std::vector<double> ax, ay, az;
    std::vector<SourceCharge> pair_charges{ {{}, -1.0}, {{}, +1.0} };

    void operator()(double /*t*/, const std::vector<double>& y, std::vector<double>& dydt) {
        const std::size_t n = plasma->n();
        dydt.resize(y.size());
        std::copy(y.begin(), y.begin() + std::ptrdiff_t(n), plasma->px.begin());
        std::copy(y.begin() + std::ptrdiff_t(n), y.begin() + std::ptrdiff_t(2 * n), plasma->py.begin());
        std::copy(y.begin() + std::ptrdiff_t(2 * n), y.begin() + std::ptrdiff_t(3 * n), plasma->pz.begin());
        const std::size_t pb = 6 * n;
        const Vec3 r_e{y[pb + 0], y[pb + 1], y[pb + 2]};
        const Vec3 r_h{y[pb + 3], y[pb + 4], y[pb + 5]};
        pair_charges[0].pos = r_e;
        pair_charges[1].pos = r_h;

        plasma_accels(*plasma, pair_charges, {}, ax, ay, az, threads);
        for (std::size_t i = 0; i < n; ++i) {
            dydt[i] = y[3 * n + i];
            dydt[n + i] = y[4 * n + i];
            dydt[2 * n + i] = y[5 * n + i];
            dydt[3 * n + i] = ax[i];
            dydt[4 * n + i] = ay[i];
            dydt[5 * n + i] = az[i];
        }

        // Pair accelerations: bare mutual Coulomb + soft-core forces from the
        // plasma (reaction to the source forces above).
        const double as2 = plasma->a_s * plasma->a_s;
        Vec3 f_e{}, f_h{};
        for (std::size_t i = 0; i < n; ++i) {
            const Vec3 ri{plasma->px[i], plasma->py[i], plasma->pz[i]};
            const double qi = plasma->q[i];
            {
                const Vec3 d = r_e - ri;
                const double d2 = norm2(d) + as2;
                f_e += d * (2.0 * (-1.0) * qi / (d2 * std::sqrt(d2)));
            }
            {
                const Vec3 d = r_h - ri;
                const double d2 = norm2(d) + as2;
                f_h += d * (2.0 * (+1.0) * qi / (d2 * std::sqrt(d2)));
            }
        }
        {
            const Vec3 d = r_e - r_h;
            const double r2 = norm2(d);
            const double f = -2.0 / (r2 * std::sqrt(r2));  // attraction, bare
            f_e += d * f;
            f_h += d * (-f);
        }
        const double im_e = 1.0 / ctx->m_e_scaled;
        const double im_h = 1.0 / ctx->m_h_scaled;
        // d(pos)/dt = vel
        for (int k = 0; k < 6; ++k) dydt[pb + k] = y[pb + 6 + k];
        dydt[pb + 6] = f_e.x * im_e;
        dydt[pb + 7] = f_e.y * im_e;
        dydt[pb + 8] = f_e.z * im_e;
        dydt[pb + 9] = f_h.x * im_h;
        dydt[pb + 10] = f_h.y * im_h;
        dydt[pb + 11] = f_h.z * im_h;
    }
};

}  // namespace

OrbitPair propagate_isolated(const OrbitPair& orbit, const MaterialContext& ctx,
                             double periods, double rtol) {
    // 12-dof pair ODE, bare Coulomb.
    std::vector<double> y{orbit.r_e.x, orbit.r_e.y, orbit.r_e.z,
                          orbit.r_h.x, orbit.r_h.y, orbit.r_h.z,
                          orbit.v_e.x, orbit.v_e.y, orbit.v_e.z,
                          orbit.v_h.x, orbit.v_h.y, orbit.v_h.z};
    const double im_e = 1.0 / ctx.m_e_scaled;
    const double im_h = 1.0 / ctx.m_h_scaled;
    CashKarp integ(12, [&](double, const std::vector<double>& s, std::vector<double>& d) {
        d.resize(12);
        const Vec3 r_e{s[0], s[1], s[2]}, r_h{s[3], s[4], s[5]};
        const Vec3 dr = r_e - r_h;
        const double r2 = norm2(dr);
        const double f = -2.0 / (r2 * std::sqrt(r2));
        const Vec3 f_e = dr * f, f_h = dr * -f;
        for (int k = 0; k < 6; ++k) d[k] = s[6 + k];
        d[6] = f_e.x * im_e; d[7] = f_e.y * im_e; d[8] = f_e.z * im_e;
        d[9] = f_h.x * im_h; d[10] = f_h.y * im_h; d[11] = f_h.z * im_h;
    });
    IntegratorConfig cfg;
    cfg.rtol = rtol;
    cfg.h_init = 1e-3 * 2.0 * std::numbers::pi / orbit.omega;
    cfg.h_min = 1e-12 * cfg.h_init;
    double t = 0.0;
    const double t_end = periods * 2.0 * std::numbers::pi / orbit.omega;
    integ.integrate_to(t, y, t_end, cfg);
    OrbitPair out = orbit;
    out.r_e = {y[0], y[1], y[2]};
    out.r_h = {y[3], y[4], y[5]};
    out.v_e = {y[6], y[7], y[8]};
    out.v_h = {y[9], y[10], y[11]};
    return out;
}

SurvivalRecord classical_lifetime_mc(int n, int l, const PlasmaParams& params,
                                     const MaterialContext& ctx, long n_traj,
                                     std::uint64_t seed, const ClassicalMcOptions& opt) {
    if (n < 2) throw std::invalid_argument("classical_lifetime_mc: n >= 2 (energy window)");
    if (n_traj < 1) throw std::invalid_argument("classical_lifetime_mc: n_traj >= 1");

    const RydbergScales sc = rydberg_scales(n, ctx);
    const double e_lo = -1.0 / double((n - 1) * (n - 1));
    const double e_hi = -1.0 / double((n + 1) * (n + 1));
    const double t_cap = opt.time_cap_rydberg * sc.period;

    std::vector<double> decay(n_traj, -1.0);  // -1 = censored

    const long chunk = 16;
    const long n_chunks = (n_traj + chunk - 1) / chunk;
    parallel_chunks(std::size_t(n_chunks), opt.workers, [&](std::size_t c) {
        for (long j = long(c) * chunk; j < std::min(n_traj, (long(c) + 1) * chunk); ++j) {
            Rng rng(seed, std::uint64_t(j));
            PlasmaState plasma = init_plasma(opt.n_plasma, params, ctx, rng);
            IntegratorConfig cfg;
            cfg.rtol = opt.rtol;
            cfg.h_init = 0.05 / params.omega_p;
            cfg.h_min = 1e-10 * sc.period;
            {
                PlasmaDynamics dyn(std::move(plasma), cfg, 1);
                dyn.advance_to(opt.prerun_periods * params.tau_p());
                plasma = std::move(dyn.state());
            }
            plasma.t = 0.0;

            OrbitPair orbit = init_kepler(n, l, ctx);
            if (opt.xi_override >= 0.0)
                orbit.eccentricity = std::min(kXiCap, opt.xi_override);
            // Random orbital phase and orientation would be ideal; a random
            // phase alone decorrelates trajectories since the plasma is
            // isotropic.
            orbit.phase0 = rng.uniform(0.0, 2.0 * std::numbers::pi);
            fill_state(orbit, orbit.phase0, 0.0);

            const std::size_t np = plasma.n();
            std::vector<double> y(6 * np + 12);
            for (std::size_t i = 0; i < np; ++i) {
                y[i] = plasma.px[i]; y[np + i] = plasma.py[i]; y[2 * np + i] = plasma.pz[i];
                y[3 * np + i] = plasma.vx[i]; y[4 * np + i] = plasma.vy[i];
                y[5 * np + i] = plasma.vz[i];
            }
            const std::size_t pb = 6 * np;
            const double init_state[12] = {orbit.r_e.x, orbit.r_e.y, orbit.r_e.z,
                                           orbit.r_h.x, orbit.r_h.y, orbit.r_h.z,
                                           orbit.v_e.x, orbit.v_e.y, orbit.v_e.z,
                                           orbit.v_h.x, orbit.v_h.y, orbit.v_h.z};
            for (int k = 0; k < 12; ++k) y[pb + k] = init_state[k];

            PairPlasmaSystem sys;
            sys.plasma = &plasma;
            sys.ctx = &ctx;
            CashKarp integ(y.size(), [&sys](double t, const std::vector<double>& s,
                                            std::vector<double>& d) { sys(t, s, d); });
            integ.yscale = plasma_yscale(plasma);
            integ.yscale.resize(y.size());
            for (int k = 0; k < 6; ++k) integ.yscale[pb + k] = sc.semi_major;
            for (int k = 6; k < 12; ++k) integ.yscale[pb + k] = sc.semi_major * sc.omega;

            IntegratorConfig pcfg;
            pcfg.rtol = opt.rtol;
            pcfg.h_init = 1e-2 * sc.period;
            pcfg.h_min = 1e-12 * sc.period;
            double t = 0.0;
            const double check_dt = sc.period / 16.0;
            double next_check = check_dt;
            bool decayed = false;
            try {
                while (t < t_cap && !decayed) {
                    if (integ.h_next <= 0.0 || t + integ.h_next > next_check)
                        integ.h_next = next_check - t;
                    integ.step(t, y, pcfg);
                    if (t >= next_check - 1e-9) {
                        next_check += check_dt;
                        const Vec3 r_e{y[pb], y[pb + 1], y[pb + 2]};
                        const Vec3 r_h{y[pb + 3], y[pb + 4], y[pb + 5]};
                        const Vec3 v_e{y[pb + 6], y[pb + 7], y[pb + 8]};
                        const Vec3 v_h{y[pb + 9], y[pb + 10], y[pb + 11]};
                        const double e = pair_energy(r_e, v_e, r_h, v_h, ctx);
                        if (e < e_lo || e > e_hi) {
                            decay[j] = t;
                            decayed = true;
                        }
                    }
                }
            } catch (const IntegrationError&) {
                decay[j] = t;  // count integration breakdown as decay-by-collision
            }
        }
    });

    SurvivalRecord rec;
    rec.n_traj = n_traj;
    rec.time_cap = t_cap;
    double total_observed = 0.0;
    for (long j = 0; j < n_traj; ++j) {
        if (decay[j] >= 0.0) {
            rec.decay_times.push_back(decay[j]);
            total_observed += decay[j];
        } else {
            ++rec.n_censored;
            total_observed += t_cap;
        }
    }
    std::sort(rec.decay_times.begin(), rec.decay_times.end());

    const int bins = opt.survival_bins;
    rec.times.resize(bins + 1);
    rec.survival.resize(bins + 1);
    rec.at_risk.resize(bins + 1);
    for (int b = 0; b <= bins; ++b) {
        const double tb = t_cap * double(b) / bins;
        const auto it = std::upper_bound(rec.decay_times.begin(), rec.decay_times.end(), tb);
        const long decayed_by = it - rec.decay_times.begin();
        rec.times[b] = tb;
        rec.survival[b] = double(n_traj - decayed_by) / double(n_traj);
        rec.at_risk[b] = n_traj - decayed_by;
    }

    const long d = long(rec.decay_times.size());
    if (d == 0) {
        rec.all_censored = true;
        // 95%-ish lower bound: lambda < 3 / total time.
        rec.tau = total_observed / 3.0;
        rec.tau_lo = rec.tau;
        rec.tau_hi = std::numeric_limits<double>::infinity();
    } else {
        // Exponential MLE with censoring: lambda = decays / total observed time.
        rec.tau = total_observed / double(d);
        const double rel = 1.0 / std::sqrt(double(d));
        rec.tau_lo = rec.tau / (1.0 + rel);
        rec.tau_hi = rec.tau / std::max(0.05, 1.0 - rel);
    }
    return rec;
}

}  // namespace rydsim
