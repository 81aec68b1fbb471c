#include "rydsim/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "rydsim/coupled.hpp"
#include "rydsim/kepler.hpp"
#include "rydsim/plasma.hpp"
#include "rydsim/screening.hpp"
#include "rydsim/svgplot.hpp"
#include "rydsim/threadpool.hpp"
#include "rydsim/toybench.hpp"
#include "rydsim/twa.hpp"

namespace rydsim {

namespace {
namespace fs = std::filesystem;
constexpr double kPi = std::numbers::pi;
constexpr const char* kCodeVersion = "rydsim 1.0";

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

struct RunIo {
    const KeyValueConfig* cfg = nullptr;
    MaterialContext ctx;
    std::string out_dir;
    std::uint64_t seed = 1;
    unsigned workers = 2;
    bool plots = true;
    std::chrono::steady_clock::time_point t_start;

    double getd(const std::string& k, double d) const { return cfg->get_double(k, d); }
    long getl(const std::string& k, long d) const { return cfg->get_long(k, d); }
    std::vector<double> getlist(const std::string& k, const std::vector<double>& d) const {
        return cfg->get_double_list(k, d);
    }
};

void write_summary(const RunIo& io, const ExperimentResult& res, const std::string& id) {
    std::ofstream out(io.out_dir + "/summary.txt");
    out << "experiment = " << id << "\n";
    out << "config_hash = " << io.cfg->hash() << "\n";
    out << "seed = " << io.seed << "\n";
    out << "code_version = " << kCodeVersion << "\n";
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - io.t_start).count();
    out << "wall_time_s = " << fmt_g(wall) << "\n";
    out << "exit_code = " << res.exit_code << "\n\n";
    for (const auto& [k, v] : res.metrics) out << k << " = " << fmt_g(v) << "\n";
    out << "\n" << res.summary << "\n";
}

void add_meta(ResultTable& t, const RunIo& io) {
    t.meta.push_back("config_hash = " + std::to_string(io.cfg->hash()));
    t.meta.push_back("seed = " + std::to_string(io.seed));
    t.meta.push_back(std::string("code_version = ") + kCodeVersion);
}

std::vector<Vec3> fibonacci_sphere(int k) {
    std::vector<Vec3> dirs;
    dirs.reserve(std::size_t(k));
    const double ga = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < k; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / double(k);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = ga * i;
        dirs.push_back({r * std::cos(phi), r * std::sin(phi), z});
    }
    return dirs;
}

void try_plot(const SvgPlot& plot, const std::string& path) {
    try {
        plot.write(path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "plot skipped (%s): %s\n", path.c_str(), e.what());
    }
}

// ---------------------------------------------------------------------------
// debye-check (Fig. 1)

ExperimentResult debye_check(RunIo& io) {
    ExperimentResult res;
    const double rho_si = io.getd("plasma.rho", 0.5e17);
    PlasmaParams params;
    if (io.cfg->has("plasma.temperature"))
        params = PlasmaParams::from_si(io.ctx, rho_si, io.getd("plasma.temperature", 13.2));
    else
        params = PlasmaParams::from_si_gamma(io.ctx, rho_si, io.getd("plasma.gamma", 0.1));

    const int n_main = int(io.getl("plasma.n", 4096));
    std::vector<double> sweep = io.getlist("plasma.n_sweep", {512, 2048, 8192});
    const double q_src = io.getd("source.charge", 4.0);
    const double prerun = io.getd("window.prerun_periods", 8.0);
    const double settle = io.getd("window.settle_periods", 3.0);
    const double window = io.getd("window.periods", 20.0);
    const int realizations = int(io.getl("window.realizations", 6));
    const int sweep_realizations = int(io.getl("window.sweep_realizations", 3));
    const int n_dirs = int(io.getl("probe.directions", 48));
    const int n_radii = int(io.getl("probe.radii", 14));
    const double r_lo = io.getd("probe.r_min_over_lambda", 0.3);
    const double r_hi_req = io.getd("probe.r_max_over_lambda", 3.0);
    const double rtol = io.getd("integrator.rtol", 1e-6);
    const double samples_per_tau = io.getd("window.samples_per_tau_p", 50.0);

    const double lambda = params.debye_length;
    const auto dirs = fibonacci_sphere(n_dirs);

    ResultTable table;
    table.columns = {"n_particles", "r_over_lambda", "ratio", "ratio_err", "debye", "n_samples"};
    add_meta(table, io);

    struct ProfileOut {
        std::vector<double> r, ratio, err;
        double rstar = 0.0;
    };
    std::map<int, ProfileOut> profiles;

    std::vector<int> all_n = {n_main};
    for (double s : sweep)
        if (int(s) != n_main) all_n.push_back(int(s));

    for (int n_particles : all_n) {
        const int reals = (n_particles == n_main) ? realizations : sweep_realizations;
        // Keep probes inside the trap: r_max capped at 0.85 R.
        const double r_trap =
            std::cbrt(3.0 * n_particles / (4.0 * kPi * params.rho));
        const double r_hi = std::min(r_hi_req, 0.85 * r_trap / lambda);
        std::vector<double> radii(std::size_t(n_radii));
        for (int k = 0; k < n_radii; ++k)
            radii[std::size_t(k)] =
                lambda * (r_lo + (r_hi - r_lo) * k / double(n_radii - 1));
        std::vector<Vec3> points;
        for (double r : radii)
            for (const auto& d : dirs) points.push_back(d * r);

        // batch accumulators: [realization][batch][radius]
        const int batches = 8;
        std::vector<std::vector<double>> bsum(
            std::size_t(reals), std::vector<double>(std::size_t(batches * n_radii), 0.0));
        std::vector<std::vector<long>> bcnt(
            std::size_t(reals), std::vector<long>(std::size_t(batches * n_radii), 0));

        parallel_chunks(std::size_t(reals), io.workers, [&](std::size_t real) {
            Rng rng(io.seed, 7000 + real + std::uint64_t(n_particles));
            PlasmaState plasma = init_plasma(n_particles, params, io.ctx, rng);
            IntegratorConfig cfg;
            cfg.rtol = rtol;
            cfg.h_init = 0.02 * params.tau_p();
            cfg.h_min = 1e-12 * params.tau_p();
            PlasmaDynamics dyn(std::move(plasma), cfg, 1);
            dyn.advance_to(prerun * params.tau_p());
            FixedChargeSource src;
            src.charges.push_back({{0, 0, 0}, q_src});
            dyn.source = src;
            const double t0 = dyn.state().t + settle * params.tau_p();
            dyn.advance_to(t0);
            const double dt = params.tau_p() / samples_per_tau;
            const double t_end = t0 + window * params.tau_p();
            for (double t_next = t0; t_next < t_end; t_next += dt) {
                dyn.advance_to(t_next);
                const auto fields = field_at(points, dyn.state(), {});
                const int batch = std::min(batches - 1,
                                           int((dyn.state().t - t0) / (t_end - t0) * batches));
                std::size_t idx = 0;
                for (int k = 0; k < n_radii; ++k) {
                    const double r = radii[std::size_t(k)];
                    const double as2 = dyn.state().a_s * dyn.state().a_s;
                    const double e_bare = 2.0 * q_src * r / std::pow(r * r + as2, 1.5);
                    double acc = 0.0;
                    for (int d = 0; d < n_dirs; ++d, ++idx)
                        acc += dot(fields[idx], dirs[std::size_t(d)]);
                    bsum[real][std::size_t(batch * n_radii + k)] +=
                        1.0 + acc / double(n_dirs) / e_bare;
                    bcnt[real][std::size_t(batch * n_radii + k)] += 1;
                }
            }
        });

        ProfileOut prof;
        prof.r = radii;
        prof.ratio.resize(std::size_t(n_radii));
        prof.err.resize(std::size_t(n_radii));
        for (int k = 0; k < n_radii; ++k) {
            std::vector<double> means;
            long n_tot = 0;
            for (int real = 0; real < reals; ++real)
                for (int b = 0; b < batches; ++b) {
                    const long c = bcnt[std::size_t(real)][std::size_t(b * n_radii + k)];
                    if (c == 0) continue;
                    means.push_back(bsum[std::size_t(real)][std::size_t(b * n_radii + k)] /
                                    double(c));
                    n_tot += c;
                }
            const MeanErr me = mean_stderr(means);
            prof.ratio[std::size_t(k)] = me.mean;
            prof.err[std::size_t(k)] = me.stderr_;
            table.add_row({double(n_particles), radii[std::size_t(k)] / lambda, me.mean,
                           me.stderr_, debye_point_ratio(radii[std::size_t(k)], lambda),
                           double(n_tot)});
        }
        // Agreement radius: largest probe radius such that every bin inside
        // agrees with Debye within max(10%, 2 sigma).
        double rstar = 0.0;
        for (int k = 0; k < n_radii; ++k) {
            const double d = debye_point_ratio(radii[std::size_t(k)], lambda);
            const double tol = std::max(0.10 * d, 2.0 * prof.err[std::size_t(k)]);
            if (std::abs(prof.ratio[std::size_t(k)] - d) <= tol)
                rstar = radii[std::size_t(k)] / lambda;
            else
                break;
        }
        prof.rstar = rstar;
        profiles[n_particles] = prof;
        res.metrics["rstar_" + std::to_string(n_particles)] = rstar;
    }

    // Criterion on the main run: within 10% of Debye over [0.5, 2] lambda.
    double max_rel_dev = 0.0;
    for (std::size_t k = 0; k < profiles[n_main].r.size(); ++k) {
        const double rl = profiles[n_main].r[k] / lambda;
        if (rl < 0.5 - 1e-9 || rl > 2.0 + 1e-9) continue;
        const double d = debye_point_ratio(profiles[n_main].r[k], lambda);
        max_rel_dev = std::max(max_rel_dev, std::abs(profiles[n_main].ratio[k] - d) / d);
    }
    res.metrics["max_rel_dev_main"] = max_rel_dev;
    bool monotone = true;
    std::vector<int> sweep_sorted;
    for (double s : sweep) sweep_sorted.push_back(int(s));
    std::sort(sweep_sorted.begin(), sweep_sorted.end());
    for (std::size_t i = 1; i < sweep_sorted.size(); ++i) {
        const double bin = (r_hi_req - r_lo) / double(n_radii - 1);
        if (profiles[sweep_sorted[i]].rstar <
            profiles[sweep_sorted[i - 1]].rstar - 1.01 * bin)
            monotone = false;
    }
    res.metrics["rstar_monotone"] = monotone ? 1.0 : 0.0;
    const bool pass = max_rel_dev <= 0.10 && monotone;
    res.exit_code = pass ? 0 : 4;
    res.metrics["pass"] = pass ? 1.0 : 0.0;

    table.write_csv(io.out_dir + "/results.csv");
    if (io.plots) {
        SvgPlot plot("Field ratio around a stationary charge", "r / lambda", "E / E_bare");
        const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
        int ci = 0;
        for (const auto& [np, prof] : profiles) {
            std::vector<double> rl;
            for (double r : prof.r) rl.push_back(r / lambda);
            plot.add_points(rl, prof.ratio, prof.err, "N=" + std::to_string(np),
                            colors[ci++ % 4]);
        }
        std::vector<double> rg, dg;
        for (int k = 0; k <= 100; ++k) {
            const double r = lambda * (r_lo + (r_hi_req - r_lo) * k / 100.0);
            rg.push_back(r / lambda);
            dg.push_back(debye_point_ratio(r, lambda));
        }
        plot.add_line(rg, dg, "Debye", "black", true);
        fs::create_directories(io.out_dir + "/plots");
        try_plot(plot, io.out_dir + "/plots/debye_check.svg");
    }
    std::ostringstream ss;
    ss << "debye-check: max relative deviation in [0.5,2]lambda = " << fmt_g(max_rel_dev)
       << (pass ? " (pass)" : " (FAIL)");
    res.summary = ss.str();
    return res;
}

// ---------------------------------------------------------------------------
// lifetime-scan (Figs. 2-5 + critical density)

struct LifetimePoint {
    double rho_scaled = 0.0;
    double kelvin = 0.0;
    LifetimeFit fit;
    long n_traj = 0;
    double gamma = 0.0;
};

LifetimePoint lifetime_point(const RunIo& io, int n, double rho_scaled, double kelvin,
                             long n_traj, double t_max_hint, const TwaOptions& opt_in) {
    const RydbergScales sc = rydberg_scales(n, io.ctx);
    const PlasmaParams params =
        PlasmaParams::from_temperature(rho_scaled, io.ctx.thermal_energy(kelvin));
    TwaOptions opt = opt_in;
    opt.workers = io.workers;

    LifetimePoint out;
    out.rho_scaled = rho_scaled;
    out.kelvin = kelvin;
    out.gamma = params.gamma;

    // Pilot runs bracket the decay time so the production grid covers the
    // fit window.
    double t_max = t_max_hint > 0.0 ? t_max_hint : 40.0 * sc.period;
    const long pilot_traj = std::max(500L, n_traj / 50);
    for (int attempt = 0; attempt < 8; ++attempt) {
        PopulationTrace tr =
            twa_evolve(sc, params, io.ctx, t_max, 25, pilot_traj, io.seed ^ 0x9170ULL, opt);
        const std::size_t lvl = tr.level_index(tr.n_osc);
        const double tail = tr.at(tr.times.size() - 1, lvl);
        if (tail > 0.85) {
            t_max *= 6.0;
            continue;
        }
        if (tail < 0.25) {
            // find time to ~0.55 and aim t_max there
            double t55 = t_max;
            for (std::size_t k = 0; k < tr.times.size(); ++k)
                if (tr.at(k, lvl) < 0.55) {
                    t55 = tr.times[k];
                    break;
                }
            if (tail < 0.08) {
                t_max = 1.5 * t55;
                continue;
            }
            t_max = 1.5 * t55;
        }
        break;
    }
    PopulationTrace trace =
        twa_evolve(sc, params, io.ctx, t_max, int(io.getl("lifetime.n_out", 48)), n_traj,
                   io.seed, opt);
    out.fit = fit_lifetime(trace);
    out.n_traj = n_traj;
    return out;
}

ExperimentResult lifetime_scan(RunIo& io) {
    ExperimentResult res;
    const double kelvin = io.getd("plasma.temperature", 40.0);
    std::vector<double> n_list = io.getlist("exciton.n_list", {4, 6, 8});
    const long n_traj = io.getl("ensemble.n_traj", 100000);
    TwaOptions opt;
    opt.n_plasma = int(io.getl("plasma.n", 64));
    opt.prerun_periods = io.getd("plasma.prerun_periods", 1.0);
    opt.rtol = io.getd("integrator.rtol", 1e-6);
    opt.back_reaction = io.getl("twa.back_reaction", 1) != 0;
    opt.h_cap_fraction = io.getd("twa.h_cap_fraction", 0.25);
    io.getl("lifetime.n_out", 48);  // consumed by lifetime_point

    // Per-n density grids: explicit lists (SI m^-3) or auto-calibrated from
    // short pilots to land at decay times ~ [6, 60] orbital periods.
    std::map<int, std::vector<double>> rho_lists;
    for (double nd : n_list) {
        const int n = int(nd);
        const std::string key = "lifetime.rho_list_n" + std::to_string(n);
        std::vector<double> list = io.getlist(key, {});
        if (list.empty()) {
            // FGR-style seed guess, then one pilot correction.
            const RydbergScales sc = rydberg_scales(n, io.ctx);
            const double kT = io.ctx.thermal_energy(kelvin);
            const double v_th = std::sqrt(kT / io.ctx.m_e_scaled);
            const double rate_target = sc.omega / (2.0 * kPi * 12.0);  // K ~ 12
            double rho0 = rate_target * v_th * 2.0 * sc.osc_mass * sc.omega /
                          (4.0 * (sc.n_osc + 1.0));
            LifetimePoint p = lifetime_point(io, n, rho0, kelvin, 4000, -1.0, opt);
            if (!p.fit.censored && p.fit.tau > 0.0) {
                const double K = p.fit.tau / sc.period;
                rho0 *= K / 12.0;  // tau ~ 1/rho
            }
            for (double f : {1.0, 0.5623, 0.3162, 0.1778, 0.1}) list.push_back(rho0 * f);
            for (double& r : list) r = io.ctx.density_to_si(r);
        }
        rho_lists[n] = list;
    }

    ResultTable table;
    table.columns = {"n",        "rho_si",   "temperature_k", "n_traj", "tau_scaled",
                     "tau_err",  "tau_s",    "tau_over_tryd", "gamma",  "omega_ratio"};
    add_meta(table, io);

    std::map<int, PowerLawFit> fits;
    std::map<int, std::vector<std::array<double, 3>>> scan_data;  // rho, tau, err (scaled)
    bool any_failure = false;

    for (double nd : n_list) {
        const int n = int(nd);
        const RydbergScales sc = rydberg_scales(n, io.ctx);
        std::vector<double> rhos, taus, errs;
        double t_hint = -1.0;
        for (double rho_si : rho_lists[n]) {
            const double rho = io.ctx.density_from_si(rho_si);
            LifetimePoint p = lifetime_point(io, n, rho, kelvin, n_traj, t_hint, opt);
            if (p.fit.censored || p.fit.tau <= 0.0) {
                any_failure = true;
                continue;
            }
            // Successive densities shrink by ~0.56, so tau grows by ~1.8;
            // seed the next pilot near 0.8 of the expected tau.
            t_hint = 1.45 * p.fit.tau;
            const PlasmaParams params =
                PlasmaParams::from_temperature(rho, io.ctx.thermal_energy(kelvin));
            rhos.push_back(rho);
            taus.push_back(p.fit.tau);
            errs.push_back(std::max(p.fit.tau_err, 1e-6 * p.fit.tau));
            table.add_row({double(n), rho_si, kelvin, double(n_traj), p.fit.tau, p.fit.tau_err,
                           io.ctx.time_to_si(p.fit.tau), p.fit.tau / sc.period, p.gamma,
                           sc.omega / params.omega_p});
        }
        if (rhos.size() >= 3) {
            fits[n] = fit_power_law(rhos, taus, errs);
            res.metrics["fit_exp_n" + std::to_string(n)] = fits[n].exponent;
            res.metrics["fit_exp_err_n" + std::to_string(n)] = fits[n].exponent_err;
            scan_data[n] = {};
            for (std::size_t i = 0; i < rhos.size(); ++i)
                scan_data[n].push_back({rhos[i], taus[i], errs[i]});
        } else {
            any_failure = true;
        }
    }

    // Vertical cut (Fig. 3) at the geometric center of the middle-n grid.
    if (fits.size() >= 3) {
        const int n_mid = int(n_list[n_list.size() / 2]);
        const double rho_cut =
            io.cfg->has("lifetime.cut_rho")
                ? io.ctx.density_from_si(io.getd("lifetime.cut_rho", 0.0))
                : std::sqrt(fits[n_mid].x_min * fits[n_mid].x_max);
        const VerticalCut cut = vertical_cut(fits, rho_cut);
        if (cut.has_fit) {
            res.metrics["cut_exp"] = cut.n_fit.exponent;
            res.metrics["cut_exp_err"] = cut.n_fit.exponent_err;
            res.metrics["cut_extrapolated"] = cut.extrapolated ? 1.0 : 0.0;
        }
    }

    // Critical densities and their n-scaling.
    std::vector<double> ns_d, rhocrs;
    for (auto& [n, f] : fits) {
        const RydbergScales sc = rydberg_scales(n, io.ctx);
        try {
            const CriticalDensity cd = critical_density_from_fit(f, sc.omega);
            res.metrics["rho_cr_si_n" + std::to_string(n)] = io.ctx.density_to_si(cd.rho_cr);
            ns_d.push_back(double(n));
            rhocrs.push_back(cd.rho_cr);
        } catch (const std::exception&) {
            any_failure = true;
        }
    }
    if (ns_d.size() >= 3) {
        const PowerLawFit f = fit_power_law(ns_d, rhocrs);
        res.metrics["rhocr_exp"] = f.exponent;
        res.metrics["rhocr_exp_err"] = f.exponent_err;
    }

    // Normalized-lifetime slope (Fig. 5): tau/t_Ryd vs omega_Ryd/omega_p.
    for (auto& [n, data] : scan_data) {
        const RydbergScales sc = rydberg_scales(n, io.ctx);
        std::vector<double> xs, ys, es;
        for (auto& d : data) {
            xs.push_back(sc.omega / plasma_frequency(d[0]));
            ys.push_back(d[1] / sc.period);
            es.push_back(d[2] / sc.period);
        }
        const PowerLawFit f = fit_power_law(xs, ys, es);
        res.metrics["norm_slope_n" + std::to_string(n)] = f.exponent;
        res.metrics["norm_slope_err_n" + std::to_string(n)] = f.exponent_err;
    }

    // Temperature scan (Fig. 4).
    if (io.getl("lifetime.t_scan", 1)) {
        const int n_t = int(io.getl("exciton.n_temperature", 6));
        const double rho_t_si = io.getd("lifetime.rho_temperature", 1.07e19);
        std::vector<double> t_list = io.getlist("lifetime.temperature_list", {40, 80, 160, 320});
        const long n_traj_t = io.getl("lifetime.n_traj_temperature", 30000);
        std::vector<double> ts, taus, errs;
        for (double tk : t_list) {
            LifetimePoint p = lifetime_point(io, n_t, io.ctx.density_from_si(rho_t_si), tk,
                                             n_traj_t, -1.0, opt);
            if (p.fit.censored || p.fit.tau <= 0.0) {
                any_failure = true;
                continue;
            }
            ts.push_back(tk);
            taus.push_back(p.fit.tau);
            errs.push_back(std::max(p.fit.tau_err, 1e-6 * p.fit.tau));
            table.add_row({double(n_t), rho_t_si, tk, double(n_traj_t), p.fit.tau,
                           p.fit.tau_err, io.ctx.time_to_si(p.fit.tau),
                           p.fit.tau / rydberg_scales(n_t, io.ctx).period, p.gamma, 0.0});
        }
        if (ts.size() >= 3) {
            const PowerLawFit f = fit_power_law(ts, taus, errs);
            res.metrics["temperature_exp"] = f.exponent;
            res.metrics["temperature_exp_err"] = f.exponent_err;
        }
    }

    // Algebraic consistency: omega_Ryd(20) / omega_p(6.25e16 m^-3).
    res.metrics["omega_ratio_check"] =
        rydberg_scales(20, io.ctx).omega /
        plasma_frequency(io.ctx.density_from_si(6.25e16));

    table.write_csv(io.out_dir + "/results.csv");
    if (io.plots) {
        fs::create_directories(io.out_dir + "/plots");
        SvgPlot plot("Plasma-induced lifetime vs density (T = " + fmt_g(kelvin) + " K)",
                     "rho (m^-3)", "tau (s)");
        plot.set_log_x(true);
        plot.set_log_y(true);
        const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c"};
        int ci = 0;
        for (auto& [n, data] : scan_data) {
            std::vector<double> xs, ys, es, fx, fy;
            for (auto& d : data) {
                xs.push_back(io.ctx.density_to_si(d[0]));
                ys.push_back(io.ctx.time_to_si(d[1]));
                es.push_back(io.ctx.time_to_si(d[2]));
            }
            for (int k = 0; k <= 40; ++k) {
                const double r = fits[n].x_min * std::pow(fits[n].x_max / fits[n].x_min, k / 40.0);
                fx.push_back(io.ctx.density_to_si(r));
                fy.push_back(io.ctx.time_to_si(fits[n].eval(r)));
            }
            plot.add_points(xs, ys, es, "n=" + std::to_string(n), colors[ci % 3]);
            plot.add_line(fx, fy, "fit n=" + std::to_string(n), colors[ci % 3], true);
            ++ci;
        }
        try_plot(plot, io.out_dir + "/plots/lifetime_vs_density.svg");
    }

    res.exit_code = any_failure ? 3 : 0;
    std::ostringstream ss;
    ss << "lifetime-scan over n = {";
    for (double n : n_list) ss << int(n) << " ";
    ss << "} at T = " << kelvin << " K";
    res.summary = ss.str();
    return res;
}

// ---------------------------------------------------------------------------
// classical-lifetime

ExperimentResult classical_lifetime(RunIo& io) {
    ExperimentResult res;
    const int n = int(io.getl("exciton.n", 6));
    const int l = int(io.getl("exciton.l", 1));
    const double kelvin = io.getd("plasma.temperature", 40.0);
    const long n_traj = io.getl("ensemble.n_traj", 3000);
    std::vector<double> rho_list_si = io.getlist("classical.rho_list", {});
    ClassicalMcOptions opt;
    opt.n_plasma = int(io.getl("plasma.n", 64));
    opt.prerun_periods = io.getd("plasma.prerun_periods", 1.0);
    opt.time_cap_rydberg = io.getd("classical.time_cap_rydberg", 200.0);
    opt.rtol = io.getd("integrator.rtol", 1e-6);
    opt.xi_override = io.getd("exciton.xi", -1.0);
    opt.workers = io.workers;
    if (rho_list_si.empty()) {
        res.exit_code = 2;
        res.summary = "classical-lifetime: classical.rho_list (SI m^-3) is required";
        return res;
    }

    ResultTable table;
    table.columns = {"n", "l", "rho_si", "n_traj", "tau_scaled", "tau_lo", "tau_hi",
                     "censored_fraction"};
    add_meta(table, io);

    std::vector<double> rhos, taus, errs;
    for (double rho_si : rho_list_si) {
        const double rho = io.ctx.density_from_si(rho_si);
        const PlasmaParams params =
            PlasmaParams::from_temperature(rho, io.ctx.thermal_energy(kelvin));
        const SurvivalRecord rec =
            classical_lifetime_mc(n, l, params, io.ctx, n_traj, io.seed, opt);
        table.add_row({double(n), double(l), rho_si, double(n_traj), rec.tau, rec.tau_lo,
                       rec.tau_hi, double(rec.n_censored) / double(rec.n_traj)});
        if (!rec.all_censored) {
            rhos.push_back(rho);
            taus.push_back(rec.tau);
            errs.push_back(0.5 * (rec.tau_hi - rec.tau_lo));
        }
    }
    if (rhos.size() >= 3) {
        const PowerLawFit f = fit_power_law(rhos, taus, errs);
        res.metrics["classical_exp"] = f.exponent;
        res.metrics["classical_exp_err"] = f.exponent_err;
    } else {
        res.exit_code = 3;
    }
    table.write_csv(io.out_dir + "/results.csv");
    res.summary = "classical-lifetime MC";
    return res;
}

// ---------------------------------------------------------------------------
// screening-ellipse (Fig. 6)

ExperimentResult screening_ellipse(RunIo& io) {
    ExperimentResult res;
    const int n = int(io.getl("exciton.n", 20));
    const double xi = io.getd("exciton.xi", 0.95);
    const double rho_si = io.getd("plasma.rho", 6.25e16);
    const double kelvin = io.getd("plasma.temperature", 7.0);
    const double freq_scale = io.getd("exciton.freq_scale", 1.0);

    ScreeningOptions opt;
    opt.n_plasma = int(io.getl("plasma.n", 256));
    opt.prerun_periods = io.getd("window.prerun_periods", 8.0);
    opt.settle_periods = io.getd("window.settle_periods", 3.0);
    opt.window_periods = io.getd("window.periods", 60.0);
    opt.realizations = int(io.getl("window.realizations", 8));
    opt.rtol = io.getd("integrator.rtol", 1e-6);
    opt.workers = io.workers;
    opt.bins = int(io.getl("profile.bins", 16));
    opt.seed = io.seed;

    const PlasmaParams params = PlasmaParams::from_si(io.ctx, rho_si, kelvin);
    OrbitPair orbit = init_kepler(n, 1, io.ctx);
    orbit.eccentricity = xi;
    orbit = precess(orbit, io.getd("exciton.omega_prec_factor", 0.2) * orbit.omega);
    OrbitPair run_orbit = orbit;  // frequency sweep rescales the copy

    run_orbit.omega *= freq_scale;
    run_orbit.omega_prec *= freq_scale;
    const ScreeningProfile prof = orbit_screening_profile(run_orbit, params, io.ctx, opt);

    ResultTable table;
    table.columns = {"separation", "sep_over_lambda", "ratio", "ratio_err", "debye", "n_samples"};
    add_meta(table, io);
    double z_num = 0.0, z_den = 0.0, max_abs_dev = 0.0;
    for (std::size_t b = 0; b < prof.bin_center.size(); ++b) {
        if (prof.empty[b]) continue;
        const double d = debye_point_ratio(prof.bin_center[b], params.debye_length);
        table.add_row({prof.bin_center[b], prof.bin_center[b] / params.debye_length,
                       prof.ratio[b], prof.ratio_err[b], d, double(prof.n_samples[b])});
        const double sig = std::max(prof.ratio_err[b], 1e-6);
        z_num += (prof.ratio[b] - d) / (sig * sig);
        z_den += 1.0 / (sig * sig);
        max_abs_dev = std::max(max_abs_dev, std::abs(prof.ratio[b] - 1.0));
    }
    const double mean_excess = z_num / z_den;
    const double mean_excess_err = 1.0 / std::sqrt(z_den);
    res.metrics["above_debye_z"] = mean_excess / mean_excess_err;
    res.metrics["mean_excess"] = mean_excess;
    res.metrics["max_dev_from_unity"] = max_abs_dev;
    table.write_csv(io.out_dir + "/results.csv");

    if (io.plots) {
        fs::create_directories(io.out_dir + "/plots");
        SvgPlot plot("Elliptic-orbit screening (n=" + std::to_string(n) + ")", "separation (a_B)",
                     "E / E_bare");
        plot.add_points(prof.bin_center, prof.ratio, prof.ratio_err, "simulated", "#1f77b4");
        std::vector<double> xs, ys;
        for (double r : prof.bin_center) {
            xs.push_back(r);
            ys.push_back(debye_point_ratio(r, params.debye_length));
        }
        plot.add_line(xs, ys, "Debye", "black", true);
        try_plot(plot, io.out_dir + "/plots/ellipse_screening.svg");
    }
    res.summary = "screening-ellipse";
    return res;
}

// ---------------------------------------------------------------------------
// screening-circular / ring-fragments (App. C)

ExperimentResult screening_circular(RunIo& io) {
    ExperimentResult res;
    const double rho_si = io.getd("plasma.rho", 0.5e17);
    const double gamma = io.getd("plasma.gamma", 0.1);
    const PlasmaParams params = PlasmaParams::from_si_gamma(io.ctx, rho_si, gamma);
    const std::string masses = io.cfg->get_string("orbit.masses", "equal");
    std::vector<double> omega_factors = io.getlist("orbit.omega_over_wp", {0.1, 10.0, 100.0});
    std::vector<double> seps_l = io.getlist("orbit.separations_over_lambda",
                                            {0.15, 0.25, 0.4, 0.55, 0.7});

    ScreeningOptions opt;
    opt.n_plasma = int(io.getl("plasma.n", 256));
    opt.prerun_periods = io.getd("window.prerun_periods", 8.0);
    opt.settle_periods = io.getd("window.settle_periods", 3.0);
    opt.window_periods = io.getd("window.periods", 40.0);
    opt.realizations = int(io.getl("window.realizations", 4));
    opt.rtol = io.getd("integrator.rtol", 1e-6);
    opt.workers = io.workers;
    opt.seed = io.seed;

    std::vector<double> seps;
    for (double s : seps_l) seps.push_back(s * params.debye_length);

    ResultTable table;
    table.columns = {"omega_over_wp", "separation", "sep_over_lambda", "ratio",
                     "ratio_err",     "debye",      "n_samples"};
    add_meta(table, io);

    const bool equal = masses == "equal";
    for (double of : omega_factors) {
        const ScreeningProfile prof =
            circular_orbit_profile(equal, seps, of * params.omega_p, params, io.ctx, opt);
        double max_dev_debye = 0.0, max_dev_unity = 0.0;
        for (std::size_t k = 0; k < seps.size(); ++k) {
            const double d = debye_point_ratio(seps[k], params.debye_length);
            table.add_row({of, seps[k], seps_l[k], prof.ratio[k], prof.ratio_err[k], d,
                           double(prof.n_samples[k])});
            max_dev_debye = std::max(max_dev_debye, std::abs(prof.ratio[k] - d) / d);
            max_dev_unity = std::max(max_dev_unity, std::abs(prof.ratio[k] - 1.0));
        }
        res.metrics["max_dev_debye_w" + fmt_g(of)] = max_dev_debye;
        res.metrics["max_dev_unity_w" + fmt_g(of)] = max_dev_unity;
    }
    table.write_csv(io.out_dir + "/results.csv");
    res.summary = "screening-circular (" + masses + " masses)";
    return res;
}

ExperimentResult ring_fragments(RunIo& io) {
    ExperimentResult res;
    const double rho_si = io.getd("plasma.rho", 0.5e17);
    const double gamma = io.getd("plasma.gamma", 0.1);
    const PlasmaParams params = PlasmaParams::from_si_gamma(io.ctx, rho_si, gamma);
    const double omega = io.getd("orbit.omega_over_wp", 10.0) * params.omega_p;
    std::vector<double> m_list = io.getlist("ring.fragment_counts", {1, 2, 16, 128});
    std::vector<double> seps_l = io.getlist("orbit.separations_over_lambda",
                                            {0.15, 0.25, 0.4, 0.55, 0.7});

    ScreeningOptions opt;
    opt.n_plasma = int(io.getl("plasma.n", 256));
    opt.prerun_periods = io.getd("window.prerun_periods", 8.0);
    opt.settle_periods = io.getd("window.settle_periods", 3.0);
    opt.window_periods = io.getd("window.periods", 40.0);
    opt.realizations = int(io.getl("window.realizations", 4));
    opt.rtol = io.getd("integrator.rtol", 1e-6);
    opt.workers = io.workers;
    opt.seed = io.seed;

    std::vector<double> seps;
    for (double s : seps_l) seps.push_back(s * params.debye_length);

    ResultTable table;
    table.columns = {"fragments", "separation", "sep_over_lambda", "ratio", "ratio_err",
                     "n_samples"};
    add_meta(table, io);

    std::map<int, ScreeningProfile> profs;
    for (double md : m_list) {
        const int m = int(md);
        profs[m] = ring_fragment_profile(m, false, seps, omega, params, io.ctx, opt);
        for (std::size_t k = 0; k < seps.size(); ++k)
            table.add_row({double(m), seps[k], seps_l[k], profs[m].ratio[k],
                           profs[m].ratio_err[k], double(profs[m].n_samples[k])});
    }
    // Pairwise agreement z-scores vs the single-charge profile.
    if (profs.count(1)) {
        for (auto& [m, p] : profs) {
            if (m == 1) continue;
            double worst = 0.0;
            for (std::size_t k = 0; k < seps.size(); ++k) {
                const double sig = std::hypot(p.ratio_err[k], profs[1].ratio_err[k]);
                if (sig > 0.0)
                    worst = std::max(worst, std::abs(p.ratio[k] - profs[1].ratio[k]) / sig);
            }
            res.metrics["max_z_vs_single_m" + std::to_string(m)] = worst;
        }
    }
    table.write_csv(io.out_dir + "/results.csv");
    res.summary = "ring-fragments";
    return res;
}

// ---------------------------------------------------------------------------
// dipole-screening (Fig. 9)

ExperimentResult dipole_screening(RunIo& io) {
    ExperimentResult res;
    const double rho_si = io.getd("plasma.rho", 0.5e17);
    const double gamma = io.getd("plasma.gamma", 0.1);
    const PlasmaParams params = PlasmaParams::from_si_gamma(io.ctx, rho_si, gamma);
    std::vector<double> omega_factors =
        io.getlist("dipole.omega_over_wp", {0.2828427, 1.4142136, 7.0710678});
    std::vector<double> radii_l =
        io.getlist("dipole.radii_over_lambda", {0.25, 0.4, 0.55, 0.7, 0.85, 1.0});
    const double amplitude = io.getd("dipole.amplitude_factor", 0.25) * params.wigner_seitz;

    ScreeningOptions opt;
    opt.n_plasma = int(io.getl("plasma.n", 256));
    opt.prerun_periods = io.getd("window.prerun_periods", 8.0);
    opt.settle_periods = io.getd("window.settle_periods", 3.0);
    opt.window_periods = io.getd("window.periods", 120.0);
    opt.realizations = int(io.getl("window.realizations", 4));
    opt.rtol = io.getd("integrator.rtol", 1e-6);
    opt.workers = io.workers;
    opt.seed = io.seed;

    std::vector<double> radii;
    for (double r : radii_l) radii.push_back(r * params.debye_length);

    ResultTable table;
    table.columns = {"omega_over_wp", "half",      "r_over_lambda", "ratio",
                     "ratio_err",     "debye_ref", "n_halves"};
    add_meta(table, io);

    for (double of : omega_factors) {
        const DipoleScreeningResult r =
            oscillating_dipole_profile(amplitude, of * params.omega_p, radii, params, io.ctx, opt);
        double max_dev_ref = 0.0, max_dev_unity = 0.0, halves_z = 0.0;
        for (int parity = 0; parity < 2; ++parity) {
            for (std::size_t k = 0; k < radii.size(); ++k) {
                const double ref = debye_dipole_axis_ratio(radii[k], params.debye_length);
                table.add_row({of, double(parity), radii_l[k], r.half[parity].ratio[k],
                               r.half[parity].ratio_err[k], ref,
                               double(r.half[parity].n_samples[k])});
            }
        }
        for (std::size_t k = 0; k < radii.size(); ++k) {
            const double ref = debye_dipole_axis_ratio(radii[k], params.debye_length);
            const double mean = 0.5 * (r.half[0].ratio[k] + r.half[1].ratio[k]);
            max_dev_ref = std::max(max_dev_ref, std::abs(mean - ref) / ref);
            max_dev_unity = std::max(max_dev_unity, std::abs(mean - 1.0));
            const double sig = std::hypot(r.half[0].ratio_err[k], r.half[1].ratio_err[k]);
            if (sig > 0.0)
                halves_z = std::max(halves_z,
                                    std::abs(r.half[0].ratio[k] - r.half[1].ratio[k]) / sig);
        }
        res.metrics["max_dev_ref_w" + fmt_g(of)] = max_dev_ref;
        res.metrics["max_dev_unity_w" + fmt_g(of)] = max_dev_unity;
        res.metrics["halves_max_z_w" + fmt_g(of)] = halves_z;
    }
    table.write_csv(io.out_dir + "/results.csv");
    res.summary = "dipole-screening";
    return res;
}

// ---------------------------------------------------------------------------
// coupled-transfer (Fig. 8)

ExperimentResult coupled_transfer_exp(RunIo& io) {
    ExperimentResult res;
    const int n = int(io.getl("exciton.n", 8));
    const double rho_si = io.getd("plasma.rho", 0.5e17);
    const double gamma = io.getd("plasma.gamma", 0.2);
    const PlasmaParams params = PlasmaParams::from_si_gamma(io.ctx, rho_si, gamma);
    const double d_over_lambda = io.getd("coupled.d_over_lambda", 0.8);
    const double separation = d_over_lambda * params.debye_length;
    const RydbergScales sc = rydberg_scales(n, io.ctx);

    CoupledOptions opt;
    opt.n_plasma = int(io.getl("plasma.n", 64));
    opt.prerun_periods = io.getd("plasma.prerun_periods", 1.0);
    opt.rtol = io.getd("integrator.rtol", 1e-6);
    opt.workers = io.workers;
    const long n_traj = io.getl("ensemble.n_traj", 100000);

    // Vacuum beat check.
    {
        const double t_pred = vacuum_transfer_time(opt.use_electron_mass ? io.ctx.m_e_scaled : 0.5,
                                                   sc.omega, 2.0 / std::pow(separation, 3));
        CoupledOptions vac = opt;
        vac.n_plasma = 0;
        const TransferTrace tr = coupled_transfer(sc, separation, params, io.ctx, 1.1 * t_pred,
                                                  161, 4000, io.seed ^ 0xbeefULL, 0.0, vac);
        const ZeroCrossing z = first_zero_crossing(tr.times, tr.de_scaled, tr.de_scaled_err);
        if (z.found) {
            res.metrics["vacuum_zero_over_pred"] = z.t / (0.5 * t_pred);
        }
        res.metrics["vacuum_transfer_pred"] = t_pred;
    }

    // Single-exciton lifetime at the same parameters (for the regime check
    // and the compensation).
    TwaOptions topt;
    topt.n_plasma = opt.n_plasma;
    topt.prerun_periods = opt.prerun_periods;
    topt.rtol = opt.rtol;
    topt.workers = io.workers;
    double tau = io.getd("coupled.tau_override", 0.0);
    if (tau <= 0.0) {
        double t_max = 40.0 * sc.period;
        for (int attempt = 0; attempt < 8; ++attempt) {
            const PopulationTrace tr = twa_evolve(sc, params, io.ctx, t_max, 25,
                                                  io.getl("coupled.n_traj_lifetime", 20000),
                                                  io.seed ^ 0x7a0ULL, topt);
            const std::size_t lvl = tr.level_index(tr.n_osc);
            const double tail = tr.at(tr.times.size() - 1, lvl);
            if (tail > 0.85) { t_max *= 6.0; continue; }
            const LifetimeFit f = fit_lifetime(tr);
            if (!f.censored && f.tau > 0.0) tau = f.tau;
            break;
        }
    }
    res.metrics["tau_thermal"] = tau;

    const double t_pred = vacuum_transfer_time(io.ctx.m_e_scaled, sc.omega,
                                               2.0 / std::pow(separation, 3));
    const double t_zero_pred = 0.5 * t_pred;
    const double t_max = std::min(io.getd("coupled.t_max_factor", 1.4) * t_zero_pred,
                                  tau > 0.0 ? io.getd("coupled.t_max_tau_factor", 2.5) * tau
                                            : 1.4 * t_zero_pred);
    const TransferTrace tr =
        coupled_transfer(sc, separation, params, io.ctx, t_max, int(io.getl("coupled.n_out", 64)),
                         n_traj, io.seed, tau, opt);

    res.metrics["regime_valid"] = tr.regime_valid ? 1.0 : 0.0;
    res.metrics["transfer_pred"] = tr.transfer_time_pred;

    // Reference curves: unscreened beat vs Debye-screened beat.
    const double g_scr_factor = debye_dipole_axis_ratio(separation, params.debye_length);
    const double beat_un = coupled_beat_frequency(tr.mass, tr.omega, tr.g);
    const double beat_scr = coupled_beat_frequency(tr.mass, tr.omega, tr.g * g_scr_factor);
    const double de0 = tr.de_scaled.empty() ? 0.0 : tr.de_scaled[0];
    double chi2_un = 0.0, chi2_scr = 0.0;
    long n_pts = 0;
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        const double sig = std::max(tr.de_scaled_err[k], 1e-12);
        const double u = de0 * std::cos(beat_un * tr.times[k]);
        const double s = de0 * std::cos(beat_scr * tr.times[k]);
        chi2_un += ((tr.de_scaled[k] - u) / sig) * ((tr.de_scaled[k] - u) / sig);
        chi2_scr += ((tr.de_scaled[k] - s) / sig) * ((tr.de_scaled[k] - s) / sig);
        ++n_pts;
    }
    res.metrics["chi2_unscreened"] = chi2_un / double(n_pts);
    res.metrics["chi2_screened"] = chi2_scr / double(n_pts);
    // Separation of the two hypotheses in sigma: sqrt(dchi2).
    res.metrics["screened_rejection_sigma"] =
        chi2_scr > chi2_un ? std::sqrt(chi2_scr - chi2_un) : 0.0;

    ResultTable table;
    table.columns = {"t",  "e1", "e1_err", "e2", "e2_err", "de_scaled", "de_scaled_err",
                     "ref_unscreened", "ref_screened"};
    add_meta(table, io);
    for (std::size_t k = 0; k < tr.times.size(); ++k)
        table.add_row({tr.times[k], tr.e1[k], tr.e1_err[k], tr.e2[k], tr.e2_err[k],
                       tr.de_scaled[k], tr.de_scaled_err[k],
                       de0 * std::cos(beat_un * tr.times[k]),
                       de0 * std::cos(beat_scr * tr.times[k])});
    table.write_csv(io.out_dir + "/results.csv");

    if (io.plots) {
        fs::create_directories(io.out_dir + "/plots");
        SvgPlot plot("Coupled-exciton energy transfer", "t (scaled)", "dE scaled");
        plot.add_points(tr.times, tr.de_scaled, tr.de_scaled_err, "simulated", "#1f77b4");
        std::vector<double> u, s;
        for (std::size_t k = 0; k < tr.times.size(); ++k) {
            u.push_back(de0 * std::cos(beat_un * tr.times[k]));
            s.push_back(de0 * std::cos(beat_scr * tr.times[k]));
        }
        plot.add_line(tr.times, u, "unscreened", "black");
        plot.add_line(tr.times, s, "Debye-screened", "#d62728", true);
        try_plot(plot, io.out_dir + "/plots/coupled_transfer.svg");
    }
    res.summary = "coupled-transfer";
    return res;
}

// ---------------------------------------------------------------------------
// regime-diagram (Fig. 7)

ExperimentResult regime_diagram_exp(RunIo& io) {
    ExperimentResult res;
    const int n = int(io.getl("exciton.n", 20));
    if (!io.cfg->has("regime.rho_cr_ref") || !io.cfg->has("regime.t_ref")) {
        res.exit_code = 2;
        res.summary = "regime-diagram: regime.rho_cr_ref (SI) and regime.t_ref (K) required "
                      "(from a lifetime-scan critical-density fit)";
        return res;
    }
    const double rho_cr_ref = io.getd("regime.rho_cr_ref", 0.0);
    const double t_ref = io.getd("regime.t_ref", 40.0);
    std::vector<double> temps = io.getlist("regime.temperature_list", {});
    if (temps.empty())
        for (int k = 0; k <= 40; ++k) temps.push_back(1.0 * std::pow(100.0, k / 40.0));

    ResultTable table = regime_diagram(n, temps, rho_cr_ref, t_ref, io.ctx);
    add_meta(table, io);
    table.write_csv(io.out_dir + "/results.csv");

    // Fraction of the weakly coupled region where the screening limit lies
    // above the observable limit.
    long above = 0, total = 0;
    for (const auto& row : table.rows) {
        const double rho_obs = row[1], rho_scr = row[2], rho_gamma = row[3];
        if (rho_obs < rho_gamma) {  // observable boundary inside Gamma < 0.2
            ++total;
            if (rho_scr > rho_obs) ++above;
        }
    }
    res.metrics["screening_above_observable_fraction"] =
        total > 0 ? double(above) / double(total) : 0.0;

    if (io.plots) {
        fs::create_directories(io.out_dir + "/plots");
        SvgPlot plot("Regime diagram (n=" + std::to_string(n) + ")", "T (K)", "rho (m^-3)");
        plot.set_log_x(true);
        plot.set_log_y(true);
        std::vector<double> t, obs, scr, gam;
        for (const auto& row : table.rows) {
            t.push_back(row[0]);
            obs.push_back(row[1]);
            scr.push_back(row[2]);
            gam.push_back(row[3]);
        }
        plot.add_line(t, obs, "observable limit", "#d62728");
        plot.add_line(t, scr, "screening limit", "#1f77b4", true);
        plot.add_line(t, gam, "Gamma = 0.2", "gray", true);
        try_plot(plot, io.out_dir + "/plots/regime_diagram.svg");
    }
    res.summary = "regime-diagram";
    return res;
}

// ---------------------------------------------------------------------------
// toy-benchmark (Fig. 10)

ExperimentResult toy_benchmark(RunIo& io) {
    ExperimentResult res;
    ToyConfig cfg;
    cfg.n_osc = int(io.getl("toy.n_osc", -1));
    cfg.nx1 = int(io.getl("toy.nx1", 512));
    cfg.nx2 = int(io.getl("toy.nx2", 768));
    cfg.packet_width = io.getd("toy.packet_width", 2.0);
    cfg.n_out = int(io.getl("toy.n_out", 64));
    cfg.finalize(io.ctx);
    const long n_traj = io.getl("ensemble.n_traj", 2000000);

    const ToyTrace se = se_evolve(cfg);
    const ToyTrace twa = twa_toy(cfg, n_traj, io.seed, io.workers);

    // Common grid: SE recorded on its own stride; interpolate SE onto TWA
    // times (both uniform from 0 to t_f).
    double sup = 0.0;
    std::vector<double> se_interp(twa.times.size());
    for (std::size_t k = 0; k < twa.times.size(); ++k) {
        const double t = twa.times[k];
        const auto it = std::lower_bound(se.times.begin(), se.times.end(), t);
        std::size_t j = std::min(se.times.size() - 1,
                                 std::size_t(std::distance(se.times.begin(), it)));
        if (j == 0) j = 1;
        const double t0 = se.times[j - 1], t1 = se.times[j];
        const double f = t1 > t0 ? (t - t0) / (t1 - t0) : 0.0;
        se_interp[k] = se.p0[j - 1] * (1.0 - f) + se.p0[j] * f;
        sup = std::max(sup, std::abs(se_interp[k] - twa.p0[k]));
    }
    res.metrics["sup_diff"] = sup;
    res.metrics["se_norm_drift"] = se.norm_drift;
    res.metrics["se_final_p0"] = se.p0.back();
    res.exit_code = (sup <= 0.05 && se.norm_drift <= 1e-6) ? 0 : 4;

    ResultTable table;
    table.columns = {"t_over_period", "p0_se", "p0_twa", "p0_twa_err"};
    add_meta(table, io);
    for (std::size_t k = 0; k < twa.times.size(); ++k)
        table.add_row({twa.times[k], se_interp[k], twa.p0[k], twa.p0_err[k]});
    table.write_csv(io.out_dir + "/results.csv");

    if (io.plots) {
        fs::create_directories(io.out_dir + "/plots");
        SvgPlot plot("SE vs TWA scattering benchmark", "t / T_osc", "P0");
        plot.add_line(se.times, se.p0, "SE", "black");
        plot.add_points(twa.times, twa.p0, twa.p0_err, "TWA", "#1f77b4");
        try_plot(plot, io.out_dir + "/plots/toy_benchmark.svg");
    }
    std::ostringstream ss;
    ss << "toy-benchmark: sup|P0_TWA - P0_SE| = " << fmt_g(sup)
       << ", SE norm drift = " << fmt_g(se.norm_drift);
    res.summary = ss.str();
    return res;
}

}  // namespace

// ---------------------------------------------------------------------------

void ResultTable::add_row(const std::vector<double>& row) {
    if (row.size() != columns.size())
        throw std::invalid_argument("ResultTable: row width mismatch");
    rows.push_back(row);
}

void ResultTable::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("ResultTable: cannot write " + path);
    for (const auto& m : meta) out << "# " << m << "\n";
    for (std::size_t c = 0; c < columns.size(); ++c)
        out << columns[c] << (c + 1 < columns.size() ? "," : "\n");
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c)
            out << fmt_g(row[c]) << (c + 1 < row.size() ? "," : "\n");
}

std::vector<std::string> experiment_ids() {
    return {"debye-check",      "lifetime-scan",    "classical-lifetime",
            "screening-ellipse", "screening-circular", "ring-fragments",
            "regime-diagram",   "coupled-transfer", "dipole-screening", "toy-benchmark"};
}

MaterialContext material_from_config(const KeyValueConfig& cfg) {
    return MaterialContext(cfg.get_double("material.m_e_eff", 0.985),
                           cfg.get_double("material.m_h_eff", 0.575),
                           cfg.get_double("material.epsilon_rel", 7.5));
}

VerticalCut vertical_cut(const std::map<int, PowerLawFit>& fits_per_n, double rho) {
    if (fits_per_n.empty()) throw std::invalid_argument("vertical_cut: no fits");
    VerticalCut cut;
    for (const auto& [n, f] : fits_per_n) {
        cut.ns.push_back(n);
        cut.taus.push_back(f.eval(rho));
        // Log-space error propagation from the fit parameters.
        const double lx = std::log(rho);
        const double rel = std::hypot(f.log_prefactor_err, f.exponent_err * lx);
        cut.tau_errs.push_back(cut.taus.back() * std::min(rel, 1.0));
        if (rho < f.x_min || rho > f.x_max) cut.extrapolated = true;
    }
    if (cut.ns.size() >= 3) {
        std::vector<double> ns_d(cut.ns.begin(), cut.ns.end());
        cut.n_fit = fit_power_law(ns_d, cut.taus, cut.tau_errs);
        cut.has_fit = true;
    }
    return cut;
}

ResultTable regime_diagram(int n, const std::vector<double>& temperatures_k,
                           double rho_cr_ref_si, double t_ref_k, const MaterialContext& ctx) {
    if (rho_cr_ref_si <= 0.0 || t_ref_k <= 0.0)
        throw std::invalid_argument("regime_diagram: need a positive reference point");
    ResultTable t;
    t.columns = {"temperature_k", "rho_observable_si", "rho_screening_si", "rho_gamma02_si"};
    const RydbergScales sc = rydberg_scales(n, ctx);
    for (double tk : temperatures_k) {
        const double rho_obs = critical_density_scale_temperature(rho_cr_ref_si, t_ref_k, tk);
        // <r>_n / lambda = 0.5: lambda = 2 <r>_n; lambda^2 = kT/(8 pi rho).
        const double kT = ctx.thermal_energy(tk);
        const double lambda_target = 2.0 * sc.r_exp;
        const double rho_scr = kT / (8.0 * kPi * lambda_target * lambda_target);
        // Gamma = 0.2: a_ws = 2/(0.2 kT) = 10/kT.
        const double a_ws = 10.0 / kT;
        const double rho_gamma = 3.0 / (4.0 * kPi * a_ws * a_ws * a_ws);
        t.add_row({tk, rho_obs, ctx.density_to_si(rho_scr), ctx.density_to_si(rho_gamma)});
    }
    return t;
}

ExperimentResult run_experiment(const std::string& id, const KeyValueConfig& cfg,
                                const std::string& out_dir) {
    RunIo io;
    io.cfg = &cfg;
    io.out_dir = out_dir;
    io.t_start = std::chrono::steady_clock::now();
    ExperimentResult res;
    try {
        fs::create_directories(out_dir);
        io.ctx = material_from_config(cfg);
        io.seed = std::uint64_t(cfg.get_long("ensemble.seed", 1));
        io.workers = unsigned(cfg.get_long("ensemble.workers", long(default_workers())));
        io.plots = cfg.get_bool("output.plots", true);

        if (id == "debye-check") res = debye_check(io);
        else if (id == "lifetime-scan") res = lifetime_scan(io);
        else if (id == "classical-lifetime") res = classical_lifetime(io);
        else if (id == "screening-ellipse") res = screening_ellipse(io);
        else if (id == "screening-circular") res = screening_circular(io);
        else if (id == "ring-fragments") res = ring_fragments(io);
        else if (id == "regime-diagram") res = regime_diagram_exp(io);
        else if (id == "coupled-transfer") res = coupled_transfer_exp(io);
        else if (id == "dipole-screening") res = dipole_screening(io);
        else if (id == "toy-benchmark") res = toy_benchmark(io);
        else {
            res.exit_code = 2;
            res.summary = "unknown experiment id: " + id;
            return res;
        }
    } catch (const ConfigError& e) {
        res.exit_code = 2;
        res.summary = std::string("config error: ") + e.what();
    } catch (const std::invalid_argument& e) {
        res.exit_code = 2;
        res.summary = std::string("config error: ") + e.what();
    } catch (const std::exception& e) {
        res.exit_code = 3;
        res.summary = std::string("numerical failure: ") + e.what();
    }
    try {
        write_summary(io, res, id);
    } catch (const std::exception&) {
    }
    return res;
}

}  // namespace rydsim
