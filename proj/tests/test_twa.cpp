#include <cmath>
#include <numbers>

#include "doctest.h"
#include "rydsim/integrator.hpp"
#include "rydsim/twa.hpp"

using namespace rydsim;

namespace {
const MaterialContext ctx;
}

TEST_SUITE_BEGIN("unit");

TEST_CASE("driven oscillator: free rotation is exact") {
    DrivenOscillator o{2.0, 0.7, 1.3, -0.4};
    const double e0 = o.energy();
    o.rotate(13.77);
    CHECK(o.energy() == doctest::Approx(e0).epsilon(1e-12));
    DrivenOscillator o2{2.0, 0.7, 1.3, -0.4};
    const double t = 13.77;
    CHECK(o.x == doctest::Approx(o2.x * std::cos(0.7 * t) +
                                 o2.p / (2.0 * 0.7) * std::sin(0.7 * t)).epsilon(1e-12));
}

TEST_CASE("driven oscillator matches an adaptive ODE integration") {
    // Drive F(t) = A cos(W t) handled as successive Hermite cubics; reference
    // is a direct Cash-Karp run of the same ODE.
    const double m = 1.5, w = 1.0, A = 0.3, W = 0.37;
    auto force = [&](double t) { return A * std::cos(W * t); };
    auto rate = [&](double t) { return -A * W * std::sin(W * t); };

    DrivenOscillator osc{m, w, 1.0, 0.0};
    const double t_end = 30.0;
    const int n_steps = 80;  // h ~ T/8
    double t = 0.0;
    for (int k = 0; k < n_steps; ++k) {
        const double h = t_end / n_steps;
        double c[4];
        DrivenOscillator::hermite_coeffs(force(t), rate(t), force(t + h), rate(t + h), h, c);
        osc.advance(h, c);
        t += h;
    }

    CashKarp integ(2, [&](double tt, const std::vector<double>& y, std::vector<double>& d) {
        d.resize(2);
        d[0] = y[1] / m;
        d[1] = -m * w * w * y[0] + force(tt);
    });
    IntegratorConfig cfg;
    cfg.rtol = 1e-11;
    cfg.h_init = 0.05;
    cfg.h_min = 1e-12;
    std::vector<double> y = {1.0, 0.0};
    double tr = 0.0;
    integ.integrate_to(tr, y, t_end, cfg);
    CHECK(osc.x == doctest::Approx(y[0]).epsilon(2e-4));
    CHECK(osc.p == doctest::Approx(y[1]).epsilon(2e-4).scale(1.0));
}

TEST_CASE("driven oscillator: small-step series branch is continuous") {
    const double m = 1.0, w = 2.0 / 512.0;  // omega h crosses the series cutoff
    for (double h : {1e-6, 1e-3, 1.0, 20.0, 40.0}) {
        DrivenOscillator a{m, w, 0.5, 0.1};
        double c[4] = {0.2, -0.01, 1e-4, -1e-6};
        a.advance(h, c);
        // reference: 64 sub-steps of the same cubic re-expanded
        DrivenOscillator b{m, w, 0.5, 0.1};
        const int sub = 64;
        for (int k = 0; k < sub; ++k) {
            const double s0 = h * k / sub;
            const double hs = h / sub;
            double cs[4];
            // shift the cubic: D(s0 + u)
            cs[0] = c[0] + c[1] * s0 + c[2] * s0 * s0 + c[3] * s0 * s0 * s0;
            cs[1] = c[1] + 2.0 * c[2] * s0 + 3.0 * c[3] * s0 * s0;
            cs[2] = c[2] + 3.0 * c[3] * s0;
            cs[3] = c[3];
            b.advance(hs, cs);
        }
        CHECK(a.x == doctest::Approx(b.x).epsilon(1e-9).scale(1.0));
        CHECK(a.p == doctest::Approx(b.p).epsilon(1e-9).scale(w));
    }
}

TEST_CASE("vacuum TWA: eigenstate populations are stationary") {
    const RydbergScales sc = rydberg_scales(8, ctx);
    TwaOptions opt;
    opt.n_plasma = 0;
    opt.workers = 2;
    const PlasmaParams dummy = PlasmaParams::from_gamma(1e-10, 0.1);
    const PopulationTrace tr =
        twa_evolve(sc, dummy, ctx, 20.0 * sc.period, 9, 30000, 17, opt);
    const std::size_t lvl = tr.level_index(sc.n_osc);
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        CHECK(std::abs(tr.at(k, lvl) - 1.0) < 3.5 * tr.err_at(k, lvl));
        // neighbours stay empty
        CHECK(std::abs(tr.at(k, lvl - 1)) < 3.5 * tr.err_at(k, lvl - 1));
        CHECK(std::abs(tr.at(k, lvl + 2)) < 3.5 * tr.err_at(k, lvl + 2));
    }
    CHECK(tr.band_sum_max <= 1.0 + 3.0 * 0.02);
}

TEST_CASE("fit_lifetime recovers an exact exponential") {
    std::vector<double> t, p, e;
    const double tau = 7.3;
    for (int k = 0; k < 60; ++k) {
        t.push_back(0.02 * tau * k);
        p.push_back(std::exp(-t.back() / tau));
        e.push_back(1e-4);
    }
    const LifetimeFit f = fit_lifetime_series(t, p, e);
    CHECK_FALSE(f.censored);
    CHECK(f.tau == doctest::Approx(tau).epsilon(1e-6));

    // doubling the sampling density leaves tau unchanged
    std::vector<double> t2, p2, e2;
    for (int k = 0; k < 120; ++k) {
        t2.push_back(0.01 * tau * k);
        p2.push_back(std::exp(-t2.back() / tau));
        e2.push_back(1e-4);
    }
    const LifetimeFit f2 = fit_lifetime_series(t2, p2, e2);
    CHECK(f2.tau == doctest::Approx(f.tau).epsilon(1e-9));
}

TEST_CASE("fit_lifetime ignores a late-time plateau") {
    std::vector<double> t, p, e;
    const double tau = 3.0;
    for (int k = 0; k < 200; ++k) {
        t.push_back(0.02 * tau * k);
        const double decay = std::exp(-t.back() / tau);
        p.push_back(std::max(decay, 0.35));  // random-walk repopulation floor
        e.push_back(1e-4);
    }
    const LifetimeFit f = fit_lifetime_series(t, p, e);
    CHECK(f.tau == doctest::Approx(tau).epsilon(1e-6));
}

TEST_CASE("fit_lifetime censoring") {
    std::vector<double> t, p, e;
    for (int k = 0; k < 30; ++k) {
        t.push_back(double(k));
        p.push_back(1.0 - 1e-4 * k);
        e.push_back(1e-5);
    }
    CHECK(fit_lifetime_series(t, p, e).censored);
}

TEST_CASE("critical density from an exact fit") {
    // tau = c / rho: tau(rho_cr) = 1/w  ->  rho_cr = c w.
    std::vector<double> rho = {1e-9, 2e-9, 4e-9, 8e-9};
    std::vector<double> tau;
    const double c = 3.7e-6;
    for (double r : rho) tau.push_back(c / r);
    const PowerLawFit f = fit_power_law(rho, tau);
    const double w = 2.0 / 216.0;
    const CriticalDensity cd = critical_density_from_fit(f, w);
    CHECK(cd.rho_cr == doctest::Approx(c * w).epsilon(1e-9));
    // T -> 4T halves rho_cr
    CHECK(critical_density_scale_temperature(cd.rho_cr, 40.0, 160.0) ==
          doctest::Approx(0.5 * cd.rho_cr).epsilon(1e-12));

    PowerLawFit bad = f;
    bad.exponent_err = 0.9;
    CHECK_THROWS_AS(critical_density_from_fit(bad, w), std::invalid_argument);
}

TEST_CASE("split-stride evolution matches a monolithic integration") {
    // Tiny plasma + oscillator, back-reaction on; reference integrates the
    // whole coupled system with one adaptive Cash-Karp ODE.
    const RydbergScales sc = rydberg_scales(6, ctx);
    const PlasmaParams params = PlasmaParams::from_si(ctx, 2e19, 40.0);
    const int np = 8;
    Rng rng(4242, 0);
    const PlasmaState init = init_plasma(np, params, ctx, rng);
    const double m = sc.osc_mass, w = sc.omega;
    const double x0 = 40.0, p0 = 0.01;
    const double t_end = 3.0 * sc.period;

    // Split-stride route (the production path).
    double x_split, p_split;
    {
        PlasmaState plasma = init;
        IntegratorConfig cfg;
        cfg.rtol = 1e-9;
        cfg.h_init = 0.01 * sc.period;
        cfg.h_min = 1e-9;
        PlasmaDynamics dyn(std::move(plasma), cfg, 1);
        dyn.h_cap = sc.period / 24.0;
        dyn.dipoles.assign(1, DipoleReaction{{}, 0.0});
        DrivenOscillator osc{m, w, x0, p0};
        double e0, r0;
        plasma_field_z(dyn.state(), {}, e0, r0);
        while (dyn.state().t < t_end - 1e-9) {
            DrivenOscillator mid = osc;
            mid.rotate(0.5 * std::min(dyn.h_cap, t_end - dyn.state().t));
            dyn.dipoles[0].p_z = mid.x;
            const double h = dyn.step_to(t_end);
            double e1, r1;
            plasma_field_z(dyn.state(), {}, e1, r1);
            double c[4];
            DrivenOscillator::hermite_coeffs(e0, r0, e1, r1, h, c);
            osc.advance(h, c);
            e0 = e1;
            r0 = r1;
        }
        x_split = osc.x;
        p_split = osc.p;
    }

    // Monolithic route.
    double x_mono, p_mono;
    {
        PlasmaState plasma = init;
        const std::size_t n = plasma.n();
        std::vector<double> y(6 * n + 2);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = plasma.px[i]; y[n + i] = plasma.py[i]; y[2 * n + i] = plasma.pz[i];
            y[3 * n + i] = plasma.vx[i]; y[4 * n + i] = plasma.vy[i]; y[5 * n + i] = plasma.vz[i];
        }
        y[6 * n] = x0;
        y[6 * n + 1] = p0;
        std::vector<double> ax, ay, az;
        CashKarp integ(y.size(), [&](double, const std::vector<double>& s,
                                     std::vector<double>& d) {
            d.resize(s.size());
            for (std::size_t i = 0; i < n; ++i) {
                plasma.px[i] = s[i];
                plasma.py[i] = s[n + i];
                plasma.pz[i] = s[2 * n + i];
                plasma.vx[i] = s[3 * n + i];
                plasma.vy[i] = s[4 * n + i];
                plasma.vz[i] = s[5 * n + i];
            }
            std::vector<DipoleReaction> dip{{{0, 0, 0}, s[6 * n]}};
            plasma_accels(plasma, {}, dip, ax, ay, az, 1);
            for (std::size_t i = 0; i < n; ++i) {
                d[i] = s[3 * n + i];
                d[n + i] = s[4 * n + i];
                d[2 * n + i] = s[5 * n + i];
                d[3 * n + i] = ax[i];
                d[4 * n + i] = ay[i];
                d[5 * n + i] = az[i];
            }
            double ez, rz;
            plasma_field_z(plasma, {}, ez, rz);
            d[6 * n] = s[6 * n + 1] / m;
            d[6 * n + 1] = -m * w * w * s[6 * n] + ez;
        });
        integ.yscale = plasma_yscale(plasma);
        integ.yscale.push_back(40.0);
        integ.yscale.push_back(40.0 * m * w);
        IntegratorConfig cfg;
        cfg.rtol = 1e-9;
        cfg.h_init = 0.01 * sc.period;
        cfg.h_min = 1e-9;
        double t = 0.0;
        integ.integrate_to(t, y, t_end, cfg);
        x_mono = y[6 * n];
        p_mono = y[6 * n + 1];
    }

    CHECK(x_split == doctest::Approx(x_mono).epsilon(5e-3).scale(x0));
    CHECK(p_split == doctest::Approx(p_mono).epsilon(5e-3).scale(x0 * m * w));
}

TEST_SUITE_END();

TEST_SUITE_BEGIN("slow");

TEST_CASE("lifetime insensitive to plasma back-reaction toggle (A/B)") {
    const RydbergScales sc = rydberg_scales(6, ctx);
    const PlasmaParams params = PlasmaParams::from_si(ctx, 1.07e19, 40.0);
    TwaOptions opt;
    opt.n_plasma = 48;
    opt.prerun_periods = 0.5;
    opt.workers = 2;
    auto run = [&](bool back) {
        TwaOptions o = opt;
        o.back_reaction = back;
        double t_max = 30.0 * sc.period;
        PopulationTrace tr = twa_evolve(sc, params, ctx, t_max, 30, 12000, 99, o);
        const std::size_t lvl = tr.level_index(tr.n_osc);
        const double tail = tr.at(tr.times.size() - 1, lvl);
        if (tail > 0.7) {
            tr = twa_evolve(sc, params, ctx, 6.0 * t_max, 30, 12000, 99, o);
        }
        return fit_lifetime(tr);
    };
    const LifetimeFit on = run(true);
    const LifetimeFit off = run(false);
    REQUIRE_FALSE(on.censored);
    REQUIRE_FALSE(off.censored);
    const double rel = std::abs(on.tau - off.tau) / on.tau;
    const double rel_err = 3.0 * std::hypot(on.tau_err / on.tau, off.tau_err / off.tau);
    CHECK(rel < std::max(0.10, rel_err));
}

TEST_SUITE_END();
