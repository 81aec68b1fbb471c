#include <cmath>

#include "doctest.h"
#include "rydsim/plasma.hpp"

using namespace rydsim;

namespace {
const MaterialContext ctx;
PlasmaParams params01() { return PlasmaParams::from_si_gamma(ctx, 0.5e17, 0.1); }
}  // namespace

TEST_SUITE_BEGIN("unit");

TEST_CASE("init_plasma geometry and charge balance") {
    Rng rng(11, 0);
    const auto p = params01();
    const PlasmaState s = init_plasma(4096, p, ctx, rng);
    CHECK(ctx.length_to_si(s.trap_radius) == doctest::Approx(26.94e-6).epsilon(2e-3));
    CHECK(s.a_s == doctest::Approx(0.02 * p.wigner_seitz).epsilon(1e-12));
    double q = 0.0;
    for (double qi : s.q) q += qi;
    CHECK(q == doctest::Approx(0.0));

    Rng rng2(11, 1);
    const PlasmaState s2 = init_plasma(2, p, ctx, rng2);
    CHECK(norm(Vec3{s2.px[0], s2.py[0], s2.pz[0]}) <= s2.trap_radius);
    CHECK(norm(Vec3{s2.px[1], s2.py[1], s2.pz[1]}) <= s2.trap_radius);
    CHECK(s2.q[0] + s2.q[1] == doctest::Approx(0.0));

    CHECK_THROWS_AS(init_plasma(5, p, ctx, rng), std::invalid_argument);

    // species override for non-neutral runs
    PlasmaInitOptions opt;
    opt.n_electrons = 7;
    opt.n_holes = 0;
    const PlasmaState se = init_plasma(7, p, ctx, rng, opt);
    for (double qi : se.q) CHECK(qi == -1.0);
}

TEST_CASE("init_plasma velocities are Maxwell-Boltzmann") {
    Rng rng(13, 0);
    const auto p = params01();
    const PlasmaState s = init_plasma(10000, p, ctx, rng);
    double ke = 0.0;
    for (std::size_t i = 0; i < s.n(); ++i)
        ke += 0.5 * s.mass[i] * (s.vx[i] * s.vx[i] + s.vy[i] * s.vy[i] + s.vz[i] * s.vz[i]);
    ke /= double(s.n());
    const double expect = 1.5 * p.kT_mean();
    // variance of KE per dof: kT^2/2 -> stderr of the mean KE
    const double se = expect * std::sqrt(2.0 / (3.0 * double(s.n())));
    CHECK(std::abs(ke - expect) < 3.0 * se);
}

TEST_CASE("pair_force soft core") {
    CHECK(norm(pair_force({0, 0, 0}, 1.0, -1.0, 0.5)) == doctest::Approx(0.0));
    // |r| = 100 a_s matches bare Coulomb within 0.02%
    const double a_s = 0.3;
    const Vec3 f = pair_force({100.0 * a_s, 0, 0}, 1.0, 1.0, a_s);
    const double bare = 2.0 / (100.0 * a_s * 100.0 * a_s);
    CHECK(norm(f) == doctest::Approx(bare).epsilon(2e-4));
    CHECK(norm(f) < bare);
    // opposite charges attract: force on 1 points toward 2
    const Vec3 fa = pair_force({1.0, 0, 0}, 1.0, -1.0, 0.1);
    CHECK(fa.x < 0.0);
}

TEST_CASE("trap force and potential") {
    Rng rng(17, 0);
    const auto p = params01();
    PlasmaState s = init_plasma(2, p, ctx, rng);
    CHECK(trap_accel(0.0, s) == doctest::Approx(0.0));
    CHECK(trap_accel(s.trap_radius, s) == doctest::Approx(s.trap_kT / s.trap_radius).epsilon(1e-12));
    // V(R) = kT/zeta via the energy bookkeeping of a single resting particle
    PlasmaState one = s;
    one.px.resize(1); one.py.resize(1); one.pz.resize(1);
    one.vx.resize(1); one.vy.resize(1); one.vz.resize(1);
    one.q.resize(1); one.mass.resize(1); one.inv_mass.resize(1);
    one.px[0] = s.trap_radius; one.py[0] = 0.0; one.pz[0] = 0.0;
    one.vx[0] = one.vy[0] = one.vz[0] = 0.0;
    CHECK(plasma_energy(one) == doctest::Approx(s.trap_kT / 6.0).epsilon(1e-12));
}

TEST_CASE("internal forces sum to zero (Newton's third law)") {
    Rng rng(19, 0);
    const auto p = params01();
    PlasmaState s = init_plasma(128, p, ctx, rng);
    s.trap_kT = 0.0;  // isolate the pair sum
    std::vector<double> ax, ay, az;
    plasma_accels(s, {}, {}, ax, ay, az);
    Vec3 f_total{};
    double f_max = 0.0;
    for (std::size_t i = 0; i < s.n(); ++i) {
        const Vec3 fi = Vec3{ax[i], ay[i], az[i]} * s.mass[i];
        f_total += fi;
        f_max = std::max(f_max, norm(fi));
    }
    CHECK(norm(f_total) <= 1e-12 * f_max * double(s.n()));
}

TEST_CASE("threaded force kernel matches serial exactly") {
    Rng rng(23, 0);
    const auto p = params01();
    PlasmaState s = init_plasma(1024, p, ctx, rng);
    std::vector<double> ax1, ay1, az1, ax2, ay2, az2;
    plasma_accels(s, {}, {}, ax1, ay1, az1, 1);
    plasma_accels(s, {}, {}, ax2, ay2, az2, 2);
    for (std::size_t i = 0; i < s.n(); ++i) {
        CHECK(ax1[i] == ax2[i]);
        CHECK(ay1[i] == ay2[i]);
        CHECK(az1[i] == az2[i]);
    }
}

TEST_CASE("field_at single charge reduces to Coulomb far from the core") {
    PlasmaState empty;
    empty.a_s = 0.01;
    const std::vector<SourceCharge> src{{{0, 0, 0}, 2.0}};
    const auto e = field_at({{5.0, 0.0, 0.0}}, empty, src);
    CHECK(e[0].x == doctest::Approx(2.0 * 2.0 / 25.0).epsilon(1e-4));
    CHECK(e[0].y == doctest::Approx(0.0));
}

TEST_CASE("dipole reaction force matches the analytic gradient") {
    // Single probe particle; compare plasma_accels' dipole term against a
    // numerical gradient of V = p_z * 2 q (z - z0) / D^{3/2}.
    PlasmaState s;
    s.px = {1.3}; s.py = {-0.4}; s.pz = {0.7};
    s.vx = {0}; s.vy = {0}; s.vz = {0};
    s.q = {1.0};
    s.mass = {2.0};
    s.inv_mass = {0.5};
    s.a_s = 0.2;
    s.trap_kT = 0.0;
    s.trap_radius = 1.0;
    s.params = PlasmaParams::from_gamma(1e-6, 0.1);
    const DipoleReaction dip{{0.1, 0.2, -0.3}, 0.37};
    std::vector<double> ax, ay, az;
    plasma_accels(s, {}, {dip}, ax, ay, az);

    auto coupling = [&](double x, double y, double z) {
        const double dx = x - dip.pos.x, dy = y - dip.pos.y, dz = z - dip.pos.z;
        const double d2 = dx * dx + dy * dy + dz * dz + s.a_s * s.a_s;
        return dip.p_z * 2.0 * s.q[0] * dz / (d2 * std::sqrt(d2));
    };
    const double h = 1e-6;
    const double fx = -(coupling(s.px[0] + h, s.py[0], s.pz[0]) -
                        coupling(s.px[0] - h, s.py[0], s.pz[0])) / (2.0 * h);
    const double fy = -(coupling(s.px[0], s.py[0] + h, s.pz[0]) -
                        coupling(s.px[0], s.py[0] - h, s.pz[0])) / (2.0 * h);
    const double fz = -(coupling(s.px[0], s.py[0], s.pz[0] + h) -
                        coupling(s.px[0], s.py[0], s.pz[0] - h)) / (2.0 * h);
    CHECK(ax[0] * s.mass[0] == doctest::Approx(fx).epsilon(1e-6));
    CHECK(ay[0] * s.mass[0] == doctest::Approx(fy).epsilon(1e-6));
    CHECK(az[0] * s.mass[0] == doctest::Approx(fz).epsilon(1e-6));
}

TEST_CASE("dynamics are deterministic for identical (config, seed)") {
    const auto p = params01();
    auto run = [&](std::uint64_t seed) {
        Rng rng(seed, 0);
        PlasmaState s = init_plasma(64, p, ctx, rng);
        IntegratorConfig cfg;
        cfg.rtol = 1e-6;
        cfg.h_init = 0.01 * p.tau_p();
        cfg.h_min = 1.0;
        PlasmaDynamics dyn(std::move(s), cfg, 1);
        dyn.advance_to(0.2 * p.tau_p());
        return dyn.state();
    };
    const PlasmaState a = run(5), b = run(5), c = run(6);
    bool identical = true, differs = false;
    for (std::size_t i = 0; i < a.n(); ++i) {
        identical = identical && a.px[i] == b.px[i] && a.vz[i] == b.vz[i];
        differs = differs || a.px[i] != c.px[i];
    }
    CHECK(identical);
    CHECK(differs);
}

TEST_SUITE_END();

TEST_SUITE_BEGIN("slow");

TEST_CASE("equilibration preserves local temperature and density") {
    Rng rng(29, 0);
    const auto p = params01();
    PlasmaState s = init_plasma(2048, p, ctx, rng);
    IntegratorConfig cfg;
    cfg.rtol = 1e-6;
    cfg.h_init = 0.01 * p.tau_p();
    cfg.h_min = 1e-10 * p.tau_p();
    const Vec3 p_init = plasma_momentum(s);
    const EquilibrationDiagnostics d = equilibrate(s, 10.0 * p.tau_p(), cfg, 2);
    CHECK(d.kT_half == doctest::Approx(p.kT_mean()).epsilon(0.10));
    CHECK(d.density_half == doctest::Approx(p.rho).epsilon(0.10));
    // momentum: no external net force beyond the (radial) trap
    double mk = 0.0;
    for (std::size_t i = 0; i < s.n(); ++i) mk += s.mass[i] * p.kT_mean();
    const double sigma_p = std::sqrt(mk);
    CHECK(norm(plasma_momentum(s)) < norm(p_init) + 3.0 * sigma_p);
}

TEST_SUITE_END();
