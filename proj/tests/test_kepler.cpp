#include <cmath>
#include <numbers>

#include "doctest.h"
#include "rydsim/kepler.hpp"

using namespace rydsim;

namespace {
const MaterialContext ctx;

double pair_angular_momentum(const OrbitPair& o) {
    // z-component of the relative angular momentum, mu = 1/2.
    const Vec3 r = o.r_h - o.r_e;
    const Vec3 v = o.v_h - o.v_e;
    return 0.5 * cross(r, v).z;
}
}  // namespace

TEST_SUITE_BEGIN("unit");

TEST_CASE("init_kepler eccentricities") {
    CHECK(init_kepler(20, 0, ctx).eccentricity == doctest::Approx(1.0).epsilon(1e-8));
    for (int l : {0, 1, 2}) {
        const double xi = init_kepler(20, l, ctx).eccentricity;
        CHECK(xi >= 0.9);
        CHECK(xi <= 1.0);
    }
    // closed form: xi^2 = 1 - l(l+1)/n^2
    CHECK(init_kepler(20, 2, ctx).eccentricity ==
          doctest::Approx(std::sqrt(1.0 - 6.0 / 400.0)).epsilon(1e-12));
    // high-l: near circular
    CHECK(init_kepler(20, 19, ctx).eccentricity < 0.32);
    CHECK_THROWS_AS(init_kepler(5, 5, ctx), std::invalid_argument);
    CHECK_THROWS_AS(init_kepler(5, -1, ctx), std::invalid_argument);
}

TEST_CASE("constructed pair energy equals E_n and COM is at the origin") {
    for (int n : {2, 6, 20}) {
        const OrbitPair o = init_kepler(n, std::min(2, n - 1), ctx);
        CHECK(pair_energy(o.r_e, o.v_e, o.r_h, o.v_h, ctx) ==
              doctest::Approx(-1.0 / double(n) / double(n)).epsilon(1e-10));
        const Vec3 com = o.r_e * ctx.m_e_scaled + o.r_h * ctx.m_h_scaled;
        CHECK(norm(com) < 1e-12 * o.semi_major);
    }
}

TEST_CASE("pair energy special geometries") {
    // at rest at separation 2 a_n the potential alone gives E_n
    const double a = 400.0;
    CHECK(pair_energy({0, 0, 0}, {0, 0, 0}, {2.0 * a, 0, 0}, {0, 0, 0}, ctx) ==
          doctest::Approx(-1.0 / 400.0).epsilon(1e-12));
    CHECK(pair_energy({0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {0, 0, 0}, ctx) ==
          -std::numeric_limits<double>::infinity());
}

TEST_CASE("isolated orbit conserves energy, angular momentum, period") {
    const OrbitPair o = init_kepler(8, 2, ctx);
    const double e0 = pair_energy(o.r_e, o.v_e, o.r_h, o.v_h, ctx);
    const double l0 = pair_angular_momentum(o);

    // one full period returns to the start (Kepler's third law)
    const OrbitPair o1 = propagate_isolated(o, ctx, 1.0, 1e-10);
    CHECK(norm(o1.r_e - o.r_e) < 1e-5 * o.semi_major);
    CHECK(norm(o1.r_h - o.r_h) < 1e-5 * o.semi_major);

    const OrbitPair o50 = propagate_isolated(o, ctx, 50.0, 1e-9);
    const double e50 = pair_energy(o50.r_e, o50.v_e, o50.r_h, o50.v_h, ctx);
    CHECK(std::abs(e50 - e0) / std::abs(e0) < 1e-6);
    CHECK(std::abs(pair_angular_momentum(o50) - l0) / std::abs(l0) < 1e-6);
    const Vec3 com = o50.r_e * ctx.m_e_scaled + o50.r_h * ctx.m_h_scaled;
    CHECK(norm(com) < 1e-6 * o.semi_major);

    // evolved pair energy stays E_n over 20 periods
    const OrbitPair o20 = propagate_isolated(o, ctx, 20.0, 1e-9);
    CHECK(pair_energy(o20.r_e, o20.v_e, o20.r_h, o20.v_h, ctx) ==
          doctest::Approx(-1.0 / 64.0).epsilon(1e-7));
}

TEST_CASE("precession") {
    OrbitPair o = init_kepler(12, 3, ctx);
    CHECK_THROWS_AS(precess(o, -1.0), std::invalid_argument);
    o = precess(o, 0.2 * o.omega);
    CHECK(o.omega_prec == doctest::Approx(0.2 * o.omega));

    // without precession the source is periodic
    OrbitPair fixed = precess(o, 0.0);
    const double period = 2.0 * std::numbers::pi / o.omega;
    const Vec3 r0 = prescribed_relative_position(
        std::get<PrescribedOrbit>(prescribed_orbit_source(fixed)), 0.123 * period);
    const Vec3 r1 = prescribed_relative_position(
        std::get<PrescribedOrbit>(prescribed_orbit_source(fixed)), 1.123 * period);
    CHECK(norm(r1 - r0) < 1e-9 * o.semi_major);

    // apsidal line returns after 2 pi / omega_prec: pick omega_prec = omega/5
    // so that the precession period is an integer number of orbits.
    OrbitPair prec = precess(o, o.omega / 5.0);
    const auto src = std::get<PrescribedOrbit>(prescribed_orbit_source(prec));
    const Vec3 a0 = prescribed_relative_position(src, 0.0);
    const Vec3 a1 = prescribed_relative_position(src, 5.0 * period);
    CHECK(norm(a1 - a0) < 1e-8 * o.semi_major);
}

TEST_CASE("prescribed orbit source geometry") {
    OrbitPair o = init_kepler(10, 1, ctx);
    o = precess(o, 0.2 * o.omega);
    const ExternalSource src = prescribed_orbit_source(o);
    std::vector<SourceCharge> ch;
    const double period = 2.0 * std::numbers::pi / o.omega;
    double sep_min = 1e9, sep_max = 0.0;
    for (int k = 0; k < 400; ++k) {
        source_charges_at(src, period * k / 399.0, ch);
        REQUIRE(ch.size() == 2);
        CHECK(ch[0].q == -1.0);
        CHECK(ch[1].q == 1.0);
        // radii ratio fixed by the COM constraint
        CHECK(norm(ch[0].pos) / norm(ch[1].pos) ==
              doctest::Approx(ctx.m_h_eff / ctx.m_e_eff).epsilon(1e-9));
        const double sep = norm(ch[0].pos - ch[1].pos);
        sep_min = std::min(sep_min, sep);
        sep_max = std::max(sep_max, sep);
    }
    CHECK(sep_min == doctest::Approx(o.semi_major * (1.0 - o.eccentricity)).epsilon(1e-3));
    CHECK(sep_max == doctest::Approx(o.semi_major * (1.0 + o.eccentricity)).epsilon(1e-3));

    OrbitPair dyn = o;
    dyn.prescribed = false;
    CHECK_THROWS_AS(prescribed_orbit_source(dyn), std::invalid_argument);
}

TEST_CASE("zero plasma density: no decays within the cap (censored)") {
    ClassicalMcOptions opt;
    opt.n_plasma = 0;
    opt.time_cap_rydberg = 50.0;
    opt.rtol = 1e-8;
    const PlasmaParams p = PlasmaParams::from_gamma(1e-10, 0.1);
    const SurvivalRecord rec = classical_lifetime_mc(4, 1, p, ctx, 8, 3, opt);
    CHECK(rec.all_censored);
    CHECK(rec.n_censored == 8);
    CHECK(rec.survival.front() == doctest::Approx(1.0));
    CHECK(rec.survival.back() == doctest::Approx(1.0));
    CHECK_THROWS_AS(classical_lifetime_mc(1, 0, p, ctx, 1, 1, opt), std::invalid_argument);
}

TEST_SUITE_END();

TEST_SUITE_BEGIN("slow");

TEST_CASE("survival curves from disjoint seed ranges agree within binomial error") {
    const PlasmaParams p = PlasmaParams::from_si(ctx, 2e19, 40.0);
    ClassicalMcOptions opt;
    opt.n_plasma = 48;
    opt.prerun_periods = 0.5;
    opt.time_cap_rydberg = 60.0;
    opt.workers = 2;
    const long n = 300;
    const SurvivalRecord a = classical_lifetime_mc(6, 1, p, ctx, n, 1000, opt);
    const SurvivalRecord b = classical_lifetime_mc(6, 1, p, ctx, n, 2000, opt);
    int outliers = 0, checked = 0;
    for (std::size_t k = 4; k < a.survival.size(); k += 8) {
        const double sa = a.survival[k], sb = b.survival[k];
        const double sig = std::sqrt(std::max(sa * (1 - sa), 1e-4) / n +
                                     std::max(sb * (1 - sb), 1e-4) / n);
        ++checked;
        if (std::abs(sa - sb) > 3.0 * sig) ++outliers;
    }
    CHECK(checked >= 5);
    CHECK(outliers <= 1);
}

TEST_SUITE_END();
