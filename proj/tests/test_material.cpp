#include <cmath>

#include "doctest.h"
#include "rydsim/material.hpp"
#include "rydsim/rng.hpp"

using namespace rydsim;

TEST_SUITE_BEGIN("unit");

TEST_CASE("reduced mass") {
    CHECK(reduced_mass(0.985, 0.575) == doctest::Approx(0.3631).epsilon(5e-4));
    CHECK(reduced_mass(1.7, 1.7) == doctest::Approx(0.85).epsilon(1e-12));
    CHECK(reduced_mass(0.5, 0.5) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK_THROWS_AS(reduced_mass(-1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(reduced_mass(0.5, 0.0), std::invalid_argument);
}

TEST_CASE("material context derived scales") {
    const MaterialContext ctx;
    CHECK(ctx.mu == doctest::Approx(0.3630609).epsilon(1e-6));
    CHECK(ctx.bohr_radius_si == doctest::Approx(1.0932e-9).epsilon(5e-4));
    // E_1 = -Ry = -87.8 meV
    const double ry_mev = ctx.rydberg_energy_si / si::electron_charge * 1e3;
    CHECK(ry_mev == doctest::Approx(87.8).epsilon(2e-3));
    // scaled-species masses: harmonic sum is exactly 2 (mu_scaled = 1/2)
    CHECK(1.0 / ctx.m_e_scaled + 1.0 / ctx.m_h_scaled == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("unit conversions round-trip") {
    const MaterialContext ctx;
    Rng rng(42, 0);
    for (int i = 0; i < 100; ++i) {
        const double v = std::exp(rng.uniform(-40.0, 40.0));
        CHECK(ctx.length_to_si(ctx.length_from_si(v)) == doctest::Approx(v).epsilon(1e-12));
        CHECK(ctx.energy_to_si(ctx.energy_from_si(v)) == doctest::Approx(v).epsilon(1e-12));
        CHECK(ctx.density_to_si(ctx.density_from_si(v)) == doctest::Approx(v).epsilon(1e-12));
        CHECK(ctx.omega_to_si(ctx.omega_from_si(v)) == doctest::Approx(v).epsilon(1e-12));
    }
}

TEST_CASE("plasma frequency") {
    const MaterialContext ctx;
    const double rho = ctx.density_from_si(0.5e17);
    CHECK(ctx.omega_to_si(plasma_frequency(rho)) == doctest::Approx(5.4056e9).epsilon(1e-3));
    // sqrt scaling: rho -> 4 rho doubles omega_p
    CHECK(plasma_frequency(4.0 * rho) == doctest::Approx(2.0 * plasma_frequency(rho)).epsilon(1e-14));
    // omega_Ryd(20)/omega_p(6.25e16 m^-3) ~ 5.5
    const double ratio = rydberg_scales(20, ctx).omega /
                         plasma_frequency(ctx.density_from_si(6.25e16));
    CHECK(ratio == doctest::Approx(5.52).epsilon(2e-2));
    CHECK_THROWS_AS(plasma_frequency(0.0), std::invalid_argument);
}

TEST_CASE("debye length and coupling constant") {
    const MaterialContext ctx;
    const PlasmaParams p = PlasmaParams::from_si_gamma(ctx, 0.5e17, 0.1);
    CHECK(ctx.temperature_to_kelvin(p.kT_mean()) == doctest::Approx(13.23).epsilon(1e-2));
    CHECK(ctx.length_to_si(p.debye_length) == doctest::Approx(3.074e-6).epsilon(2e-3));

    // lambda sqrt(3 Gamma) / a_ws = 1 for any (rho, T)
    Rng rng(7, 0);
    for (int i = 0; i < 50; ++i) {
        const double rho = std::exp(rng.uniform(-30.0, -5.0));
        const double kT = std::exp(rng.uniform(-8.0, 0.0));
        const double lam = debye_length(rho, kT);
        const double gam = coupling_constant(rho, kT);
        CHECK(lam * std::sqrt(3.0 * gam) / wigner_seitz_radius(rho) ==
              doctest::Approx(1.0).epsilon(1e-12));
        // quadrupling rho at fixed T halves lambda
        CHECK(debye_length(4.0 * rho, kT) == doctest::Approx(0.5 * lam).epsilon(1e-12));
        // T -> 2T halves Gamma
        CHECK(coupling_constant(rho, 2.0 * kT) == doctest::Approx(0.5 * gam).epsilon(1e-12));
        // round trip through temperature_for_gamma
        CHECK(temperature_for_gamma(rho, gam) == doctest::Approx(kT).epsilon(1e-12));
    }

    // Gamma flagging threshold
    CHECK_FALSE(PlasmaParams::from_gamma(1e-10, 0.2).gamma_flagged);
    CHECK(PlasmaParams::from_gamma(1e-10, 0.25).gamma_flagged);
}

TEST_CASE("rydberg scales") {
    const MaterialContext ctx;
    const RydbergScales s20 = rydberg_scales(20, ctx);
    CHECK(ctx.omega_to_si(s20.omega) == doctest::Approx(3.3355e10).epsilon(1e-3));
    CHECK(s20.energy == doctest::Approx(-1.0 / 400.0).epsilon(1e-14));
    CHECK(s20.semi_major == doctest::Approx(400.0).epsilon(1e-14));
    CHECK(s20.r_exp == doctest::Approx(600.0).epsilon(1e-14));

    // omega * n^3 is n-independent to machine precision
    for (int n = 1; n <= 40; ++n)
        CHECK(rydberg_scales(n, ctx).omega * n * n * n == doctest::Approx(2.0).epsilon(1e-14));

    // oscillator mapping: n = 8 -> 48 (electron mass as printed)
    CHECK(rydberg_scales(8, ctx).n_osc == 48);
    CHECK(rydberg_scales(6, ctx).n_osc == 36);
    CHECK(rydberg_scales(4, ctx).n_osc == 24);
    // reduced-mass switch lowers the mapped level
    CHECK(rydberg_scales(8, ctx, false).n_osc == 18);

    CHECK_THROWS_AS(rydberg_scales(0, ctx), std::invalid_argument);
}

TEST_CASE("per-species temperatures") {
    const MaterialContext ctx;
    const PlasmaParams p = PlasmaParams::from_temperatures(1e-10, 2e-3, 1e-3);
    CHECK(p.kT_mean() == doctest::Approx(1.5e-3).epsilon(1e-12));
    CHECK(p.kT_e == doctest::Approx(2e-3));
    CHECK(p.kT_h == doctest::Approx(1e-3));
}

TEST_SUITE_END();
