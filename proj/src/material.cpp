#include "rydsim/material.hpp"

namespace rydsim {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kGammaWarnThreshold = 0.2;
}  // namespace

double reduced_mass(double m_e, double m_h) {
    if (m_e <= 0.0 || m_h <= 0.0)
        throw std::invalid_argument("reduced_mass: masses must be positive");
    return m_e * m_h / (m_e + m_h);
}

double plasma_frequency(double rho) {
    if (rho <= 0.0) throw std::invalid_argument("plasma_frequency: rho must be positive");
    return std::sqrt(8.0 * kPi * rho);
}

double wigner_seitz_radius(double rho) {
    if (rho <= 0.0) throw std::invalid_argument("wigner_seitz_radius: rho must be positive");
    return std::cbrt(3.0 / (4.0 * kPi * rho));
}

double debye_length(double rho, double kT) {
    if (rho <= 0.0 || kT <= 0.0)
        throw std::invalid_argument("debye_length: rho and T must be positive");
    return std::sqrt(kT / (8.0 * kPi * rho));
}

double coupling_constant(double rho, double kT) {
    if (rho <= 0.0 || kT <= 0.0)
        throw std::invalid_argument("coupling_constant: rho and T must be positive");
    return 2.0 / (wigner_seitz_radius(rho) * kT);
}

double temperature_for_gamma(double rho, double gamma) {
    if (rho <= 0.0 || gamma <= 0.0)
        throw std::invalid_argument("temperature_for_gamma: rho and Gamma must be positive");
    return 2.0 / (wigner_seitz_radius(rho) * gamma);
}

void PlasmaParams::fill_derived() {
    omega_p = plasma_frequency(rho);
    wigner_seitz = wigner_seitz_radius(rho);
    debye_length = rydsim::debye_length(rho, kT_mean());
    gamma = coupling_constant(rho, kT_mean());
    gamma_flagged = gamma > kGammaWarnThreshold * (1.0 + 1e-12);
}

PlasmaParams PlasmaParams::from_temperature(double rho, double kT) {
    return from_temperatures(rho, kT, kT);
}

PlasmaParams PlasmaParams::from_temperatures(double rho, double kT_e, double kT_h) {
    if (rho <= 0.0 || kT_e <= 0.0 || kT_h <= 0.0)
        throw std::invalid_argument("PlasmaParams: rho and temperatures must be positive");
    PlasmaParams p;
    p.rho = rho;
    p.kT_e = kT_e;
    p.kT_h = kT_h;
    p.fill_derived();
    return p;
}

PlasmaParams PlasmaParams::from_gamma(double rho, double gamma) {
    const double kT = temperature_for_gamma(rho, gamma);
    return from_temperatures(rho, kT, kT);
}

PlasmaParams PlasmaParams::from_si(const MaterialContext& ctx, double rho_si, double kelvin) {
    return from_temperature(ctx.density_from_si(rho_si), ctx.thermal_energy(kelvin));
}

PlasmaParams PlasmaParams::from_si_gamma(const MaterialContext& ctx, double rho_si, double gamma) {
    return from_gamma(ctx.density_from_si(rho_si), gamma);
}

RydbergScales rydberg_scales(int n, const MaterialContext& ctx, bool use_electron_mass) {
    if (n < 1) throw std::invalid_argument("rydberg_scales: n must be >= 1");
    RydbergScales s;
    s.n = n;
    const double n2 = double(n) * n;
    const double n3 = n2 * n;
    s.energy = -1.0 / n2;
    s.semi_major = n2;
    s.omega = 2.0 / n3;
    s.period = kPi * n3;
    s.r_exp = 1.5 * n2;
    s.osc_mass = use_electron_mass ? ctx.m_e_scaled : 0.5;
    // n_osc + 1/2 = <r>^2 m omega (hbar = 1)
    const double x = s.r_exp * s.r_exp * s.osc_mass * s.omega - 0.5;
    s.n_osc = x < 0.0 ? 0 : int(std::lround(x));
    return s;
}

}  // namespace rydsim
