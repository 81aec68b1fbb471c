#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "rydsim/units.hpp"

namespace rydsim {

/// mu = m_e m_h / (m_e + m_h). Units follow the inputs.
double reduced_mass(double m_e, double m_h);

/// Plasma parameters in scaled units. rho is the two-species total density
/// (rho_e = rho_h = rho/2). Exactly one of {temperature, Gamma} is supplied;
/// the other is derived. Per-species temperatures are allowed, in which case
/// Gamma is defined through the mean temperature.
struct PlasmaParams {
    double rho = 0.0;   // a_B^-3, both species
    double kT_e = 0.0;  // scaled energy
    double kT_h = 0.0;
    double gamma = 0.0;     // Coulomb coupling constant
    double omega_p = 0.0;   // scaled rad/time
    double debye_length = 0.0;  // a_B
    double wigner_seitz = 0.0;  // a_B
    bool gamma_flagged = false; // Gamma > 0.2

    double kT_mean() const { return 0.5 * (kT_e + kT_h); }
    double tau_p() const { return 2.0 * std::numbers::pi / omega_p; }

    static PlasmaParams from_temperature(double rho, double kT);
    static PlasmaParams from_temperatures(double rho, double kT_e, double kT_h);
    static PlasmaParams from_gamma(double rho, double gamma);

    /// Convenience: SI density (m^-3) and kelvin.
    static PlasmaParams from_si(const MaterialContext& ctx, double rho_si, double kelvin);
    static PlasmaParams from_si_gamma(const MaterialContext& ctx, double rho_si, double gamma);

  private:
    void fill_derived();
};

/// omega_p = sqrt(rho e^2 / (2 mu eps)); scaled form sqrt(8 pi rho).
double plasma_frequency(double rho);
/// lambda = sqrt(eps k_B T / (rho e^2)); scaled form sqrt(kT / (8 pi rho)).
double debye_length(double rho, double kT);
/// Gamma = (e^2 / 4 pi eps a_ws) / k_B T with a_ws = (3/(4 pi rho))^(1/3).
double coupling_constant(double rho, double kT);
/// Inverse of coupling_constant at fixed rho.
double temperature_for_gamma(double rho, double gamma);
double wigner_seitz_radius(double rho);

/// Closed-form scales of the hydrogenic level n, scaled units.
struct RydbergScales {
    int n = 0;
    double energy = 0.0;      // E_n = -1/n^2
    double semi_major = 0.0;  // a_n = n^2
    double omega = 0.0;       // omega_Ryd = 2/n^3
    double period = 0.0;      // t_Ryd = pi n^3
    double r_exp = 0.0;       // <r>_n = (3/2) n^2
    int n_osc = 0;            // mapped oscillator level
    double osc_mass = 0.0;    // oscillator mass used by the mapping (scaled)
};

/// Oscillator level matching the exciton dipole moment:
/// sqrt(n_osc + 1/2) * sqrt(hbar/(m omega_Ryd)) = <r>_n.
/// The mapping uses the electron effective mass by default (as printed in the
/// source relation); pass use_electron_mass=false to use the reduced mass
/// instead. Rounded to the nearest integer, floored at 0.
RydbergScales rydberg_scales(int n, const MaterialContext& ctx,
                             bool use_electron_mass = true);

}  // namespace rydsim
