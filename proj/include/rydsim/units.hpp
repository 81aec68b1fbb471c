#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "rydsim/constants.hpp"

namespace rydsim {

/// Cu2O material constants and the excitonic unit system derived from them.
///
/// All simulation code works in scaled units: lengths in the excitonic Bohr
/// radius a_B, energies in the excitonic Rydberg Ry, times in hbar/Ry, with
/// hbar = 1. In these units the mass unit is 2*mu (so the reduced mass is
/// exactly 1/2), charges are +-1 in units of e, and the Coulomb interaction
/// between unit charges is q1*q2 * 2/r. SI conversion happens only at I/O
/// boundaries.
struct MaterialContext {
    double m_e_eff = 0.985;    // electron effective mass, units of m0
    double m_h_eff = 0.575;    // hole effective mass, units of m0
    double epsilon_rel = 7.5;  // relative permittivity

    // Derived (filled by finalize()).
    double mu = 0.0;            // reduced mass, units of m0
    double bohr_radius_si = 0.0;    // a_B in meters
    double rydberg_energy_si = 0.0; // Ry in joules
    double time_unit_si = 0.0;      // hbar/Ry in seconds
    double mass_unit_si = 0.0;      // 2*mu in kg

    // Species masses in scaled (2*mu) units; 1/m_e_s + 1/m_h_s == 2.
    double m_e_scaled = 0.0;
    double m_h_scaled = 0.0;

    MaterialContext() { finalize(); }
    MaterialContext(double me, double mh, double eps)
        : m_e_eff(me), m_h_eff(mh), epsilon_rel(eps) {
        finalize();
    }

    void finalize() {
        if (m_e_eff <= 0.0 || m_h_eff <= 0.0)
            throw std::invalid_argument("MaterialContext: masses must be positive");
        if (epsilon_rel <= 0.0)
            throw std::invalid_argument("MaterialContext: permittivity must be positive");
        mu = m_e_eff * m_h_eff / (m_e_eff + m_h_eff);
        const double mu_kg = mu * si::electron_mass;
        const double eps = epsilon_rel * si::vacuum_permittivity;
        const double e2 = si::electron_charge * si::electron_charge;
        const double four_pi_eps = 4.0 * std::numbers::pi * eps;
        bohr_radius_si = four_pi_eps * si::hbar * si::hbar / (mu_kg * e2);
        rydberg_energy_si = e2 / (four_pi_eps * 2.0 * bohr_radius_si);
        time_unit_si = si::hbar / rydberg_energy_si;
        mass_unit_si = 2.0 * mu_kg;
        m_e_scaled = m_e_eff / (2.0 * mu);
        m_h_scaled = m_h_eff / (2.0 * mu);
    }

    // SI -> scaled
    double length_from_si(double m) const { return m / bohr_radius_si; }
    double time_from_si(double s) const { return s / time_unit_si; }
    double energy_from_si(double j) const { return j / rydberg_energy_si; }
    double density_from_si(double per_m3) const {
        return per_m3 * bohr_radius_si * bohr_radius_si * bohr_radius_si;
    }
    double omega_from_si(double rad_per_s) const { return rad_per_s * time_unit_si; }
    /// k_B T for T in kelvin, as a scaled energy.
    double thermal_energy(double kelvin) const {
        return si::boltzmann * kelvin / rydberg_energy_si;
    }

    // scaled -> SI
    double length_to_si(double l) const { return l * bohr_radius_si; }
    double time_to_si(double t) const { return t * time_unit_si; }
    double energy_to_si(double e) const { return e * rydberg_energy_si; }
    double density_to_si(double rho) const {
        return rho / (bohr_radius_si * bohr_radius_si * bohr_radius_si);
    }
    double omega_to_si(double w) const { return w / time_unit_si; }
    double velocity_to_si(double v) const { return v * bohr_radius_si / time_unit_si; }
    double temperature_to_kelvin(double kT) const {
        return kT * rydberg_energy_si / si::boltzmann;
    }
};

}  // namespace rydsim
