#pragma once

#include <cstdint>
#include <vector>

#include "rydsim/fitting.hpp"
#include "rydsim/material.hpp"
#include "rydsim/plasma.hpp"
#include "rydsim/wigner.hpp"

namespace rydsim {

/// Exact propagator for a driven oscillator x'' = -w^2 x + D(t)/m where the
/// drive is a cubic polynomial on each step (Hermite interpolation of the
/// plasma field between integrator steps). The homogeneous part is rotated
/// analytically, the particular integral is closed-form, so the oscillator
/// contributes no discretization error of its own.
struct DrivenOscillator {
    double mass = 1.0;
    double omega = 1.0;
    double x = 0.0;
    double p = 0.0;

    void advance(double h, const double c[4]);
    /// Hermite cubic coefficients from endpoint drive values/rates.
    static void hermite_coeffs(double d0, double r0, double d1, double r1, double h,
                               double c[4]);
    double energy() const { return p * p / (2.0 * mass) + 0.5 * mass * omega * omega * x * x; }
    /// Free evolution by h (no drive).
    void rotate(double h);
};

/// E_z and its time derivative at a point, from the plasma particles.
void plasma_field_z(const PlasmaState& s, const Vec3& at, double& e_z, double& dez_dt);

struct TwaOptions {
    int n_plasma = 64;            // 0 = vacuum run
    double prerun_periods = 1.0;  // plasma periods of equilibration per trajectory
    double rtol = 1e-6;
    bool back_reaction = true;
    int band_halfwidth = 5;
    double h_cap_fraction = 0.25;  // plasma step cap, fraction of 2 pi / omega_osc
    unsigned workers = 1;
    long chunk = 256;
    double drop_flag_fraction = 0.01;
    bool use_electron_mass = true;  // oscillator-mapping mass switch
};

struct PopulationTrace {
    std::vector<double> times;
    std::vector<int> levels;
    std::vector<double> pop;      // row-major [time][level]
    std::vector<double> pop_err;
    int n_osc = 0;
    double z_norm = 1.0;
    long n_traj = 0;
    long n_dropped = 0;
    bool drop_flagged = false;
    double band_sum_max = 0.0;

    double at(std::size_t k, std::size_t lvl) const { return pop[k * levels.size() + lvl]; }
    double err_at(std::size_t k, std::size_t lvl) const {
        return pop_err[k * levels.size() + lvl];
    }
    std::size_t level_index(int level) const;
};

/// Signed-trajectory TWA evolution of the mapped oscillator inside fresh
/// plasma realizations; populations reconstructed from the weighted Weyl
/// symbols of |m><m| over the tracked band.
PopulationTrace twa_evolve(const RydbergScales& scales, const PlasmaParams& params,
                           const MaterialContext& ctx, double t_max, int n_out, long n_traj,
                           std::uint64_t seed, const TwaOptions& opt = {});

struct LifetimeFit {
    double tau = 0.0;
    double tau_err = 0.0;
    bool censored = false;  // population never left [0.98, 1]
    std::size_t n_points = 0;
    double window_lo = 0.6, window_hi = 0.98;
};

/// Exponential fit of the initial-level population over the early-time
/// window rho in [0.6, 0.98].
LifetimeFit fit_lifetime(const PopulationTrace& trace);
LifetimeFit fit_lifetime_series(const std::vector<double>& times, const std::vector<double>& pop,
                                const std::vector<double>& err);

struct CriticalDensity {
    double rho_cr = 0.0;      // scaled density where fitted tau(rho) = 1/omega_Ryd
    double log_rho_err = 0.0;
};

/// Solves the fitted power law tau(rho) = 1/omega_Ryd. Refuses to
/// extrapolate when the fitted exponent is uncertain (|stderr| > 0.5).
CriticalDensity critical_density_from_fit(const PowerLawFit& tau_of_rho, double omega_ryd);

/// rho_cr(T) = rho_cr(T') sqrt(T'/T).
inline double critical_density_scale_temperature(double rho_cr_ref, double t_ref, double t) {
    return rho_cr_ref * std::sqrt(t_ref / t);
}

}  // namespace rydsim
