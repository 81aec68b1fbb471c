#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rydsim/material.hpp"
#include "rydsim/plasma.hpp"
#include "rydsim/sources.hpp"
#include "rydsim/vec3.hpp"

namespace rydsim {

/// Classical electron-hole Kepler pair for level (n, l). The relative orbit
/// lies in the xy-plane with angular momentum along +z; the apsidal line may
/// precess at omega_prec.
struct OrbitPair {
    int n = 0;
    int l = 0;
    double eccentricity = 0.0;   // from L = hbar sqrt(l(l+1)), capped below 1
    double semi_major = 0.0;     // relative orbit, a_n
    double omega = 0.0;          // orbital frequency omega_Ryd
    double omega_prec = 0.0;     // apsidal precession rate
    double phase0 = 0.0;         // initial mean anomaly
    bool prescribed = true;      // prescribed | dynamic

    // Instantaneous cartesian state (electron, hole), COM at origin.
    Vec3 r_e, v_e, r_h, v_h;
    double mass_ratio_e = 0.0;   // mu/m_e
    double mass_ratio_h = 0.0;   // mu/m_h
};

/// Elliptical orbit with energy E_n and the eccentricity fixed by the
/// angular momentum of the (n, l) state; starts at apoapsis. xi = 1 is
/// capped at 1 - 1e-9.
OrbitPair init_kepler(int n, int l, const MaterialContext& ctx);

/// Sets the apsidal precession rate (default choice: 0.2 * omega_Ryd).
OrbitPair precess(OrbitPair orbit, double omega_prec);

/// Relative kinetic + bare Coulomb energy of the pair. Coincident positions
/// return -infinity (decayed by collision).
double pair_energy(const Vec3& r_e, const Vec3& v_e, const Vec3& r_h, const Vec3& v_h,
                   const MaterialContext& ctx);

/// Time-parameterized two-charge source driving the plasma without
/// back-action.
ExternalSource prescribed_orbit_source(const OrbitPair& orbit);

struct SurvivalRecord {
    std::vector<double> times;        // survival grid
    std::vector<double> survival;     // S(t), starts at 1, non-increasing
    std::vector<long> at_risk;
    std::vector<double> decay_times;  // uncensored decays
    long n_traj = 0;
    long n_censored = 0;
    bool all_censored = false;
    double tau = 0.0;         // exponential-MLE lifetime (or lower bound)
    double tau_lo = 0.0;      // 1-sigma band
    double tau_hi = 0.0;
    double time_cap = 0.0;
};

struct ClassicalMcOptions {
    int n_plasma = 64;
    double prerun_periods = 1.0;      // plasma periods of pre-equilibration
    double time_cap_rydberg = 200.0;  // cap in units of t_Ryd
    double rtol = 1e-6;
    double xi_override = -1.0;        // >= 0: force this eccentricity
    unsigned workers = 1;
    int survival_bins = 64;
};

/// Monte Carlo classical lifetime: fresh equilibrated plasma per trajectory,
/// full back-action on the pair, decay when the pair energy leaves
/// [E_{n-1}, E_{n+1}].
SurvivalRecord classical_lifetime_mc(int n, int l, const PlasmaParams& params,
                                     const MaterialContext& ctx, long n_traj,
                                     std::uint64_t seed, const ClassicalMcOptions& opt = {});

/// Isolated-pair propagation for conservation tests; returns final pair
/// state after `periods` orbital periods.
OrbitPair propagate_isolated(const OrbitPair& orbit, const MaterialContext& ctx,
                             double periods, double rtol);

}  // namespace rydsim
