#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rydsim/kepler.hpp"
#include "rydsim/material.hpp"
#include "rydsim/plasma.hpp"

namespace rydsim {

/// Debye-screened to bare field-magnitude ratio around a static point
/// charge: e^{-r/lambda} (1 + r/lambda).
double debye_point_ratio(double r, double lambda);

/// Screened dipole potential (scaled units; a unit charge has potential 2/r):
/// Phi = 2 (p . r) exp(-r_s/lambda) (1/r_s + 1/lambda) / r_s^2,
/// r_s = sqrt(|r|^2 + a_s^2).
double debye_dipole_potential(const Vec3& p, const Vec3& r_vec, double lambda, double a_s);

/// E = -grad Phi, evaluated analytically.
Vec3 debye_dipole_field(const Vec3& p, const Vec3& r_vec, double lambda, double a_s);

/// On-axis screened-to-bare dipole field ratio: e^{-u}(1 + u + u^2/2),
/// u = r/lambda (soft-core-free closed form).
double debye_dipole_axis_ratio(double r, double lambda);

struct ScreeningProfile {
    std::vector<double> bin_center;   // separation (or radius)
    std::vector<double> bin_lo, bin_hi;
    std::vector<double> ratio;        // measured field / bare two-body field
    std::vector<double> ratio_err;
    std::vector<long> n_samples;
    std::vector<bool> empty;          // bins never visited
    double window_time = 0.0;
    std::string reference;            // suggested overlay curve id
};

struct ScreeningOptions {
    int n_plasma = 256;
    double prerun_periods = 10.0;
    double settle_periods = 3.0;     // after the source is switched on
    double window_periods = 50.0;    // sampling window per realization
    int realizations = 1;
    double rtol = 1e-6;
    unsigned workers = 1;
    int bins = 16;
    int batches = 16;                // stderr from batch-mean scatter
    double samples_per_tau_p = 50.0;
    double h_cap_fraction = 0.025;   // cap vs source period (0 = none)
    std::uint64_t seed = 1;
};

/// Field component along the electron-hole line at the hole of a prescribed
/// elliptic orbit, binned by instantaneous separation and normalized by the
/// bare two-body field at the sample separation.
ScreeningProfile orbit_screening_profile(const OrbitPair& orbit, const PlasmaParams& params,
                                         const MaterialContext& ctx,
                                         const ScreeningOptions& opt);

/// Two charges on prescribed circles (equal masses -> equal radii, otherwise
/// Cu2O mass-split radii); one profile entry per separation in `separations`.
ScreeningProfile circular_orbit_profile(bool equal_masses,
                                        const std::vector<double>& separations, double omega,
                                        const PlasmaParams& params, const MaterialContext& ctx,
                                        const ScreeningOptions& opt);

/// Same measurement with the charges split into M fragments of +-e/M.
ScreeningProfile ring_fragment_profile(int m_fragments, bool equal_masses,
                                       const std::vector<double>& separations, double omega,
                                       const PlasmaParams& params, const MaterialContext& ctx,
                                       const ScreeningOptions& opt);

/// Oscillating central dipole along z: half-period-averaged E_z on the
/// z-axis at the given radii, normalized by the bare dipole's half-period
/// average. Returns one profile per half-period parity.
struct DipoleScreeningResult {
    ScreeningProfile half[2];
    double amplitude = 0.0;
    double omega = 0.0;
};
DipoleScreeningResult oscillating_dipole_profile(double amplitude, double omega,
                                                 const std::vector<double>& radii,
                                                 const PlasmaParams& params,
                                                 const MaterialContext& ctx,
                                                 const ScreeningOptions& opt);

/// Exciton-size to Debye-length ratio. `printed` follows the published
/// relation 2^(1/3) 3^(1/6) sqrt(Gamma) (w_p/w_Ryd)^(2/3); `direct`
/// evaluates <r>_n / lambda from the definitions. The two differ by exactly
/// 3/2 (see README).
struct SizeDebyeRatio {
    double printed = 0.0;
    double direct = 0.0;
};
SizeDebyeRatio size_debye_ratio(int n, const PlasmaParams& params, const MaterialContext& ctx);

/// Named constant of the printed relation.
inline constexpr double kSizeDebyePrintedConstant = 1.5130857494229015;  // 2^(1/3) 3^(1/6)

}  // namespace rydsim
