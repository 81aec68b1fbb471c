#pragma once

#include <cmath>
#include <variant>
#include <vector>

#include "rydsim/vec3.hpp"

namespace rydsim {

/// A charge belonging to an external source, in units of e.
struct SourceCharge {
    Vec3 pos;
    double q = 0.0;
};

/// Fixed point charges.
struct FixedChargeSource {
    std::vector<SourceCharge> charges;
};

/// Electron-hole pair on a prescribed (possibly precessing) Kepler orbit in
/// the xy-plane; defined by exciton-classical, evaluated here.
struct PrescribedOrbit {
    double n_semi_major = 0.0;   // relative-orbit semi-major axis a_n
    double eccentricity = 0.0;
    double omega_orbit = 0.0;    // classical Rydberg frequency
    double omega_prec = 0.0;     // apsidal precession rate
    double mass_ratio_e = 0.0;   // mu/m_e: electron radius factor
    double mass_ratio_h = 0.0;   // mu/m_h
    double phase0 = 0.0;         // mean anomaly at t = 0
    double freq_scale = 1.0;     // multiplies omega_orbit (frequency sweeps)
};

/// Two opposite charges rotating on concentric circles in the xy-plane
/// (equal radii for equal masses). separation = r_e + r_h.
struct CircularOrbitPair {
    double r_e = 0.0;
    double r_h = 0.0;
    double omega = 0.0;
    double phase0 = 0.0;
};

/// Electron and hole charge split into M fragments of +-e/M, uniformly
/// staggered along the two circles, all rotating at omega.
struct RingFragmentSource {
    int fragments = 1;
    double r_e = 0.0;
    double r_h = 0.0;
    double omega = 0.0;
};

/// Physical oscillating dipole: charges +-e at z = +-A(t)/2 along the
/// amplitude direction, A(t) = amplitude * cos(omega t + phase).
struct OscillatingDipoleSource {
    Vec3 amplitude;  // peak separation vector (charge +e sits at +amplitude/2)
    double omega = 0.0;
    double phase = 0.0;
};

using ExternalSource =
    std::variant<std::monostate, FixedChargeSource, PrescribedOrbit, CircularOrbitPair,
                 RingFragmentSource, OscillatingDipoleSource>;

/// Kepler's equation M = E - ecc sin(E), solved for the eccentric anomaly.
double solve_kepler(double mean_anomaly, double ecc);

/// Relative-orbit position at time t for a prescribed orbit (xy-plane,
/// apsidal line precessing at omega_prec). Vector points hole -> electron...
/// the convention here: returns r_rel with electron at -mass_ratio_e*r_rel
/// and hole at +mass_ratio_h*r_rel.
Vec3 prescribed_relative_position(const PrescribedOrbit& orbit, double t);

/// Instantaneous source charges at time t (empty for monostate).
void source_charges_at(const ExternalSource& src, double t, std::vector<SourceCharge>& out);

}  // namespace rydsim
