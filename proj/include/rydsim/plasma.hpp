#pragma once

#include <cstdint>
#include <vector>

#include "rydsim/integrator.hpp"
#include "rydsim/material.hpp"
#include "rydsim/rng.hpp"
#include "rydsim/sources.hpp"
#include "rydsim/vec3.hpp"

namespace rydsim {

/// Classical two-species point-charge plasma in a soft radial trap.
/// Everything in scaled units. Structure-of-arrays so the force kernel
/// vectorizes.
struct PlasmaState {
    std::vector<double> px, py, pz;  // positions
    std::vector<double> vx, vy, vz;  // velocities
    std::vector<double> q;           // charge, units of e (+1 holes, -1 electrons)
    std::vector<double> mass;        // scaled species mass
    std::vector<double> inv_mass;

    double a_s = 0.0;         // soft-core length
    int zeta = 6;             // trap exponent
    double trap_radius = 0.0; // R with (4 pi/3) R^3 = N/rho
    double trap_kT = 0.0;     // trap energy scale
    double t = 0.0;           // simulation clock
    PlasmaParams params;

    std::size_t n() const { return px.size(); }
};

struct PlasmaInitOptions {
    int n_electrons = -1;   // -1: N/2 each (neutral)
    int n_holes = -1;
    double soft_core_factor = 0.02;  // a_s = factor * a_ws
    int zeta = 6;
};

/// Uniform positions in the sphere of radius R, Maxwell-Boltzmann velocities
/// per species. Deterministic given the rng state.
PlasmaState init_plasma(int n_particles, const PlasmaParams& params,
                        const MaterialContext& ctx, Rng& rng,
                        const PlasmaInitOptions& opt = {});

/// Soft-core Coulomb force on charge q1 at r_vec relative to charge q2.
inline Vec3 pair_force(const Vec3& r_vec, double q1, double q2, double a_s) {
    const double d2 = norm2(r_vec) + a_s * a_s;
    const double f = 2.0 * q1 * q2 / (d2 * std::sqrt(d2));
    return r_vec * f;
}

/// Magnitude of the inward trap force at radius r: kT r^(zeta-1) / R^zeta.
double trap_accel(double r, const PlasmaState& state);

/// Reaction of an ideal dipole (moment p_z along z at pos) on the plasma;
/// exact gradient of the dipole-approximated coupling.
struct DipoleReaction {
    Vec3 pos;
    double p_z = 0.0;  // e * a_B
};

/// Accelerations of all plasma particles: mutual soft-core Coulomb + trap +
/// source charges + optional dipole reaction fields. ax/ay/az are resized
/// and overwritten. `threads` > 1 splits rows deterministically.
void plasma_accels(const PlasmaState& state, const std::vector<SourceCharge>& src,
                   const std::vector<DipoleReaction>& dipoles,
                   std::vector<double>& ax, std::vector<double>& ay, std::vector<double>& az,
                   unsigned threads = 1);

/// Electric field (force per unit +e charge) at the given points from all
/// plasma particles and source charges, soft-core regularized.
std::vector<Vec3> field_at(const std::vector<Vec3>& points, const PlasmaState& state,
                           const std::vector<SourceCharge>& src);

/// Kinetic + soft-core pair + trap energy (no sources).
double plasma_energy(const PlasmaState& state);
Vec3 plasma_momentum(const PlasmaState& state);

struct EquilibrationDiagnostics {
    double kT_full = 0.0;   // from mean kinetic energy, all particles
    double kT_half = 0.0;   // particles inside R/2
    double density_full = 0.0;
    double density_half = 0.0;
    long steps = 0;
};

/// Advances the free plasma (no external sources) by `duration`; returns
/// local-equilibrium diagnostics measured on the final state.
EquilibrationDiagnostics equilibrate(PlasmaState& state, double duration,
                                     const IntegratorConfig& cfg, unsigned threads = 1);

/// Generic driver: advance plasma under an external source (and optional
/// frozen dipole reactions) with the adaptive integrator. Steps never
/// overshoot t_end.
class PlasmaDynamics {
  public:
    PlasmaDynamics(PlasmaState state, IntegratorConfig cfg, unsigned threads = 1);

    PlasmaState& state() { return state_; }
    const PlasmaState& state() const { return state_; }
    ExternalSource source;               // monostate = none
    std::vector<DipoleReaction> dipoles; // quasi-static within a step

    /// One adaptive step, capped so t never passes t_end. Returns dt taken.
    double step_to(double t_end);
    void advance_to(double t_end);
    long steps_taken() const { return integ_.n_accepted; }
    double last_h() const { return h_last_; }
    /// Suggests a cap for the next step (0 = no cap beyond t_end).
    double h_cap = 0.0;

  private:
    void pack();
    void unpack();
    void deriv(double t, const std::vector<double>& y, std::vector<double>& dydt);

    PlasmaState state_;
    IntegratorConfig cfg_;
    unsigned threads_;
    CashKarp integ_;
    std::vector<double> y_;
    std::vector<double> ax_, ay_, az_;
    std::vector<SourceCharge> src_buf_;
    double h_last_ = 0.0;
};

/// Characteristic error scales for plasma integration: interparticle spacing
/// for positions, species thermal velocity for velocities.
std::vector<double> plasma_yscale(const PlasmaState& state);

}  // namespace rydsim
