#pragma once

#include <cstdint>
#include <vector>

#include "rydsim/material.hpp"

namespace rydsim {

/// Charge-scattering toy model in oscillator units (hbar = m = omega = 1,
/// lengths in d_h = sqrt(hbar/(m omega))): a harmonically bound dipole
/// coordinate x1 and the internal coordinate x2 of a passing charge whose
/// center-of-mass separation R(t) is prescribed.
struct ToyConfig {
    double coupling = 0.0;      // k q1 q2 in units (hbar omega * d_h); 0 = auto
    int n_osc = -1;             // initial oscillator eigenstate; -1 = mapping at n=6
    double r_far = 100.0;       // R_f
    double r_close = 20.0;      // R_c
    double a_s = 2.0;           // soft core (0.02 a_ws with a_ws ~ R_f)
    double t_f = 0.0;           // 0 = auto 3.5 periods
    double packet_width = 2.0;  // x2 wave packet: psi ~ exp(-x^2/(2 w^2))

    int nx1 = 512;
    double x1_extent = 0.0;     // 0 = auto: classical turning point + margin
    int nx2 = 768;
    double x2_extent = 36.0;
    double dt_safety = 0.5;     // fraction of the leapfrog stability limit
    int v_update_every = 8;     // refresh V(R(t)) every k steps
    int n_out = 64;

    void finalize(const MaterialContext& ctx);
};

/// Prescribed separation R(t) = sqrt(R_c^2 + (1 - 2t/t_f)^2 (R_f^2 - R_c^2)).
/// t outside [0, t_f] is clamped (with a stderr warning once per run).
double toy_r_of_t(double t, const ToyConfig& cfg);

/// Interaction + subtraction term:
/// A (-1/s(R + x1 + x2) + 1/s(R - x1 + x2) - 2 x1 / R^2), s(u) = sqrt(u^2 + a_s^2).
double toy_potential(double x1, double x2, double r_sep, const ToyConfig& cfg);

struct ToyTrace {
    std::vector<double> times;      // in units of the oscillator period
    std::vector<double> p0;         // population of the initial eigenstate
    std::vector<double> p0_err;     // zero for the SE trace
    std::vector<double> x2_width;   // reduced-packet rms width (SE only)
    double norm_drift = 0.0;        // max |norm - 1| over the run (SE)
    long n_traj = 0;
};

/// Grid Schroedinger evolution (staggered real/imaginary leap-frog), initial
/// state = (discrete oscillator eigenstate in x1) x (Gaussian packet in x2).
ToyTrace se_evolve(const ToyConfig& cfg);

/// Same Hamiltonian evolved by signed-weight TWA trajectories.
ToyTrace twa_toy(const ToyConfig& cfg, long n_traj, std::uint64_t seed, unsigned workers = 1);

/// Discrete eigenstate of the 1D oscillator Hamiltonian on the given grid
/// (three-point Laplacian), used for initialization and projection; returns
/// the grid eigenvalue through `eigenvalue`.
std::vector<double> discrete_oscillator_state(int n_osc, int nx, double extent,
                                              double& eigenvalue);

}  // namespace rydsim
