#pragma once

#include <cstdint>
#include <vector>

#include "rydsim/rng.hpp"

namespace rydsim {

/// Wigner function of the 1D harmonic-oscillator eigenstate n (hbar = 1):
///   W_n(x, p) = ((-1)^n / pi) exp(-2H/w) L_n(4H/w),  H = p^2/2m + m w^2 x^2/2.
double ho_wigner(int n_osc, double x, double p, double mass, double omega);

/// Weyl symbol of |m><m| normalized so the t = 0 reconstruction of the
/// eigenstate m is exactly 1: 2*pi*hbar * W_m = 2 (-1)^m e^{-s/2} L_m(s),
/// s = 4H/w.
double weyl_population(int m, double x, double p, double mass, double omega);

/// weyl_population for every level in [m_lo, m_hi], one Laguerre recurrence
/// pass. `out` is resized to m_hi - m_lo + 1.
void weyl_population_band(int m_lo, int m_hi, double x, double p, double mass, double omega,
                          std::vector<double>& out);

/// integral of |W_n| over phase space (Z >= 1, equality for n = 0); used to
/// normalize signed-trajectory averages.
double abs_wigner_norm(int n_osc);

/// Half-width of the sampling box in natural oscillator widths.
double sampling_box_halfwidth(int n_osc);

/// Signed phase-space ensemble of an oscillator eigenstate.
struct SignedEnsemble {
    std::vector<double> x, p;
    std::vector<signed char> w;  // exactly +-1
    int n_osc = 0;
    double mass = 0.0;
    double omega = 0.0;
    double z_norm = 1.0;   // integral of |W| used in reconstruction
    double acceptance = 0.0;  // measured rejection-sampling acceptance
};

/// Rejection sampling of |W_n|/Z inside the truncation box; weights are the
/// sign of W at the accepted point. Deterministic given the rng.
SignedEnsemble sample_signed(int n_osc, long n_traj, double mass, double omega, Rng& rng);

/// Draws a single signed sample (used by trajectory workers that keep one
/// point per trajectory).
void sample_signed_point(int n_osc, double mass, double omega, Rng& rng,
                         double& x, double& p, signed char& w);

}  // namespace rydsim
