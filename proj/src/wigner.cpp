#include "rydsim/wigner.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rydsim {

namespace {
constexpr double kPi = std::numbers::pi;

/// e^{-s/2} L_n(s), evaluated with incremental damping so intermediates stay
/// finite: u_k = L_k d^{k+1}, d = e^{-s/(2(n+1))}, gives u_n = e^{-s/2} L_n.
/// |e^{-s/2} L_k(s)| <= 1 bounds the result; intermediates are below
/// e^{s/2}, safe for the level range used here (n <= ~150).
double exp_laguerre(int n, double s) {
    if (s > 8.0 * n + 120.0) return 0.0;  // deep in the exponential tail
    const double d = std::exp(-0.5 * s / double(n + 1));
    double um1 = d;  // u_0
    if (n == 0) return um1;
    double u = (1.0 - s) * d * d;  // u_1
    const double d2 = d * d;
    for (int k = 2; k <= n; ++k) {
        const double next = ((2.0 * k - 1.0 - s) * u * d - (k - 1.0) * um1 * d2) / double(k);
        um1 = u;
        u = next;
    }
    return u;
}

/// e^{-s/2} L_k(s) for all k in [0, m_hi].
void exp_laguerre_all(int m_hi, double s, std::vector<double>& out) {
    out.assign(std::size_t(m_hi + 1), 0.0);
    if (s > 8.0 * m_hi + 120.0) return;
    const double d = std::exp(-0.5 * s / double(m_hi + 1));
    std::vector<double> dpow(std::size_t(m_hi + 1));
    dpow[std::size_t(m_hi)] = 1.0;
    for (int k = m_hi - 1; k >= 0; --k) dpow[std::size_t(k)] = dpow[std::size_t(k + 1)] * d;

    double um1 = d;                      // u_0 = L_0 d
    out[0] = um1 * dpow[0];              // L_0 e^{-s/2}
    if (m_hi == 0) return;
    double u = (1.0 - s) * d * d;        // u_1 = L_1 d^2
    out[1] = u * dpow[1];
    const double d2 = d * d;
    for (int k = 2; k <= m_hi; ++k) {
        const double next = ((2.0 * k - 1.0 - s) * u * d - (k - 1.0) * um1 * d2) / double(k);
        um1 = u;
        u = next;
        out[std::size_t(k)] = u * dpow[std::size_t(k)];
    }
}

double action_arg(double x, double p, double mass, double omega) {
    // s = 4 H / (hbar omega)
    return 4.0 * (p * p / (2.0 * mass) + 0.5 * mass * omega * omega * x * x) / omega;
}
}  // namespace

double ho_wigner(int n_osc, double x, double p, double mass, double omega) {
    if (n_osc < 0) throw std::invalid_argument("ho_wigner: n_osc >= 0");
    const double s = action_arg(x, p, mass, omega);
    const double sign = (n_osc % 2 == 0) ? 1.0 : -1.0;
    return sign / kPi * exp_laguerre(n_osc, s);
}

double weyl_population(int m, double x, double p, double mass, double omega) {
    return 2.0 * kPi * ho_wigner(m, x, p, mass, omega);
}

void weyl_population_band(int m_lo, int m_hi, double x, double p, double mass, double omega,
                          std::vector<double>& out) {
    if (m_lo < 0 || m_hi < m_lo) throw std::invalid_argument("weyl_population_band: bad band");
    static thread_local std::vector<double> all;
    exp_laguerre_all(m_hi, action_arg(x, p, mass, omega), all);
    out.resize(std::size_t(m_hi - m_lo + 1));
    for (int k = m_lo; k <= m_hi; ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        out[std::size_t(k - m_lo)] = 2.0 * sign * all[std::size_t(k)];
    }
}

double sampling_box_halfwidth(int n_osc) { return 6.0 + 2.0 * std::sqrt(double(n_osc)); }

double abs_wigner_norm(int n_osc) {
    // Z = (1/2) int_0^inf e^{-s/2} |L_n(s)| ds by composite Simpson. The
    // integrand has n sign changes below s ~ 4n+2 and decays beyond; the
    // grid just needs to be fine against the innermost zero spacing.
    const double s_max = 8.0 * n_osc + 120.0;
    const long m = std::max(2000L, 600L * (n_osc + 1));
    const double h = s_max / double(2 * m);
    double sum = std::abs(exp_laguerre(n_osc, 0.0)) + std::abs(exp_laguerre(n_osc, s_max));
    for (long k = 1; k < 2 * m; ++k)
        sum += std::abs(exp_laguerre(n_osc, h * double(k))) * ((k % 2) ? 4.0 : 2.0);
    return 0.5 * sum * h / 3.0;
}

void sample_signed_point(int n_osc, double mass, double omega, Rng& rng,
                         double& x, double& p, signed char& w) {
    const double xw = 1.0 / std::sqrt(mass * omega);  // natural widths
    const double pw = std::sqrt(mass * omega);
    const double half = sampling_box_halfwidth(n_osc);
    while (true) {
        const double xt = rng.uniform(-half, half) * xw;
        const double pt = rng.uniform(-half, half) * pw;
        const double wv = ho_wigner(n_osc, xt, pt, mass, omega);
        // |W| <= 1/pi everywhere, so 1/pi is an exact envelope.
        if (rng.uniform() / kPi < std::abs(wv)) {
            x = xt;
            p = pt;
            w = wv >= 0.0 ? (signed char)1 : (signed char)-1;
            return;
        }
    }
}

SignedEnsemble sample_signed(int n_osc, long n_traj, double mass, double omega, Rng& rng) {
    if (n_traj < 1) throw std::invalid_argument("sample_signed: n_traj >= 1");
    SignedEnsemble e;
    e.n_osc = n_osc;
    e.mass = mass;
    e.omega = omega;
    e.z_norm = abs_wigner_norm(n_osc);
    e.x.resize(std::size_t(n_traj));
    e.p.resize(std::size_t(n_traj));
    e.w.resize(std::size_t(n_traj));

    const double half = sampling_box_halfwidth(n_osc);
    const double box_area = 4.0 * half * half;  // in units of hbar (xw*pw = 1)
    const double expected_acceptance = kPi * e.z_norm / box_area;
    if (expected_acceptance < 1e-4)
        throw std::invalid_argument("sample_signed: rejection efficiency below 1e-4");

    long proposals = 0;
    for (long j = 0; j < n_traj; ++j) {
        while (true) {
            ++proposals;
            double xt, pt;
            signed char wt;
            // inline retry loop shared with sample_signed_point
            const double xw = 1.0 / std::sqrt(mass * omega);
            const double pw = std::sqrt(mass * omega);
            xt = rng.uniform(-half, half) * xw;
            pt = rng.uniform(-half, half) * pw;
            const double wv = ho_wigner(n_osc, xt, pt, mass, omega);
            if (rng.uniform() / kPi < std::abs(wv)) {
                wt = wv >= 0.0 ? (signed char)1 : (signed char)-1;
                e.x[std::size_t(j)] = xt;
                e.p[std::size_t(j)] = pt;
                e.w[std::size_t(j)] = wt;
                break;
            }
        }
    }
    e.acceptance = double(n_traj) / double(proposals);
    return e;
}

}  // namespace rydsim
