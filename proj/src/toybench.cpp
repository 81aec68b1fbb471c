#include "rydsim/toybench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "rydsim/integrator.hpp"
#include "rydsim/rng.hpp"
#include "rydsim/threadpool.hpp"
#include "rydsim/wigner.hpp"

namespace rydsim {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double soft_inv(double u, double a_s) { return 1.0 / std::sqrt(u * u + a_s * a_s); }
}  // namespace

void ToyConfig::finalize(const MaterialContext& ctx) {
    const RydbergScales sc = rydberg_scales(6, ctx);
    if (n_osc < 0) n_osc = sc.n_osc;
    if (coupling <= 0.0) {
        // k e^2 = 2 Ry a_B expressed in (hbar omega) * d_h units with the
        // toy oscillator mass m0.
        const double m_toy = 1.0 / (2.0 * ctx.mu);
        const double d_h = 1.0 / std::sqrt(m_toy * sc.omega);
        coupling = 2.0 / (sc.omega * d_h);
    }
    if (t_f <= 0.0) t_f = 3.5 * kTwoPi;
    if (x1_extent <= 0.0) x1_extent = std::sqrt(2.0 * n_osc + 1.0) + 6.0;
}

double toy_r_of_t(double t, const ToyConfig& cfg) {
    static thread_local bool warned = false;
    if (t < 0.0 || t > cfg.t_f) {
        if (!warned) {
            std::fprintf(stderr, "toy_r_of_t: t clamped to [0, t_f]\n");
            warned = true;
        }
        t = std::clamp(t, 0.0, cfg.t_f);
    }
    const double u = 1.0 - 2.0 * t / cfg.t_f;
    return std::sqrt(cfg.r_close * cfg.r_close +
                     u * u * (cfg.r_far * cfg.r_far - cfg.r_close * cfg.r_close));
}

double toy_potential(double x1, double x2, double r_sep, const ToyConfig& cfg) {
    if (r_sep <= 0.0) throw std::invalid_argument("toy_potential: R > 0");
    return cfg.coupling * (-soft_inv(r_sep + x1 + x2, cfg.a_s) +
                           soft_inv(r_sep - x1 + x2, cfg.a_s) - 2.0 * x1 / (r_sep * r_sep));
}

std::vector<double> discrete_oscillator_state(int n_osc, int nx, double extent,
                                              double& eigenvalue) {
    if (nx < 16) throw std::invalid_argument("discrete_oscillator_state: nx too small");
    const double dx = 2.0 * extent / double(nx - 1);
    std::vector<double> x(std::size_t(nx));
    for (int i = 0; i < nx; ++i) x[std::size_t(i)] = -extent + dx * i;

    // Start from the continuum Hermite function, polish by inverse iteration
    // on the tridiagonal grid Hamiltonian.
    std::vector<double> v(std::size_t(nx));
    for (int i = 0; i < nx; ++i) {
        const double xi = x[std::size_t(i)];
        double hm1 = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * xi * xi);
        double h = std::sqrt(2.0) * xi * hm1;
        if (n_osc == 0) {
            v[std::size_t(i)] = hm1;
            continue;
        }
        for (int k = 2; k <= n_osc; ++k) {
            const double next =
                std::sqrt(2.0 / k) * xi * h - std::sqrt(double(k - 1) / k) * hm1;
            hm1 = h;
            h = next;
        }
        v[std::size_t(i)] = h;
    }

    const double inv_dx2 = 1.0 / (dx * dx);
    std::vector<double> diag(std::size_t(nx)), off(std::size_t(nx), -0.5 * inv_dx2);
    for (int i = 0; i < nx; ++i)
        diag[std::size_t(i)] = inv_dx2 + 0.5 * x[std::size_t(i)] * x[std::size_t(i)];

    auto apply_h = [&](const std::vector<double>& in, std::vector<double>& out) {
        for (int i = 0; i < nx; ++i) {
            double s = diag[std::size_t(i)] * in[std::size_t(i)];
            if (i > 0) s += off[std::size_t(i)] * in[std::size_t(i - 1)];
            if (i < nx - 1) s += off[std::size_t(i)] * in[std::size_t(i + 1)];
            out[std::size_t(i)] = s;
        }
    };
    auto normalize = [&](std::vector<double>& w) {
        double n2 = 0.0;
        for (double a : w) n2 += a * a;
        const double inv = 1.0 / std::sqrt(n2 * dx);
        for (double& a : w) a *= inv;
    };
    normalize(v);

    std::vector<double> hv(std::size_t(nx));
    double lam = 0.0;
    for (int pass = 0; pass < 3; ++pass) {
        apply_h(v, hv);
        lam = 0.0;
        for (int i = 0; i < nx; ++i) lam += v[std::size_t(i)] * hv[std::size_t(i)];
        lam *= dx;
        // Inverse iteration: (H - lam + eps) w = v via the Thomas algorithm.
        const double shift = lam - 1e-9;
        std::vector<double> c(std::size_t(nx)), d(std::size_t(nx));
        double beta = diag[0] - shift;
        c[0] = off[0] / beta;
        d[0] = v[0] / beta;
        for (int i = 1; i < nx; ++i) {
            beta = diag[std::size_t(i)] - shift - off[std::size_t(i)] * c[std::size_t(i - 1)];
            if (std::abs(beta) < 1e-300) beta = 1e-300;
            c[std::size_t(i)] = off[std::size_t(i)] / beta;
            d[std::size_t(i)] =
                (v[std::size_t(i)] - off[std::size_t(i)] * d[std::size_t(i - 1)]) / beta;
        }
        v[std::size_t(nx - 1)] = d[std::size_t(nx - 1)];
        for (int i = nx - 2; i >= 0; --i)
            v[std::size_t(i)] = d[std::size_t(i)] - c[std::size_t(i)] * v[std::size_t(i + 1)];
        normalize(v);
    }
    apply_h(v, hv);
    lam = 0.0;
    for (int i = 0; i < nx; ++i) lam += v[std::size_t(i)] * hv[std::size_t(i)];
    eigenvalue = lam * dx;
    return v;
}

ToyTrace se_evolve(const ToyConfig& cfg_in) {
    ToyConfig cfg = cfg_in;
    if (cfg.t_f <= 0.0 || cfg.n_osc < 0 || cfg.coupling == 0.0)
        throw std::invalid_argument("se_evolve: call ToyConfig::finalize first");

    const int n1 = cfg.nx1, n2 = cfg.nx2;
    const double dx1 = 2.0 * cfg.x1_extent / double(n1 - 1);
    const double dx2 = 2.0 * cfg.x2_extent / double(n2 - 1);
    const std::size_t npts = std::size_t(n1) * n2;

    double e_osc = 0.0;
    const std::vector<double> phi = discrete_oscillator_state(cfg.n_osc, n1, cfg.x1_extent, e_osc);

    // Stability bound for the staggered scheme: dt < 2 / (E_max - E_min).
    const double ke_max = 2.0 / dx1 / dx1 + 2.0 / dx2 / dx2;
    const double v_max =
        0.5 * cfg.x1_extent * cfg.x1_extent + 2.0 * cfg.coupling / cfg.a_s;
    const double dt = cfg.dt_safety * 2.0 / (ke_max + v_max);
    const long n_steps = long(std::ceil(cfg.t_f / dt));
    const double dt_eff = cfg.t_f / double(n_steps);

    std::vector<double> x1(std::size_t(n1)), x2(std::size_t(n2));
    for (int i = 0; i < n1; ++i) x1[std::size_t(i)] = -cfg.x1_extent + dx1 * i;
    for (int j = 0; j < n2; ++j) x2[std::size_t(j)] = -cfg.x2_extent + dx2 * j;

    // Initial product state; real part at t=0, imaginary at t=dt/2.
    std::vector<double> re(npts), im(npts), v_pot(npts), h_buf(npts);
    const double w = cfg.packet_width;
    const double pack_norm = std::pow(std::numbers::pi * w * w, -0.25);
    std::vector<double> packet(std::size_t(n2));
    for (int j = 0; j < n2; ++j)
        packet[std::size_t(j)] =
            pack_norm * std::exp(-x2[std::size_t(j)] * x2[std::size_t(j)] / (2.0 * w * w));
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j)
            re[std::size_t(i) * n2 + j] = phi[std::size_t(i)] * packet[std::size_t(j)];

    auto fill_potential = [&](double t) {
        const double r_sep = toy_r_of_t(t, cfg);
        const double inv_r2 = 1.0 / (r_sep * r_sep);
        for (int i = 0; i < n1; ++i) {
            const double xi = x1[std::size_t(i)];
            const double harm = 0.5 * xi * xi;
            double* row = v_pot.data() + std::size_t(i) * n2;
            for (int j = 0; j < n2; ++j) {
                const double xj = x2[std::size_t(j)];
                row[std::size_t(j)] =
                    harm + cfg.coupling * (-soft_inv(r_sep + xi + xj, cfg.a_s) +
                                           soft_inv(r_sep - xi + xj, cfg.a_s) -
                                           2.0 * xi * inv_r2);
            }
        }
    };

    const double c1 = -0.5 / (dx1 * dx1), c2 = -0.5 / (dx2 * dx2);
    auto apply_h = [&](const std::vector<double>& f, std::vector<double>& out) {
        parallel_chunks(4, 2, [&](std::size_t blk) {
            const int i0 = int(std::size_t(n1) * blk / 4);
            const int i1b = int(std::size_t(n1) * (blk + 1) / 4);
            for (int i = i0; i < i1b; ++i) {
                const double* fr = f.data() + std::size_t(i) * n2;
                const double* fu = i > 0 ? f.data() + std::size_t(i - 1) * n2 : nullptr;
                const double* fd = i < n1 - 1 ? f.data() + std::size_t(i + 1) * n2 : nullptr;
                const double* vp = v_pot.data() + std::size_t(i) * n2;
                double* o = out.data() + std::size_t(i) * n2;
                for (int j = 0; j < n2; ++j) {
                    const double left = j > 0 ? fr[std::size_t(j - 1)] : 0.0;
                    const double right = j < n2 - 1 ? fr[std::size_t(j + 1)] : 0.0;
                    const double up = fu ? fu[std::size_t(j)] : 0.0;
                    const double down = fd ? fd[std::size_t(j)] : 0.0;
                    const double fij = fr[std::size_t(j)];
                    o[std::size_t(j)] = c1 * (up - 2.0 * fij + down) +
                                        c2 * (left - 2.0 * fij + right) +
                                        vp[std::size_t(j)] * fij;
                }
            }
        });
    };

    fill_potential(0.0);
    // Half-step the imaginary part: I(dt/2) = -dt/2 H R(0)  (initial Im = 0).
    apply_h(re, h_buf);
    for (std::size_t k = 0; k < npts; ++k) im[k] = -0.5 * dt_eff * h_buf[k];

    ToyTrace trace;
    const long out_every = std::max(1L, n_steps / (cfg.n_out - 1));
    const double cell = dx1 * dx2;

    std::vector<double> im_prev = im;
    auto record = [&](double t) {
        // Projection with the time-centered imaginary part.
        double p0 = 0.0, w2sum = 0.0, nsum = 0.0;
        for (int j = 0; j < n2; ++j) {
            double ar = 0.0, ai = 0.0;
            for (int i = 0; i < n1; ++i) {
                const std::size_t k = std::size_t(i) * n2 + j;
                ar += phi[std::size_t(i)] * re[k];
                ai += phi[std::size_t(i)] * 0.5 * (im[k] + im_prev[k]);
            }
            p0 += (ar * ar + ai * ai);
        }
        p0 *= dx1 * dx1 * dx2;
        // x2 width of the reduced density.
        for (int j = 0; j < n2; ++j) {
            double rho = 0.0;
            for (int i = 0; i < n1; ++i) {
                const std::size_t k = std::size_t(i) * n2 + j;
                const double ii = 0.5 * (im[k] + im_prev[k]);
                rho += re[k] * re[k] + ii * ii;
            }
            w2sum += x2[std::size_t(j)] * x2[std::size_t(j)] * rho;
            nsum += rho;
        }
        trace.times.push_back(t / kTwoPi);
        trace.p0.push_back(p0);
        trace.p0_err.push_back(0.0);
        trace.x2_width.push_back(std::sqrt(w2sum / nsum));
    };
    record(0.0);

    double norm0 = 0.0;
    {
        double s = 0.0;
        for (std::size_t k = 0; k < npts; ++k) s += re[k] * re[k] + im[k] * im[k];
        norm0 = s * cell;
    }
    double max_drift = 0.0;

    for (long step = 1; step <= n_steps; ++step) {
        const double t_new = dt_eff * double(step);
        if ((step - 1) % cfg.v_update_every == 0) fill_potential(t_new - 0.5 * dt_eff);
        // R(t+dt) = R(t) + dt H I(t+dt/2)
        apply_h(im, h_buf);
        for (std::size_t k = 0; k < npts; ++k) re[k] += dt_eff * h_buf[k];
        // I(t+3dt/2) = I(t+dt/2) - dt H R(t+dt)
        im_prev = im;
        apply_h(re, h_buf);
        for (std::size_t k = 0; k < npts; ++k) im[k] -= dt_eff * h_buf[k];

        if (step % out_every == 0 || step == n_steps) {
            record(t_new);
            // Staggered-norm conservation check.
            double s = 0.0;
            for (std::size_t k = 0; k < npts; ++k) s += re[k] * re[k] + im[k] * im_prev[k];
            const double drift = std::abs(s * cell / norm0 - 1.0);
            max_drift = std::max(max_drift, drift);
            if (drift > 1e-4)
                throw std::runtime_error("se_evolve: norm drift exceeded 1e-4 (dt too large?)");
        }
    }
    trace.norm_drift = max_drift;
    return trace;
}

ToyTrace twa_toy(const ToyConfig& cfg_in, long n_traj, std::uint64_t seed, unsigned workers) {
    ToyConfig cfg = cfg_in;
    if (cfg.t_f <= 0.0 || cfg.n_osc < 0 || cfg.coupling == 0.0)
        throw std::invalid_argument("twa_toy: call ToyConfig::finalize first");
    if (n_traj < 1) throw std::invalid_argument("twa_toy: n_traj >= 1");

    const int n_out = cfg.n_out;
    const double z_norm = abs_wigner_norm(cfg.n_osc);
    std::vector<double> times(std::size_t(n_out));
    for (int k = 0; k < n_out; ++k) times[std::size_t(k)] = cfg.t_f * k / double(n_out - 1);

    const long chunk = 4096;
    const long n_chunks = (n_traj + chunk - 1) / chunk;
    std::vector<double> sum1(std::size_t(n_chunks) * n_out, 0.0);
    std::vector<double> sum2(std::size_t(n_chunks) * n_out, 0.0);

    parallel_chunks(std::size_t(n_chunks), workers, [&](std::size_t cidx) {
        double* s1 = sum1.data() + cidx * std::size_t(n_out);
        double* s2 = sum2.data() + cidx * std::size_t(n_out);
        const long j0 = long(cidx) * chunk;
        const long j1 = std::min(n_traj, j0 + chunk);
        const double w = cfg.packet_width;
        for (long j = j0; j < j1; ++j) {
            Rng rng(seed, std::uint64_t(j));
            double x1, p1;
            signed char wgt;
            sample_signed_point(cfg.n_osc, 1.0, 1.0, rng, x1, p1, wgt);
            const double x2 = rng.normal() * w / std::sqrt(2.0);
            const double p2 = rng.normal() / (w * std::sqrt(2.0));

            std::vector<double> y{x1, x2, p1, p2};
            CashKarp integ(4, [&cfg](double t, const std::vector<double>& s,
                                     std::vector<double>& d) {
                const double r_sep = toy_r_of_t(t, cfg);
                const double u1 = r_sep + s[0] + s[1];
                const double u2 = r_sep - s[0] + s[1];
                const double s1i = soft_inv(u1, cfg.a_s);
                const double s2i = soft_inv(u2, cfg.a_s);
                const double g1 = u1 * s1i * s1i * s1i;
                const double g2 = u2 * s2i * s2i * s2i;
                d.resize(4);
                d[0] = s[2];
                d[1] = s[3];
                d[2] = -s[0] - cfg.coupling * (g1 + g2 - 2.0 / (r_sep * r_sep));
                d[3] = -cfg.coupling * (g1 - g2);
            });
            IntegratorConfig icfg;
            icfg.rtol = 1e-8;
            icfg.h_init = 0.02 * kTwoPi;
            icfg.h_min = 1e-12;

            double t = 0.0;
            for (int k = 0; k < n_out; ++k) {
                if (k > 0) integ.integrate_to(t, y, times[std::size_t(k)], icfg);
                const double val =
                    double(wgt) * weyl_population(cfg.n_osc, y[0], y[2], 1.0, 1.0);
                s1[std::size_t(k)] += val;
                s2[std::size_t(k)] += val * val;
            }
        }
    });

    ToyTrace trace;
    trace.n_traj = n_traj;
    const double N = double(n_traj);
    for (int k = 0; k < n_out; ++k) {
        double tot1 = 0.0, tot2 = 0.0;
        for (long c = 0; c < n_chunks; ++c) {
            tot1 += sum1[std::size_t(c) * n_out + std::size_t(k)];
            tot2 += sum2[std::size_t(c) * n_out + std::size_t(k)];
        }
        const double mean = tot1 / N;
        const double var = std::max(0.0, tot2 / N - mean * mean);
        trace.times.push_back(times[std::size_t(k)] / kTwoPi);
        trace.p0.push_back(z_norm * mean);
        trace.p0_err.push_back(z_norm * std::sqrt(var / (N - 1.0)));
    }
    return trace;
}

}  // namespace rydsim
