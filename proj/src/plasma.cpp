#include "rydsim/plasma.hpp"

#include <numbers>
#include <stdexcept>

#include "rydsim/threadpool.hpp"

namespace rydsim {

namespace {
constexpr double kPi = std::numbers::pi;
}

PlasmaState init_plasma(int n_particles, const PlasmaParams& params,
                        const MaterialContext& ctx, Rng& rng, const PlasmaInitOptions& opt) {
    int n_e = opt.n_electrons, n_h = opt.n_holes;
    if (n_e < 0 && n_h < 0) {
        if (n_particles < 2 || n_particles % 2 != 0)
            throw std::invalid_argument("init_plasma: neutral runs need even N >= 2");
        n_e = n_h = n_particles / 2;
    } else if (n_e < 0 || n_h < 0 || n_e + n_h != n_particles) {
        throw std::invalid_argument("init_plasma: species counts must sum to N");
    }

    PlasmaState s;
    s.params = params;
    s.zeta = opt.zeta;
    s.trap_radius = std::cbrt(3.0 * n_particles / (4.0 * kPi * params.rho));
    s.trap_kT = params.kT_mean();
    s.a_s = opt.soft_core_factor * params.wigner_seitz;

    const std::size_t n = std::size_t(n_particles);
    s.px.resize(n); s.py.resize(n); s.pz.resize(n);
    s.vx.resize(n); s.vy.resize(n); s.vz.resize(n);
    s.q.resize(n); s.mass.resize(n); s.inv_mass.resize(n);

    for (std::size_t i = 0; i < n; ++i) {
        const bool electron = i < std::size_t(n_e);
        s.q[i] = electron ? -1.0 : 1.0;
        s.mass[i] = electron ? ctx.m_e_scaled : ctx.m_h_scaled;
        s.inv_mass[i] = 1.0 / s.mass[i];
        const Vec3 r = rng.in_sphere(s.trap_radius);
        s.px[i] = r.x; s.py[i] = r.y; s.pz[i] = r.z;
        const double kT = electron ? params.kT_e : params.kT_h;
        const double sigma = std::sqrt(kT / s.mass[i]);
        s.vx[i] = sigma * rng.normal();
        s.vy[i] = sigma * rng.normal();
        s.vz[i] = sigma * rng.normal();
    }
    return s;
}

double trap_accel(double r, const PlasmaState& state) {
    if (r <= 0.0) return 0.0;
    return state.trap_kT * std::pow(r / state.trap_radius, state.zeta - 1) / state.trap_radius;
}

void plasma_accels(const PlasmaState& s, const std::vector<SourceCharge>& src,
                   const std::vector<DipoleReaction>& dipoles,
                   std::vector<double>& ax, std::vector<double>& ay, std::vector<double>& az,
                   unsigned threads) {
    const std::size_t n = s.n();
    ax.resize(n); ay.resize(n); az.resize(n);
    const double as2 = s.a_s * s.a_s;
    const double* px = s.px.data();
    const double* py = s.py.data();
    const double* pz = s.pz.data();
    const double* q = s.q.data();

    // Full N^2 sweep (the i == j term vanishes identically); each row is
    // written by exactly one thread, so the result does not depend on the
    // partitioning.
    auto rows = [&](std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i < i1; ++i) {
            const double xi = px[i], yi = py[i], zi = pz[i];
            double fx = 0.0, fy = 0.0, fz = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double dx = xi - px[j];
                const double dy = yi - py[j];
                const double dz = zi - pz[j];
                const double d2 = dx * dx + dy * dy + dz * dz + as2;
                const double inv = q[j] / (d2 * std::sqrt(d2));
                fx += dx * inv;
                fy += dy * inv;
                fz += dz * inv;
            }
            // 2 q_i q_j / (r^2 + a_s^2)^{3/2} * r_vec
            const double pref = 2.0 * q[i];
            double gx = pref * fx, gy = pref * fy, gz = pref * fz;

            // trap: a = -kT r^(zeta-1)/R^zeta * r_hat (zeta even: use r^2 powers)
            const double r2 = xi * xi + yi * yi + zi * zi;
            if (r2 > 0.0) {
                const double rr = std::sqrt(r2);
                const double mag = trap_accel(rr, s);
                const double f = -mag / rr;
                gx += f * xi; gy += f * yi; gz += f * zi;
            }
            for (const auto& c : src) {
                const double dx = xi - c.pos.x, dy = yi - c.pos.y, dz = zi - c.pos.z;
                const double d2 = dx * dx + dy * dy + dz * dz + as2;
                const double inv = 2.0 * q[i] * c.q / (d2 * std::sqrt(d2));
                gx += dx * inv; gy += dy * inv; gz += dz * inv;
            }
            for (const auto& d : dipoles) {
                // F_i = -2 q_i p_z [ z_hat / D^{3/2} - 3 z r_vec / D^{5/2} ],
                // the exact gradient of the dipole-approximated coupling.
                const double dx = xi - d.pos.x, dy = yi - d.pos.y, dz = zi - d.pos.z;
                const double D = dx * dx + dy * dy + dz * dz + as2;
                const double D32 = D * std::sqrt(D);
                const double c3 = 3.0 * dz / (D32 * D);
                const double pref_d = -2.0 * q[i] * d.p_z;
                gx += pref_d * (-c3 * dx);
                gy += pref_d * (-c3 * dy);
                gz += pref_d * (1.0 / D32 - c3 * dz);
            }
            const double im = s.inv_mass[i];
            ax[i] = gx * im; ay[i] = gy * im; az[i] = gz * im;
        }
    };

    if (threads > 1 && n >= 1024) {
        const std::size_t nblocks = threads;
        parallel_chunks(nblocks, threads, [&](std::size_t b) {
            const std::size_t i0 = n * b / nblocks;
            const std::size_t i1 = n * (b + 1) / nblocks;
            rows(i0, i1);
        });
    } else {
        rows(0, n);
    }
}

std::vector<Vec3> field_at(const std::vector<Vec3>& points, const PlasmaState& s,
                           const std::vector<SourceCharge>& src) {
    const double as2 = s.a_s * s.a_s;
    std::vector<Vec3> out(points.size());
    for (std::size_t k = 0; k < points.size(); ++k) {
        const Vec3 p = points[k];
        double ex = 0.0, ey = 0.0, ez = 0.0;
        for (std::size_t j = 0; j < s.n(); ++j) {
            const double dx = p.x - s.px[j], dy = p.y - s.py[j], dz = p.z - s.pz[j];
            const double d2 = dx * dx + dy * dy + dz * dz + as2;
            const double inv = 2.0 * s.q[j] / (d2 * std::sqrt(d2));
            ex += dx * inv; ey += dy * inv; ez += dz * inv;
        }
        for (const auto& c : src) {
            const double dx = p.x - c.pos.x, dy = p.y - c.pos.y, dz = p.z - c.pos.z;
            const double d2 = dx * dx + dy * dy + dz * dz + as2;
            const double inv = 2.0 * c.q / (d2 * std::sqrt(d2));
            ex += dx * inv; ey += dy * inv; ez += dz * inv;
        }
        out[k] = {ex, ey, ez};
    }
    return out;
}

double plasma_energy(const PlasmaState& s) {
    const std::size_t n = s.n();
    const double as2 = s.a_s * s.a_s;
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        e += 0.5 * s.mass[i] *
             (s.vx[i] * s.vx[i] + s.vy[i] * s.vy[i] + s.vz[i] * s.vz[i]);
        const double r = std::sqrt(s.px[i] * s.px[i] + s.py[i] * s.py[i] + s.pz[i] * s.pz[i]);
        e += s.trap_kT * std::pow(r / s.trap_radius, s.zeta) / double(s.zeta);
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = s.px[i] - s.px[j], dy = s.py[i] - s.py[j], dz = s.pz[i] - s.pz[j];
            e += 2.0 * s.q[i] * s.q[j] / std::sqrt(dx * dx + dy * dy + dz * dz + as2);
        }
    }
    return e;
}

Vec3 plasma_momentum(const PlasmaState& s) {
    Vec3 p{};
    for (std::size_t i = 0; i < s.n(); ++i)
        p += Vec3{s.vx[i], s.vy[i], s.vz[i]} * s.mass[i];
    return p;
}

std::vector<double> plasma_yscale(const PlasmaState& s) {
    const std::size_t n = s.n();
    std::vector<double> sc(6 * n);
    const double xscale = s.params.wigner_seitz;
    for (std::size_t i = 0; i < n; ++i) {
        const double kT = s.q[i] < 0.0 ? s.params.kT_e : s.params.kT_h;
        const double vscale = std::sqrt(kT * s.inv_mass[i]);
        sc[i] = sc[n + i] = sc[2 * n + i] = xscale;
        sc[3 * n + i] = sc[4 * n + i] = sc[5 * n + i] = vscale;
    }
    return sc;
}

PlasmaDynamics::PlasmaDynamics(PlasmaState state, IntegratorConfig cfg, unsigned threads)
    : state_(std::move(state)),
      cfg_(cfg),
      threads_(threads),
      integ_(6 * state_.n(), [this](double t, const std::vector<double>& y,
                                    std::vector<double>& dydt) { deriv(t, y, dydt); }) {
    cfg_.validate();
    integ_.yscale = plasma_yscale(state_);
    pack();
}

void PlasmaDynamics::pack() {
    const std::size_t n = state_.n();
    y_.resize(6 * n);
    for (std::size_t i = 0; i < n; ++i) {
        y_[i] = state_.px[i]; y_[n + i] = state_.py[i]; y_[2 * n + i] = state_.pz[i];
        y_[3 * n + i] = state_.vx[i]; y_[4 * n + i] = state_.vy[i]; y_[5 * n + i] = state_.vz[i];
    }
}

void PlasmaDynamics::unpack() {
    const std::size_t n = state_.n();
    for (std::size_t i = 0; i < n; ++i) {
        state_.px[i] = y_[i]; state_.py[i] = y_[n + i]; state_.pz[i] = y_[2 * n + i];
        state_.vx[i] = y_[3 * n + i]; state_.vy[i] = y_[4 * n + i]; state_.vz[i] = y_[5 * n + i];
    }
}

void PlasmaDynamics::deriv(double t, const std::vector<double>& y, std::vector<double>& dydt) {
    const std::size_t n = state_.n();
    dydt.resize(6 * n);
    // Positions/velocities live in scratch copies of the state so the force
    // kernel can keep its SoA layout.
    std::copy(y.begin(), y.begin() + std::ptrdiff_t(n), state_.px.begin());
    std::copy(y.begin() + std::ptrdiff_t(n), y.begin() + std::ptrdiff_t(2 * n), state_.py.begin());
    std::copy(y.begin() + std::ptrdiff_t(2 * n), y.begin() + std::ptrdiff_t(3 * n), state_.pz.begin());
    source_charges_at(source, t, src_buf_);
    plasma_accels(state_, src_buf_, dipoles, ax_, ay_, az_, threads_);
    for (std::size_t i = 0; i < n; ++i) {
        dydt[i] = y[3 * n + i];
        dydt[n + i] = y[4 * n + i];
        dydt[2 * n + i] = y[5 * n + i];
        dydt[3 * n + i] = ax_[i];
        dydt[4 * n + i] = ay_[i];
        dydt[5 * n + i] = az_[i];
    }
}

double PlasmaDynamics::step_to(double t_end) {
    if (state_.t >= t_end) return 0.0;
    pack();
    double remaining = t_end - state_.t;
    if (integ_.h_next <= 0.0) integ_.h_next = cfg_.h_init;
    if (h_cap > 0.0 && integ_.h_next > h_cap) integ_.h_next = h_cap;
    if (integ_.h_next > remaining) integ_.h_next = remaining;
    double t = state_.t;
    h_last_ = integ_.step(t, y_, cfg_);
    state_.t = t;
    unpack();
    return h_last_;
}

void PlasmaDynamics::advance_to(double t_end) {
    while (state_.t < t_end - 1e-9) step_to(t_end);
}

EquilibrationDiagnostics equilibrate(PlasmaState& state, double duration,
                                     const IntegratorConfig& cfg, unsigned threads) {
    PlasmaDynamics dyn(std::move(state), cfg, threads);
    dyn.advance_to(dyn.state().t + duration);
    state = std::move(dyn.state());

    EquilibrationDiagnostics d;
    d.steps = dyn.steps_taken();
    const double r_half = 0.5 * state.trap_radius;
    double ke_full = 0.0, ke_half = 0.0;
    std::size_t n_half = 0;
    for (std::size_t i = 0; i < state.n(); ++i) {
        const double ke = 0.5 * state.mass[i] *
                          (state.vx[i] * state.vx[i] + state.vy[i] * state.vy[i] +
                           state.vz[i] * state.vz[i]);
        ke_full += ke;
        const double r2 = state.px[i] * state.px[i] + state.py[i] * state.py[i] +
                          state.pz[i] * state.pz[i];
        if (r2 < r_half * r_half) {
            ke_half += ke;
            ++n_half;
        }
    }
    const double vol_full = 4.0 / 3.0 * kPi * std::pow(state.trap_radius, 3);
    const double vol_half = vol_full / 8.0;
    d.kT_full = state.n() ? (2.0 / 3.0) * ke_full / double(state.n()) : 0.0;
    d.kT_half = n_half ? (2.0 / 3.0) * ke_half / double(n_half) : 0.0;
    d.density_full = double(state.n()) / vol_full;
    d.density_half = double(n_half) / vol_half;
    return d;
}

}  // namespace rydsim
