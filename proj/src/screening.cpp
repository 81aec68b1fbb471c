#include "rydsim/screening.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "rydsim/threadpool.hpp"

namespace rydsim {

namespace {
constexpr double kPi = std::numbers::pi;

/// Per-bin, per-batch accumulation. Samples along one run are correlated on
/// the plasma-period scale, so standard errors come from the scatter of
/// batch means (batches = window segments x realizations).
struct ProfileAccumulator {
    int bins = 0, batches = 0;
    std::vector<double> sum;   // [batch][bin]
    std::vector<long> count;

    ProfileAccumulator(int nbins, int nbatches)
        : bins(nbins), batches(nbatches), sum(std::size_t(nbins) * nbatches, 0.0),
          count(std::size_t(nbins) * nbatches, 0) {}

    void add(int batch, int bin, double v) {
        sum[std::size_t(batch) * bins + bin] += v;
        ++count[std::size_t(batch) * bins + bin];
    }
};

void finalize_profiles(const std::vector<const ProfileAccumulator*>& accs, int bins,
                       ScreeningProfile& p) {
    p.ratio.assign(std::size_t(bins), 0.0);
    p.ratio_err.assign(std::size_t(bins), 0.0);
    p.n_samples.assign(std::size_t(bins), 0);
    p.empty.assign(std::size_t(bins), false);
    for (int b = 0; b < bins; ++b) {
        std::vector<double> bmeans;
        long n_tot = 0;
        for (const auto* a : accs) {
            for (int k = 0; k < a->batches; ++k) {
                const long c = a->count[std::size_t(k) * a->bins + b];
                if (c == 0) continue;
                bmeans.push_back(a->sum[std::size_t(k) * a->bins + b] / double(c));
                n_tot += c;
            }
        }
        if (n_tot == 0) {
            p.empty[std::size_t(b)] = true;
            continue;
        }
        double mean = 0.0;
        for (double v : bmeans) mean += v;
        mean /= double(bmeans.size());
        double var = 0.0;
        for (double v : bmeans) var += (v - mean) * (v - mean);
        p.ratio[std::size_t(b)] = mean;
        p.ratio_err[std::size_t(b)] =
            bmeans.size() > 1 ? std::sqrt(var / double(bmeans.size() * (bmeans.size() - 1)))
                              : std::abs(mean);
        p.n_samples[std::size_t(b)] = n_tot;
    }
}

/// Common driver: equilibrate without the source, switch it on, settle, then
/// call sample(t_window, state) at fixed intervals of tau_p / samples_per_tau_p.
template <typename SampleFn>
void run_sampling(const PlasmaParams& params, const MaterialContext& ctx,
                  const ScreeningOptions& opt, std::uint64_t stream,
                  const ExternalSource& source, double source_period, SampleFn&& sample) {
    const double tau_p = params.tau_p();
    const double dt = tau_p / opt.samples_per_tau_p;

    if (opt.n_plasma <= 0) {
        PlasmaState empty;
        empty.a_s = 0.01 * params.wigner_seitz;
        const double t_end = opt.window_periods * tau_p;
        for (double t = 0.0; t < t_end; t += dt) {
            empty.t = t;
            sample(t, empty);
        }
        return;
    }

    Rng rng(opt.seed, stream);
    IntegratorConfig cfg;
    cfg.rtol = opt.rtol;
    cfg.h_init = 0.02 * tau_p;
    cfg.h_min = 1e-12 * tau_p;

    PlasmaState plasma = init_plasma(opt.n_plasma, params, ctx, rng);
    PlasmaDynamics dyn(std::move(plasma), cfg, 1);
    dyn.advance_to(opt.prerun_periods * tau_p);
    dyn.source = source;
    if (opt.h_cap_fraction > 0.0 && source_period > 0.0)
        dyn.h_cap = opt.h_cap_fraction * source_period;
    const double t0 = dyn.state().t + opt.settle_periods * tau_p;
    dyn.advance_to(t0);

    const double t_end = t0 + opt.window_periods * tau_p;
    for (double t_next = t0; t_next < t_end; t_next += dt) {
        dyn.advance_to(t_next);
        sample(dyn.state().t - t0, dyn.state());
    }
}

const std::vector<SourceCharge> kNoSources;

}  // namespace

double debye_point_ratio(double r, double lambda) {
    if (r <= 0.0 || lambda <= 0.0)
        throw std::invalid_argument("debye_point_ratio: r, lambda > 0");
    const double u = r / lambda;
    return std::exp(-u) * (1.0 + u);
}

double debye_dipole_potential(const Vec3& p, const Vec3& r_vec, double lambda, double a_s) {
    if (lambda <= 0.0) throw std::invalid_argument("debye_dipole_potential: lambda > 0");
    const double rs = std::sqrt(norm2(r_vec) + a_s * a_s);
    const double g = std::exp(-rs / lambda) * (1.0 / rs + 1.0 / lambda) / (rs * rs);
    return 2.0 * dot(p, r_vec) * g;
}

Vec3 debye_dipole_field(const Vec3& p, const Vec3& r_vec, double lambda, double a_s) {
    if (lambda <= 0.0) throw std::invalid_argument("debye_dipole_field: lambda > 0");
    const double rs = std::sqrt(norm2(r_vec) + a_s * a_s);
    const double ex = std::exp(-rs / lambda);
    const double g = ex * (1.0 / rs + 1.0 / lambda) / (rs * rs);
    // dg/dr = -e^{-r/l} (3/r^4 + 3/(l r^3) + 1/(l^2 r^2))
    const double gp = -ex * (3.0 / (rs * rs * rs * rs) + 3.0 / (lambda * rs * rs * rs) +
                             1.0 / (lambda * lambda * rs * rs));
    // grad Phi = 2 [ p g + (p.r) g' r / r_s ]
    const Vec3 grad = 2.0 * (p * g + r_vec * (dot(p, r_vec) * gp / rs));
    return -grad;
}

double debye_dipole_axis_ratio(double r, double lambda) {
    const double u = r / lambda;
    return std::exp(-u) * (1.0 + u + 0.5 * u * u);
}

ScreeningProfile orbit_screening_profile(const OrbitPair& orbit, const PlasmaParams& params,
                                         const MaterialContext& ctx,
                                         const ScreeningOptions& opt) {
    if (!orbit.prescribed)
        throw std::invalid_argument("orbit_screening_profile: orbit must be prescribed");
    const double a = orbit.semi_major;
    const double xi = orbit.eccentricity;
    const double r_min = a * (1.0 - xi), r_max = a * (1.0 + xi);
    const int bins = opt.bins;
    if (bins < 8) throw std::invalid_argument("orbit_screening_profile: >= 8 bins");

    ScreeningProfile prof;
    prof.reference = "debye-point";
    prof.bin_lo.resize(std::size_t(bins));
    prof.bin_hi.resize(std::size_t(bins));
    prof.bin_center.resize(std::size_t(bins));
    for (int b = 0; b < bins; ++b) {
        prof.bin_lo[std::size_t(b)] = r_min + (r_max - r_min) * b / bins;
        prof.bin_hi[std::size_t(b)] = r_min + (r_max - r_min) * (b + 1) / bins;
        prof.bin_center[std::size_t(b)] =
            0.5 * (prof.bin_lo[std::size_t(b)] + prof.bin_hi[std::size_t(b)]);
    }
    prof.window_time = opt.window_periods * params.tau_p() * opt.realizations;

    const ExternalSource src = prescribed_orbit_source(orbit);
    const double period = 2.0 * kPi / orbit.omega;

    std::vector<ProfileAccumulator> acc(std::size_t(opt.realizations),
                                        ProfileAccumulator(bins, opt.batches));
    parallel_chunks(std::size_t(opt.realizations), opt.workers, [&](std::size_t real) {
        auto& a_r = acc[real];
        const double window = opt.window_periods * params.tau_p();
        std::vector<SourceCharge> ch;
        run_sampling(params, ctx, opt, real, src, period, [&](double tw, const PlasmaState& st) {
            source_charges_at(src, st.t, ch);
            const Vec3 r_e = ch[0].pos, r_h = ch[1].pos;
            const Vec3 d = r_e - r_h;
            const double sep = norm(d);
            if (sep < r_min || sep >= r_max) return;
            const Vec3 u = d * (1.0 / sep);
            // The bound electron's own field at the hole projects to exactly
            // the bare two-body field, so total/bare = 1 + plasma/bare.
            const Vec3 e_plasma = field_at({r_h}, st, kNoSources)[0];
            const double as2 = st.a_s * st.a_s;
            const double e_bare = 2.0 * sep / std::pow(sep * sep + as2, 1.5);
            const int bin = std::min(bins - 1, int((sep - r_min) / (r_max - r_min) * bins));
            const int batch = std::min(opt.batches - 1, int(tw / window * opt.batches));
            a_r.add(batch, bin, 1.0 + dot(e_plasma, u) / e_bare);
        });
    });
    std::vector<const ProfileAccumulator*> all;
    for (const auto& a_r : acc) all.push_back(&a_r);
    finalize_profiles(all, bins, prof);
    return prof;
}

namespace {

ScreeningProfile rotating_pair_profile(const std::vector<double>& separations, double omega,
                                       double ratio_e, double ratio_h, int m_fragments,
                                       const PlasmaParams& params, const MaterialContext& ctx,
                                       const ScreeningOptions& opt) {
    const int nr = int(separations.size());
    ScreeningProfile prof;
    prof.reference = "debye-point";
    prof.bin_center = separations;
    prof.bin_lo = separations;
    prof.bin_hi = separations;
    prof.window_time = opt.window_periods * params.tau_p() * opt.realizations;

    // Each (separation, realization) pair is an independent run.
    const std::size_t n_runs = std::size_t(nr) * opt.realizations;
    std::vector<ProfileAccumulator> acc(n_runs, ProfileAccumulator(1, opt.batches));
    parallel_chunks(n_runs, opt.workers, [&](std::size_t run) {
        const int ir = int(run % std::size_t(nr));
        const double sep = separations[std::size_t(ir)];
        const double r_e = ratio_e * sep, r_h = ratio_h * sep;
        ExternalSource src;
        if (m_fragments <= 1)
            src = CircularOrbitPair{r_e, r_h, omega, 0.0};
        else
            src = RingFragmentSource{m_fragments, r_e, r_h, omega};
        const double period = 2.0 * kPi / omega;
        const double window = opt.window_periods * params.tau_p();
        auto& a_r = acc[run];
        run_sampling(params, ctx, opt, run, src, period, [&](double tw, const PlasmaState& st) {
            // Probe at the hole (positive fragment 0); the plasma's field
            // projected on the hole->electron line, on top of the exact
            // bare-pair unity.
            const double ph = omega * st.t;
            const Vec3 uh{std::cos(ph), std::sin(ph), 0.0};
            const Vec3 hole = uh * r_h;
            const Vec3 u = uh * -1.0;  // toward the diametric electron
            const Vec3 e_plasma = field_at({hole}, st, kNoSources)[0];
            const double as2 = st.a_s * st.a_s;
            const double e_bare = 2.0 * sep / std::pow(sep * sep + as2, 1.5);
            const int batch = std::min(opt.batches - 1, int(tw / window * opt.batches));
            a_r.add(batch, 0, 1.0 + dot(e_plasma, u) / e_bare);
        });
    });

    prof.ratio.assign(std::size_t(nr), 0.0);
    prof.ratio_err.assign(std::size_t(nr), 0.0);
    prof.n_samples.assign(std::size_t(nr), 0);
    prof.empty.assign(std::size_t(nr), false);
    for (int ir = 0; ir < nr; ++ir) {
        std::vector<const ProfileAccumulator*> per_sep;
        for (int real = 0; real < opt.realizations; ++real)
            per_sep.push_back(&acc[std::size_t(real) * nr + ir]);
        ScreeningProfile single;
        finalize_profiles(per_sep, 1, single);
        prof.ratio[std::size_t(ir)] = single.ratio[0];
        prof.ratio_err[std::size_t(ir)] = single.ratio_err[0];
        prof.n_samples[std::size_t(ir)] = single.n_samples[0];
        prof.empty[std::size_t(ir)] = single.empty[0];
    }
    return prof;
}

}  // namespace

ScreeningProfile circular_orbit_profile(bool equal_masses,
                                        const std::vector<double>& separations, double omega,
                                        const PlasmaParams& params, const MaterialContext& ctx,
                                        const ScreeningOptions& opt) {
    if (omega <= 0.0) throw std::invalid_argument("circular_orbit_profile: omega > 0");
    const double re = equal_masses ? 0.5 : ctx.mu / ctx.m_e_eff;
    const double rh = equal_masses ? 0.5 : ctx.mu / ctx.m_h_eff;
    return rotating_pair_profile(separations, omega, re, rh, 1, params, ctx, opt);
}

ScreeningProfile ring_fragment_profile(int m_fragments, bool equal_masses,
                                       const std::vector<double>& separations, double omega,
                                       const PlasmaParams& params, const MaterialContext& ctx,
                                       const ScreeningOptions& opt) {
    if (m_fragments < 1) throw std::invalid_argument("ring_fragment_profile: M >= 1");
    const double re = equal_masses ? 0.5 : ctx.mu / ctx.m_e_eff;
    const double rh = equal_masses ? 0.5 : ctx.mu / ctx.m_h_eff;
    return rotating_pair_profile(separations, omega, re, rh, m_fragments, params, ctx, opt);
}

DipoleScreeningResult oscillating_dipole_profile(double amplitude, double omega,
                                                 const std::vector<double>& radii,
                                                 const PlasmaParams& params,
                                                 const MaterialContext& ctx,
                                                 const ScreeningOptions& opt) {
    if (omega <= 0.0) throw std::invalid_argument("oscillating_dipole_profile: omega > 0");
    const int nr = int(radii.size());
    DipoleScreeningResult out;
    out.amplitude = amplitude;
    out.omega = omega;
    for (auto& h : out.half) {
        h.reference = "debye-dipole";
        h.bin_center = radii;
        h.bin_lo = radii;
        h.bin_hi = radii;
        h.window_time = opt.window_periods * params.tau_p() * opt.realizations;
    }

    const OscillatingDipoleSource dip{{0.0, 0.0, amplitude}, omega, 0.0};
    const ExternalSource src = dip;
    const double period = 2.0 * kPi / omega;

    std::vector<Vec3> points;
    points.reserve(std::size_t(2 * nr));
    for (double r : radii) {
        points.push_back({0.0, 0.0, r});
        points.push_back({0.0, 0.0, -r});
    }

    struct HalfAcc {
        ProfileAccumulator even, odd;
        HalfAcc(int bins, int batches) : even(bins, batches), odd(bins, batches) {}
    };
    std::vector<HalfAcc> acc(std::size_t(opt.realizations), HalfAcc(nr, opt.batches));

    parallel_chunks(std::size_t(opt.realizations), opt.workers, [&](std::size_t real) {
        auto& a_r = acc[real];
        const double window = opt.window_periods * params.tau_p();
        // Positive/negative lobes of cos: boundaries at phase (k + 1/2) pi.
        auto lobe_of = [&](double t) { return long(std::floor((omega * t + 0.5 * kPi) / kPi)); };
        std::vector<double> ez_sum(std::size_t(2 * nr), 0.0);
        std::vector<double> bare_sum(std::size_t(2 * nr), 0.0);
        long cur_lobe = -1;
        long samples_in_lobe = 0;
        double lobe_start_tw = 0.0;
        std::vector<SourceCharge> ch;
        PlasmaState none;
        none.a_s = 0.0;  // set per sample

        auto flush = [&](double /*tw*/) {
            if (cur_lobe < 0 || samples_in_lobe < 3) return;
            const int batch = std::min(opt.batches - 1, int(lobe_start_tw / window * opt.batches));
            auto& tgt = (cur_lobe % 2 == 0) ? a_r.even : a_r.odd;
            for (int ir = 0; ir < nr; ++ir) {
                // E_z of a z-dipole is even under z -> -z; average the two
                // probe points.
                const double meas = ez_sum[std::size_t(2 * ir)] + ez_sum[std::size_t(2 * ir + 1)];
                const double bare =
                    bare_sum[std::size_t(2 * ir)] + bare_sum[std::size_t(2 * ir + 1)];
                if (bare != 0.0) tgt.add(batch, ir, meas / bare);
            }
        };

        run_sampling(params, ctx, opt, real, src, period, [&](double tw, const PlasmaState& st) {
            const long lobe = lobe_of(st.t);
            if (lobe != cur_lobe) {
                flush(tw);
                cur_lobe = lobe;
                samples_in_lobe = 0;
                lobe_start_tw = tw;
                std::fill(ez_sum.begin(), ez_sum.end(), 0.0);
                std::fill(bare_sum.begin(), bare_sum.end(), 0.0);
            }
            source_charges_at(src, st.t, ch);
            const auto e_tot = field_at(points, st, ch);
            none.a_s = st.a_s;
            const auto e_bare = field_at(points, none, ch);
            for (std::size_t k = 0; k < points.size(); ++k) {
                ez_sum[k] += e_tot[k].z;
                bare_sum[k] += e_bare[k].z;
            }
            ++samples_in_lobe;
        });
        flush(window);
    });

    for (int parity = 0; parity < 2; ++parity) {
        std::vector<const ProfileAccumulator*> all;
        for (const auto& a_r : acc) all.push_back(parity == 0 ? &a_r.even : &a_r.odd);
        finalize_profiles(all, nr, out.half[parity]);
    }
    return out;
}

SizeDebyeRatio size_debye_ratio(int n, const PlasmaParams& params, const MaterialContext& ctx) {
    const RydbergScales sc = rydberg_scales(n, ctx);
    SizeDebyeRatio r;
    r.printed = kSizeDebyePrintedConstant * std::sqrt(params.gamma) *
                std::pow(params.omega_p / sc.omega, 2.0 / 3.0);
    r.direct = sc.r_exp / params.debye_length;
    return r;
}

}  // namespace rydsim
