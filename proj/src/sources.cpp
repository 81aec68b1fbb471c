#include "rydsim/sources.hpp"

#include <numbers>
#include <stdexcept>

namespace rydsim {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double solve_kepler(double mean_anomaly, double ecc) {
    // Reduce to [-pi, pi] for a well-conditioned start.
    double m = std::fmod(mean_anomaly, kTwoPi);
    if (m > std::numbers::pi) m -= kTwoPi;
    if (m < -std::numbers::pi) m += kTwoPi;

    // Danby-style initial guess, then Newton. Converges for ecc < 1.
    double e_anom = m + 0.85 * ecc * (m >= 0.0 ? 1.0 : -1.0);
    for (int it = 0; it < 50; ++it) {
        const double f = e_anom - ecc * std::sin(e_anom) - m;
        const double fp = 1.0 - ecc * std::cos(e_anom);
        const double d = f / fp;
        e_anom -= d;
        if (std::abs(d) < 1e-14) break;
    }
    return e_anom;
}

Vec3 prescribed_relative_position(const PrescribedOrbit& orbit, double t) {
    const double omega = orbit.omega_orbit * orbit.freq_scale;
    const double mean = orbit.phase0 + omega * t;
    const double ea = solve_kepler(mean, orbit.eccentricity);
    const double a = orbit.n_semi_major;
    const double x = a * (std::cos(ea) - orbit.eccentricity);
    const double y = a * std::sqrt(1.0 - orbit.eccentricity * orbit.eccentricity) * std::sin(ea);
    const double rot = orbit.omega_prec * t;
    const double c = std::cos(rot), s = std::sin(rot);
    return {c * x - s * y, s * x + c * y, 0.0};
}

void source_charges_at(const ExternalSource& src, double t, std::vector<SourceCharge>& out) {
    out.clear();
    if (std::holds_alternative<std::monostate>(src)) return;

    if (const auto* f = std::get_if<FixedChargeSource>(&src)) {
        out = f->charges;
        return;
    }
    if (const auto* o = std::get_if<PrescribedOrbit>(&src)) {
        const Vec3 r = prescribed_relative_position(*o, t);
        out.push_back({r * -o->mass_ratio_e, -1.0});  // electron
        out.push_back({r * o->mass_ratio_h, +1.0});   // hole
        return;
    }
    if (const auto* c = std::get_if<CircularOrbitPair>(&src)) {
        const double ph = c->phase0 + c->omega * t;
        const Vec3 u{std::cos(ph), std::sin(ph), 0.0};
        out.push_back({u * -c->r_e, -1.0});
        out.push_back({u * c->r_h, +1.0});
        return;
    }
    if (const auto* r = std::get_if<RingFragmentSource>(&src)) {
        if (r->fragments < 1) throw std::invalid_argument("RingFragmentSource: M >= 1");
        const double q = 1.0 / double(r->fragments);
        for (int k = 0; k < r->fragments; ++k) {
            const double ph = r->omega * t + kTwoPi * double(k) / double(r->fragments);
            const Vec3 u{std::cos(ph), std::sin(ph), 0.0};
            out.push_back({u * -r->r_e, -q});
            out.push_back({u * r->r_h, +q});
        }
        return;
    }
    if (const auto* d = std::get_if<OscillatingDipoleSource>(&src)) {
        const double c = std::cos(d->omega * t + d->phase);
        out.push_back({d->amplitude * (0.5 * c), +1.0});
        out.push_back({d->amplitude * (-0.5 * c), -1.0});
        return;
    }
}

}  // namespace rydsim
