#include <cmath>
#include <numbers>

#include "doctest.h"
#include "rydsim/integrator.hpp"

using namespace rydsim;

TEST_SUITE_BEGIN("unit");

namespace {
void harmonic(double, const std::vector<double>& y, std::vector<double>& d) {
    d.resize(2);
    d[0] = y[1];
    d[1] = -y[0];
}
}  // namespace

TEST_CASE("harmonic oscillator: energy drift < 1e-6 over 100 periods at rtol 1e-8") {
    CashKarp integ(2, harmonic);
    IntegratorConfig cfg;
    cfg.rtol = 1e-8;
    cfg.h_init = 0.1;
    cfg.h_min = 1e-14;
    std::vector<double> y = {1.0, 0.0};
    double t = 0.0;
    integ.integrate_to(t, y, 100.0 * 2.0 * std::numbers::pi, cfg);
    const double e = 0.5 * (y[0] * y[0] + y[1] * y[1]);
    CHECK(std::abs(e - 0.5) / 0.5 < 1e-6);
}

TEST_CASE("rejected steps are halved (step-control contract)") {
    CashKarp integ(2, harmonic);
    IntegratorConfig cfg;
    cfg.rtol = 1e-10;
    cfg.h_init = 3.0;  // far too large; forces rejections
    cfg.h_min = 1e-14;
    std::vector<double> y = {1.0, 0.0};
    double t = 0.0;
    const double h_taken = integ.step(t, y, cfg);
    REQUIRE(integ.n_rejected >= 1);
    CHECK(h_taken == doctest::Approx(3.0 * std::pow(0.5, double(integ.n_rejected))).epsilon(1e-12));
}

TEST_CASE("step underflow raises IntegrationError with diagnostics") {
    // A step-function derivative keeps the embedded error estimate O(h) at
    // any h, so the controller halves until it hits h_min.
    CashKarp integ(1, [](double t, const std::vector<double>&, std::vector<double>& d) {
        d.assign(1, t < 0.5 ? 0.0 : 1e3);
    });
    IntegratorConfig cfg;
    cfg.rtol = 1e-14;
    cfg.h_init = 0.4999;
    cfg.h_min = 1e-6;
    cfg.max_rejects = 1000;
    std::vector<double> y = {0.0};
    double t = 0.45;
    bool threw = false;
    try {
        for (int i = 0; i < 100; ++i) integ.step(t, y, cfg);
    } catch (const IntegrationError& e) {
        threw = true;
        CHECK(e.h <= 1e-6 * 2.0);
        CHECK(e.err_ratio > 1.0);
    }
    CHECK(threw);
}

TEST_CASE("characteristic error scale dominates small components") {
    // With yscale set, a component's own small magnitude must not force
    // tiny steps.
    CashKarp integ(2, harmonic);
    integ.yscale = {100.0, 100.0};
    IntegratorConfig cfg;
    cfg.rtol = 1e-6;
    cfg.h_init = 0.01;
    cfg.h_min = 1e-14;
    std::vector<double> y = {1e-9, 0.0};
    double t = 0.0;
    integ.integrate_to(t, y, 10.0, cfg);
    CHECK(integ.n_accepted < 100);  // ~1.6 rad per step allowed at this scale
}

TEST_SUITE_END();
