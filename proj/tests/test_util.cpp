#include <cmath>

#include "doctest.h"
#include "rydsim/config.hpp"
#include "rydsim/fitting.hpp"
#include "rydsim/rng.hpp"

using namespace rydsim;

TEST_SUITE_BEGIN("unit");

TEST_CASE("rng streams are reproducible and independent") {
    Rng a(123, 5), b(123, 5), c(123, 6);
    bool same = true, differ = false;
    for (int i = 0; i < 64; ++i) {
        const auto va = a.next(), vb = b.next(), vc = c.next();
        same = same && (va == vb);
        differ = differ || (va != vc);
    }
    CHECK(same);
    CHECK(differ);
}

TEST_CASE("rng normal moments") {
    Rng rng(99, 0);
    Welford w;
    for (int i = 0; i < 200000; ++i) w.add(rng.normal());
    CHECK(std::abs(w.mean) < 4.0 / std::sqrt(200000.0));
    CHECK(w.variance() == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("rng in_sphere stays inside") {
    Rng rng(1, 2);
    for (int i = 0; i < 1000; ++i) CHECK(norm(rng.in_sphere(3.0)) <= 3.0);
}

TEST_CASE("power-law fit recovers exact model") {
    std::vector<double> xs, ys;
    for (double x : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        xs.push_back(x);
        ys.push_back(7.0 * std::pow(x, -2.5));
    }
    const PowerLawFit f = fit_power_law(xs, ys);
    CHECK(f.exponent == doctest::Approx(-2.5).epsilon(1e-12));
    CHECK(f.prefactor == doctest::Approx(7.0).epsilon(1e-12));
    CHECK(f.exponent_err < 1e-10);
}

TEST_CASE("power-law fit: constant data has zero exponent within stderr") {
    std::vector<double> xs = {1.0, 2.0, 3.0, 4.0, 5.0};
    std::vector<double> ys = {2.0, 2.02, 1.99, 2.01, 1.98};
    const PowerLawFit f = fit_power_law(xs, ys);
    CHECK(std::abs(f.exponent) < 3.0 * std::max(f.exponent_err, 1e-3));
}

TEST_CASE("power-law fit rejects bad input") {
    CHECK_THROWS_AS(fit_power_law({1.0, 2.0}, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(fit_power_law({1.0, -2.0, 3.0}, {1.0, 2.0, 3.0}), std::invalid_argument);
    CHECK_THROWS_AS(fit_power_law({1.0, 2.0, 3.0}, {1.0, 0.0, 3.0}), std::invalid_argument);
}

TEST_CASE("weighted line fit uses the weights") {
    // Outlier with a huge sigma should not move the fit.
    std::vector<double> xs = {0.0, 1.0, 2.0, 3.0};
    std::vector<double> ys = {1.0, 3.0, 5.0, 100.0};
    std::vector<double> sig = {0.01, 0.01, 0.01, 1e6};
    const LineFit f = fit_line(xs, ys, sig);
    CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(f.intercept == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("welford merge matches bulk accumulation") {
    Rng rng(5, 1);
    Welford all, a, b;
    for (int i = 0; i < 1000; ++i) {
        const double v = rng.normal() * 3.0 + 1.0;
        all.add(v);
        (i % 2 ? a : b).add(v);
    }
    Welford merged = a;
    merged.merge(b);
    CHECK(merged.mean == doctest::Approx(all.mean).epsilon(1e-12));
    CHECK(merged.variance() == doctest::Approx(all.variance()).epsilon(1e-12));
}

TEST_CASE("config parsing") {
    const auto cfg = KeyValueConfig::parse_string(
        "# comment\n"
        "plasma.rho = 0.5e17\n"
        "exciton.n_list = 4, 6, 8  # trailing comment\n"
        "output.plots = false\n"
        "name = lifetime\n");
    CHECK(cfg.get_double("plasma.rho", 0.0) == doctest::Approx(0.5e17));
    CHECK(cfg.get_double_list("exciton.n_list", {}) == std::vector<double>{4.0, 6.0, 8.0});
    CHECK_FALSE(cfg.get_bool("output.plots", true));
    CHECK(cfg.get_string("name", "") == "lifetime");
    CHECK(cfg.get_long("missing", 7) == 7);
    CHECK_THROWS_AS(cfg.get_double("name", 0.0), ConfigError);
    CHECK_THROWS_AS(KeyValueConfig::parse_string("novalue\n"), ConfigError);
}

TEST_CASE("config hash is stable and order-independent") {
    const auto a = KeyValueConfig::parse_string("x = 1\ny = 2\n");
    const auto b = KeyValueConfig::parse_string("y = 2\nx = 1\n");
    const auto c = KeyValueConfig::parse_string("x = 1\ny = 3\n");
    CHECK(a.hash() == b.hash());
    CHECK(a.hash() != c.hash());
}

TEST_SUITE_END();
