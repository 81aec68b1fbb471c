#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rydsim {

struct IntegratorConfig {
    double rtol = 1e-8;
    double atol = 0.0;
    double h_init = 1.0;
    double h_min = 1e-12;
    double h_max = 1e30;
    int max_rejects = 64;  // consecutive rejections before giving up

    void validate() const {
        if (rtol <= 0.0 && atol <= 0.0)
            throw std::invalid_argument("IntegratorConfig: need a positive tolerance");
        if (h_min <= 0.0 || h_max <= h_min)
            throw std::invalid_argument("IntegratorConfig: need 0 < h_min < h_max");
    }
};

struct IntegrationError : std::runtime_error {
    double t = 0.0;
    double h = 0.0;
    double err_ratio = 0.0;
    IntegrationError(const std::string& msg, double t_, double h_, double err)
        : std::runtime_error(msg), t(t_), h(h_), err_ratio(err) {}
};

/// Embedded Cash-Karp 4(5) pair with standard safety-factor step control
/// ("RKQS"): the 5th-order solution is advanced, the 4th-order embedded
/// solution provides the error estimate. A rejected step is retried at half
/// the size; accepted steps grow as 0.9 err^(-1/5), capped at 5x.
///
/// The error is measured per component against
///     scale_i = atol + rtol * max(|y_i|, yscale_i)
/// where yscale (optional) supplies characteristic magnitudes. For N-body
/// plasma runs yscale is set to the mean interparticle spacing / thermal
/// velocity, so that transient close encounters are resolved relative to
/// physically meaningful scales instead of their own momentary coordinates.
class CashKarp {
  public:
    using Deriv = std::function<void(double t, const std::vector<double>& y,
                                     std::vector<double>& dydt)>;

    CashKarp(std::size_t dim, Deriv deriv) : deriv_(std::move(deriv)) { resize(dim); }

    std::vector<double> yscale;  // optional, same size as y

    /// One adaptive step from (t, y); y is advanced in place. Returns the
    /// step actually taken; `h_next` is updated for the following call.
    double step(double& t, std::vector<double>& y, const IntegratorConfig& cfg) {
        if (y.size() != dim_) resize(y.size());
        double h = h_next > 0.0 ? h_next : cfg.h_init;
        if (h > cfg.h_max) h = cfg.h_max;
        deriv_(t, y, k1_);
        int rejects = 0;
        while (true) {
            attempt(t, y, h);
            const double err = error_ratio(y, h, cfg);
            if (err <= 1.0) {
                t += h;
                y.swap(ytmp_);
                const double grow = err > 1e-10 ? 0.9 * std::pow(err, -0.2) : 5.0;
                h_next = std::min(h * std::min(grow, 5.0), cfg.h_max);
                ++n_accepted;
                return h;
            }
            ++n_rejected;
            if (++rejects > cfg.max_rejects)
                throw IntegrationError("CashKarp: too many rejected steps", t, h, err);
            h *= 0.5;
            if (h < cfg.h_min)
                throw IntegrationError("CashKarp: step underflow", t, h, err);
        }
    }

    /// Integrate from t to t_end (exact endpoint landing).
    void integrate_to(double& t, std::vector<double>& y, double t_end,
                      const IntegratorConfig& cfg) {
        while (t < t_end) {
            const double remaining = t_end - t;
            if (h_next <= 0.0 || h_next > remaining) h_next = remaining;
            step(t, y, cfg);
        }
    }

    double h_next = 0.0;
    long n_accepted = 0;
    long n_rejected = 0;

  private:
    void resize(std::size_t dim) {
        dim_ = dim;
        k1_.resize(dim); k2_.resize(dim); k3_.resize(dim);
        k4_.resize(dim); k5_.resize(dim); k6_.resize(dim);
        ytmp_.resize(dim); yerr_.resize(dim); work_.resize(dim);
    }

    // Cash-Karp tableau (Numerical-Recipes coefficients).
    void attempt(double t, const std::vector<double>& y, double h) {
        const std::size_t n = dim_;
        auto& w = work_;
        for (std::size_t i = 0; i < n; ++i) w[i] = y[i] + h * (0.2 * k1_[i]);
        deriv_(t + 0.2 * h, w, k2_);
        for (std::size_t i = 0; i < n; ++i)
            w[i] = y[i] + h * (3.0 / 40.0 * k1_[i] + 9.0 / 40.0 * k2_[i]);
        deriv_(t + 0.3 * h, w, k3_);
        for (std::size_t i = 0; i < n; ++i)
            w[i] = y[i] + h * (0.3 * k1_[i] - 0.9 * k2_[i] + 1.2 * k3_[i]);
        deriv_(t + 0.6 * h, w, k4_);
        for (std::size_t i = 0; i < n; ++i)
            w[i] = y[i] + h * (-11.0 / 54.0 * k1_[i] + 2.5 * k2_[i] - 70.0 / 27.0 * k3_[i] +
                               35.0 / 27.0 * k4_[i]);
        deriv_(t + h, w, k5_);
        for (std::size_t i = 0; i < n; ++i)
            w[i] = y[i] + h * (1631.0 / 55296.0 * k1_[i] + 175.0 / 512.0 * k2_[i] +
                               575.0 / 13824.0 * k3_[i] + 44275.0 / 110592.0 * k4_[i] +
                               253.0 / 4096.0 * k5_[i]);
        deriv_(t + 0.875 * h, w, k6_);

        static constexpr double c1 = 37.0 / 378.0, c3 = 250.0 / 621.0, c4 = 125.0 / 594.0,
                                c6 = 512.0 / 1771.0;
        static constexpr double d1 = c1 - 2825.0 / 27648.0, d3 = c3 - 18575.0 / 48384.0,
                                d4 = c4 - 13525.0 / 55296.0, d5 = -277.0 / 14336.0,
                                d6 = c6 - 0.25;
        for (std::size_t i = 0; i < n; ++i) {
            ytmp_[i] = y[i] + h * (c1 * k1_[i] + c3 * k3_[i] + c4 * k4_[i] + c6 * k6_[i]);
            yerr_[i] = h * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] + d6 * k6_[i]);
        }
    }

    double error_ratio(const std::vector<double>& y, double h, const IntegratorConfig& cfg) const {
        double worst = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            double mag = std::abs(y[i]);
            if (!yscale.empty() && yscale[i] > mag) mag = yscale[i];
            const double scale = cfg.atol + cfg.rtol * (mag + std::abs(h * k1_[i]));
            if (scale <= 0.0) continue;
            const double r = std::abs(yerr_[i]) / scale;
            if (r > worst) worst = r;
        }
        return worst;
    }

    Deriv deriv_;
    std::size_t dim_ = 0;
    std::vector<double> k1_, k2_, k3_, k4_, k5_, k6_, ytmp_, yerr_, work_;
};

}  // namespace rydsim
