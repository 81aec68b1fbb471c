#include "rydsim/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rydsim {

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys,
                 const std::vector<double>& sigmas) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("fit_line: need >= 2 matching points");
    if (!sigmas.empty() && sigmas.size() != xs.size())
        throw std::invalid_argument("fit_line: sigma size mismatch");

    double S = 0, Sx = 0, Sy = 0, Sxx = 0, Sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double w = 1.0;
        if (!sigmas.empty()) {
            if (sigmas[i] <= 0.0) throw std::invalid_argument("fit_line: sigma <= 0");
            w = 1.0 / (sigmas[i] * sigmas[i]);
        }
        S += w;
        Sx += w * xs[i];
        Sy += w * ys[i];
        Sxx += w * xs[i] * xs[i];
        Sxy += w * xs[i] * ys[i];
    }
    const double delta = S * Sxx - Sx * Sx;
    if (delta <= 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");

    LineFit f;
    f.n_points = xs.size();
    f.intercept = (Sxx * Sy - Sx * Sxy) / delta;
    f.slope = (S * Sxy - Sx * Sy) / delta;
    f.intercept_err = std::sqrt(Sxx / delta);
    f.slope_err = std::sqrt(S / delta);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (f.intercept + f.slope * xs[i]);
        const double s = sigmas.empty() ? 1.0 : sigmas[i];
        f.chi2 += (r / s) * (r / s);
    }
    // Without per-point errors, scale parameter errors by the residual rms.
    if (sigmas.empty() && xs.size() > 2) {
        const double s2 = f.chi2 / double(xs.size() - 2);
        f.intercept_err *= std::sqrt(s2);
        f.slope_err *= std::sqrt(s2);
    }
    return f;
}

double PowerLawFit::eval(double x) const { return prefactor * std::pow(x, exponent); }

PowerLawFit fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys,
                          const std::vector<double>& y_errs) {
    if (xs.size() != ys.size() || xs.size() < 3)
        throw std::invalid_argument("fit_power_law: need >= 3 matching points");
    std::vector<double> lx(xs.size()), ly(xs.size()), ls;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] <= 0.0 || ys[i] <= 0.0)
            throw std::invalid_argument("fit_power_law: data must be positive");
        lx[i] = std::log(xs[i]);
        ly[i] = std::log(ys[i]);
    }
    if (!y_errs.empty()) {
        if (y_errs.size() != ys.size())
            throw std::invalid_argument("fit_power_law: y_errs size mismatch");
        ls.resize(ys.size());
        for (std::size_t i = 0; i < ys.size(); ++i) {
            if (y_errs[i] <= 0.0) throw std::invalid_argument("fit_power_law: y_err <= 0");
            ls[i] = y_errs[i] / ys[i];
        }
    }
    const LineFit lf = fit_line(lx, ly, ls);
    PowerLawFit f;
    f.exponent = lf.slope;
    f.exponent_err = lf.slope_err;
    f.prefactor = std::exp(lf.intercept);
    f.log_prefactor_err = lf.intercept_err;
    f.chi2 = lf.chi2;
    f.n_points = xs.size();
    f.x_min = *std::min_element(xs.begin(), xs.end());
    f.x_max = *std::max_element(xs.begin(), xs.end());
    return f;
}

MeanErr mean_stderr(const std::vector<double>& xs) {
    Welford w;
    for (double x : xs) w.add(x);
    return {w.mean, w.stderr_(), w.n};
}

double Welford::stderr_() const {
    return n > 1 ? std::sqrt(variance() / double(n)) : 0.0;
}

}  // namespace rydsim
