#pragma once

#include <cstddef>
#include <vector>

namespace rydsim {

/// Weighted least-squares straight line y = a + b x.
struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double intercept_err = 0.0;
    double slope_err = 0.0;
    double chi2 = 0.0;
    std::size_t n_points = 0;
};

/// sigmas may be empty (unit weights). Requires >= 2 points.
LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys,
                 const std::vector<double>& sigmas = {});

/// Power law y = prefactor * x^exponent fitted by weighted least squares on
/// (ln x, ln y). y_errs, if given, are absolute errors on y.
struct PowerLawFit {
    double exponent = 0.0;
    double prefactor = 0.0;
    double exponent_err = 0.0;
    double log_prefactor_err = 0.0;
    double x_min = 0.0, x_max = 0.0;  // fit window
    double chi2 = 0.0;
    std::size_t n_points = 0;

    double eval(double x) const;
};

PowerLawFit fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys,
                          const std::vector<double>& y_errs = {});

/// Mean / standard error of a sample.
struct MeanErr {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
};
MeanErr mean_stderr(const std::vector<double>& xs);

/// Streaming mean/variance accumulator (Welford).
struct Welford {
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t n = 0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / double(n);
        m2 += d * (x - mean);
    }
    void merge(const Welford& o) {
        if (o.n == 0) return;
        if (n == 0) { *this = o; return; }
        const double d = o.mean - mean;
        const double tot = double(n + o.n);
        mean += d * double(o.n) / tot;
        m2 += o.m2 + d * d * double(n) * double(o.n) / tot;
        n += o.n;
    }
    double variance() const { return n > 1 ? m2 / double(n - 1) : 0.0; }
    double stderr_() const;
};

}  // namespace rydsim
