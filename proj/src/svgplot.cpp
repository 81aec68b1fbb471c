#include "rydsim/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace rydsim {

SvgPlot::SvgPlot(std::string title, std::string xlabel, std::string ylabel)
    : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

void SvgPlot::add_line(const std::vector<double>& xs, const std::vector<double>& ys,
                       const std::string& label, const std::string& color, bool dashed) {
    series_.push_back({xs, ys, {}, label, color, dashed, false});
}

void SvgPlot::add_points(const std::vector<double>& xs, const std::vector<double>& ys,
                         const std::vector<double>& yerr, const std::string& label,
                         const std::string& color) {
    series_.push_back({xs, ys, yerr, label, color, false, true});
}

void SvgPlot::write(const std::string& path) const {
    const double width = 720, height = 480;
    const double ml = 70, mr = 20, mt = 40, mb = 55;

    double xmin = std::numeric_limits<double>::max(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    auto usable = [&](double v, bool log_axis) {
        return std::isfinite(v) && (!log_axis || v > 0.0);
    };
    for (const auto& s : series_) {
        for (std::size_t i = 0; i < s.xs.size(); ++i) {
            if (!usable(s.xs[i], log_x_) || !usable(s.ys[i], log_y_)) continue;
            xmin = std::min(xmin, s.xs[i]);
            xmax = std::max(xmax, s.xs[i]);
            ymin = std::min(ymin, s.ys[i]);
            ymax = std::max(ymax, s.ys[i]);
        }
    }
    if (!(xmin < xmax)) { xmin -= 1.0; xmax = xmin + 2.0; }
    if (!(ymin < ymax)) { ymin -= 1.0; ymax = ymin + 2.0; }
    auto tx = [&](double v) {
        const double a = log_x_ ? std::log10(v) : v;
        const double lo = log_x_ ? std::log10(xmin) : xmin;
        const double hi = log_x_ ? std::log10(xmax) : xmax;
        return ml + (a - lo) / (hi - lo) * (width - ml - mr);
    };
    auto ty = [&](double v) {
        const double a = log_y_ ? std::log10(v) : v;
        const double lo = log_y_ ? std::log10(ymin) : ymin;
        const double hi = log_y_ ? std::log10(ymax) : ymax;
        return height - mb - (a - lo) / (hi - lo) * (height - mt - mb);
    };

    std::ofstream out(path);
    if (!out) throw std::runtime_error("SvgPlot: cannot write " + path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "' viewBox='0 0 " << width << " " << height << "'>\n"
        << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << width / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title_
        << "</text>\n";
    out << "<text x='" << width / 2 << "' y='" << height - 12
        << "' text-anchor='middle' font-size='13'>" << xlabel_ << "</text>\n";
    out << "<text x='16' y='" << height / 2
        << "' text-anchor='middle' font-size='13' transform='rotate(-90 16 " << height / 2
        << ")'>" << ylabel_ << "</text>\n";
    out << "<rect x='" << ml << "' y='" << mt << "' width='" << width - ml - mr << "' height='"
        << height - mt - mb << "' fill='none' stroke='black'/>\n";

    // Axis ticks (5 per axis).
    char buf[64];
    for (int k = 0; k <= 4; ++k) {
        const double fx = log_x_ ? std::pow(10.0, std::log10(xmin) +
                                                      (std::log10(xmax) - std::log10(xmin)) * k / 4.0)
                                 : xmin + (xmax - xmin) * k / 4.0;
        const double fy = log_y_ ? std::pow(10.0, std::log10(ymin) +
                                                      (std::log10(ymax) - std::log10(ymin)) * k / 4.0)
                                 : ymin + (ymax - ymin) * k / 4.0;
        std::snprintf(buf, sizeof buf, "%.3g", fx);
        out << "<text x='" << tx(fx) << "' y='" << height - mb + 18
            << "' text-anchor='middle' font-size='11'>" << buf << "</text>\n";
        std::snprintf(buf, sizeof buf, "%.3g", fy);
        out << "<text x='" << ml - 8 << "' y='" << ty(fy) + 4
            << "' text-anchor='end' font-size='11'>" << buf << "</text>\n";
    }

    double legend_y = mt + 16;
    for (const auto& s : series_) {
        if (s.points) {
            for (std::size_t i = 0; i < s.xs.size(); ++i) {
                if (!usable(s.xs[i], log_x_) || !usable(s.ys[i], log_y_)) continue;
                const double cx = tx(s.xs[i]), cy = ty(s.ys[i]);
                out << "<circle cx='" << cx << "' cy='" << cy << "' r='3' fill='" << s.color
                    << "'/>\n";
                if (!s.yerr.empty() && s.yerr[i] > 0.0) {
                    double ylo = s.ys[i] - s.yerr[i], yhi = s.ys[i] + s.yerr[i];
                    if (log_y_) ylo = std::max(ylo, ymin * 0.5);
                    out << "<line x1='" << cx << "' y1='" << ty(std::max(ylo, log_y_ ? 1e-300 : -1e300))
                        << "' x2='" << cx << "' y2='" << ty(yhi) << "' stroke='" << s.color
                        << "' stroke-width='1'/>\n";
                }
            }
        } else {
            out << "<polyline fill='none' stroke='" << s.color << "' stroke-width='1.5'";
            if (s.dashed) out << " stroke-dasharray='6 4'";
            out << " points='";
            for (std::size_t i = 0; i < s.xs.size(); ++i) {
                if (!usable(s.xs[i], log_x_) || !usable(s.ys[i], log_y_)) continue;
                out << tx(s.xs[i]) << "," << ty(s.ys[i]) << " ";
            }
            out << "'/>\n";
        }
        out << "<text x='" << width - mr - 8 << "' y='" << legend_y
            << "' text-anchor='end' font-size='12' fill='" << s.color << "'>" << s.label
            << "</text>\n";
        legend_y += 16;
    }
    out << "</svg>\n";
}

}  // namespace rydsim
