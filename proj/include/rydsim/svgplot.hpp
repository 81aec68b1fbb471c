#pragma once

#include <string>
#include <vector>

namespace rydsim {

/// Minimal static SVG line/scatter plots for run outputs. Plotting failures
/// must never fail a run; callers wrap emit() in try/catch.
class SvgPlot {
  public:
    SvgPlot(std::string title, std::string xlabel, std::string ylabel);

    void set_log_x(bool v) { log_x_ = v; }
    void set_log_y(bool v) { log_y_ = v; }

    void add_line(const std::vector<double>& xs, const std::vector<double>& ys,
                  const std::string& label, const std::string& color, bool dashed = false);
    void add_points(const std::vector<double>& xs, const std::vector<double>& ys,
                    const std::vector<double>& yerr, const std::string& label,
                    const std::string& color);

    void write(const std::string& path) const;

  private:
    struct Series {
        std::vector<double> xs, ys, yerr;
        std::string label, color;
        bool dashed = false;
        bool points = false;
    };
    std::string title_, xlabel_, ylabel_;
    bool log_x_ = false, log_y_ = false;
    std::vector<Series> series_;
};

}  // namespace rydsim
