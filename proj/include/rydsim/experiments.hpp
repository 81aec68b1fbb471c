#pragma once

#include <map>
#include <string>
#include <vector>

#include "rydsim/config.hpp"
#include "rydsim/fitting.hpp"
#include "rydsim/material.hpp"

namespace rydsim {

/// Column-oriented result table with a metadata comment block. Every
/// measured column has a paired <name>_err column; _err = 0 marks an exact
/// (non-statistical) value.
struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> meta;

    void add_row(const std::vector<double>& row);
    void write_csv(const std::string& path) const;
};

struct ExperimentResult {
    int exit_code = 0;  // 0 ok, 2 config, 3 numerical, 4 acceptance-check
    std::string summary;
    std::map<std::string, double> metrics;
};

/// Known experiment ids.
std::vector<std::string> experiment_ids();

/// Runs one experiment: writes results.csv, summary.txt and plots/*.svg
/// under out_dir. Never throws for config/numerical problems; the exit code
/// carries the outcome.
ExperimentResult run_experiment(const std::string& id, const KeyValueConfig& cfg,
                                const std::string& out_dir);

/// Evaluates each per-n fitted power law tau(rho) at the requested density
/// and fits tau(n) across n (Fig. 3-style vertical cut).
struct VerticalCut {
    std::vector<int> ns;
    std::vector<double> taus;
    std::vector<double> tau_errs;
    bool extrapolated = false;  // rho outside some fit window
    PowerLawFit n_fit;          // only valid when ns.size() >= 3
    bool has_fit = false;
};
VerticalCut vertical_cut(const std::map<int, PowerLawFit>& fits_per_n, double rho);

/// Boundary curves of the density-temperature diagram for level n:
/// observable limit rho_cr(T), screening limit (<r>_n/lambda = 0.5) and the
/// Gamma = 0.2 contour. Densities SI, temperatures kelvin.
ResultTable regime_diagram(int n, const std::vector<double>& temperatures_k,
                           double rho_cr_ref_si, double t_ref_k, const MaterialContext& ctx);

/// Material context from config overrides (material.m_e_eff, material.m_h_eff,
/// material.epsilon_rel).
MaterialContext material_from_config(const KeyValueConfig& cfg);

}  // namespace rydsim
