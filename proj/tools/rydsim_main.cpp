// Command-line front end: one subcommand per experiment.
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "rydsim/config.hpp"
#include "rydsim/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Electron-hole plasma / Rydberg exciton simulation toolkit"};
    app.require_subcommand(1);

    struct Common {
        std::string config_path;
        std::string out_dir = "out";
        long seed = -1;
        long trajectories = -1;
        long workers = -1;
        bool no_plots = false;
    };

    std::map<std::string, Common*> opts;
    for (const std::string& id : rydsim::experiment_ids()) {
        auto* sub = app.add_subcommand(id);
        auto* c = new Common;
        opts[id] = c;
        sub->add_option("--config", c->config_path, "key = value run description");
        sub->add_option("--seed", c->seed, "master RNG seed");
        sub->add_option("--out-dir", c->out_dir, "output directory");
        sub->add_option("--trajectories", c->trajectories, "Monte Carlo trajectories");
        sub->add_option("--workers", c->workers, "worker threads");
        sub->add_flag("--no-plots", c->no_plots, "skip SVG outputs");
    }

    CLI11_PARSE(app, argc, argv);

    const std::string id = app.get_subcommands().front()->get_name();
    const Common& c = *opts[id];

    rydsim::KeyValueConfig cfg;
    if (!c.config_path.empty()) {
        try {
            cfg = rydsim::KeyValueConfig::parse_file(c.config_path);
        } catch (const std::exception& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            return 2;
        }
    }
    if (c.seed >= 0) cfg.set("ensemble.seed", std::to_string(c.seed));
    if (c.trajectories > 0) cfg.set("ensemble.n_traj", std::to_string(c.trajectories));
    if (c.workers > 0) cfg.set("ensemble.workers", std::to_string(c.workers));
    if (c.no_plots) cfg.set("output.plots", "false");

    const rydsim::ExperimentResult res = rydsim::run_experiment(id, cfg, c.out_dir);
    std::printf("%s\n", res.summary.c_str());
    for (const auto& [k, v] : res.metrics) std::printf("  %s = %.8g\n", k, v);
    if (res.exit_code != 0) std::fprintf(stderr, "exit code %d\n", res.exit_code);
    return res.exit_code;
}
