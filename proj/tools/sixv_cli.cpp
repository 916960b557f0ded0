#include <iostream>

#include "CLI11.hpp"
#include "sixv/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"stochastic six-vertex experiment runner"};

    std::string experiment, config_path, out_path, format;
    uint64_t seed = 0;
    int64_t replicas = 0;
    std::string sizes_arg;
    bool no_timing = false;

    app.add_option("--experiment,-e", experiment, "experiment id (E1..E8)");
    app.add_option("--config,-c", config_path, "config file (key = value, optional [sections])");
    app.add_option("--seed,-s", seed, "seed override");
    app.add_option("--replicas,-r", replicas, "replica count override");
    app.add_option("--sizes", sizes_arg, "size list override, e.g. \"64 128 256\"");
    app.add_option("--out,-o", out_path, "output file (default: stdout)");
    app.add_option("--format,-f", format, "csv or jsonl");
    app.add_flag("--no-timing", no_timing, "zero the seconds column for byte-stable output");

    CLI11_PARSE(app, argc, argv);

    try {
        sixv::ExperimentConfig cfg;
        if (!config_path.empty()) cfg = sixv::load_config_file(config_path);
        if (!experiment.empty()) cfg.kind = sixv::experiment_from_name(experiment);
        if (seed != 0) cfg.seed = seed;
        if (replicas != 0) cfg.replicas = replicas;
        if (!format.empty()) cfg.format = format;
        if (!out_path.empty()) cfg.out_path = out_path;
        if (!sizes_arg.empty()) {
            cfg.sizes.clear();
            std::stringstream ss(sizes_arg);
            int64_t v;
            while (ss >> v) cfg.sizes.push_back(v);
        }
        if (experiment.empty() && config_path.empty()) {
            std::cerr << "need --experiment or --config\n";
            return 2;
        }

        auto records = sixv::run_experiment(cfg);
        if (cfg.out_path.empty())
            sixv::emit(records, cfg.format, std::cout, !no_timing);
        else
            sixv::emit_to_file(records, cfg.format, cfg.out_path, !no_timing);

        bool all_pass = true;
        for (const auto& r : records) all_pass = all_pass && r.pass;
        return all_pass ? 0 : 1;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
}
