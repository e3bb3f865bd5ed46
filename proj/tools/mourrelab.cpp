// mourrelab: run a configured experiment and write its artifacts.
//
// Exit status: 0 all assertions pass, 1 config or usage error,
// 2 assertion failure, 3 numerical failure during the run.

#include <mourrelab/experiment.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Finite-volume laboratory for Laurent and GGT operators, Mourre estimates and ballistic dynamics"};
    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed;
    bool describe_only = false;
    app.add_option("--config", config_path, "experiment config (flat key = value text)")->required();
    app.add_option("--out", out_dir, "artifact directory (overrides the output key)");
    app.add_option("--seed", seed, "seed for random test operators (overrides the seed key)");
    app.add_flag("--describe", describe_only, "print the experiment plan without running it");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    mlab::cli::ExperimentConfig cfg;
    try {
        cfg = mlab::cli::load_config(config_path, seed);
        if (!out_dir.empty()) cfg.output = out_dir;
        if (describe_only) {
            mlab::cli::describe(cfg, std::cout);
            return 0;
        }
    } catch (const mlab::cli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const mlab::Error& e) {
        std::cerr << "config error: " << config_path << ": " << e.what() << "\n";
        return 1;
    }

    mlab::cli::RunResult result;
    try {
        result = mlab::cli::run(cfg, cfg.output);
    } catch (const mlab::cli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << "\n";
        return 3;
    }

    for (const auto& a : result.assertions) {
        std::printf("%s %-32s value=%.6e limit=%.6e%s%s\n", a.passed ? "PASS" : "FAIL", a.key.c_str(), a.value, a.limit,
                    a.detail.empty() ? "" : "  # ", a.detail.c_str());
    }
    for (const auto& n : result.notes) std::printf("note %s\n", n.c_str());
    for (const auto& p : result.artifacts) std::printf("wrote %s\n", p.c_str());
    if (const auto* f = result.failing()) {
        std::fprintf(stderr, "assertion failed: %s\n", f->key.c_str());
        return 2;
    }
    return 0;
}
