#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "morse/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Numerical Morse-Bott cuplength verification toolkit"};
    app.require_subcommand(1);

    morse::RunConfig cfg;
    std::vector<std::string> sets;

    const std::vector<std::string> commands = {"verify", "spectrum", "flow",   "moduli",
                                               "chain",  "homology", "pairing"};
    for (const auto& name : commands) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--problem", cfg.problem_file, "problem JSON file")->required();
        sub->add_option("--out", cfg.output_dir, "output directory")->required();
        sub->add_option("--set", sets, "override key=value (tolerances, seed_grid, F, h, ...)");
        sub->add_option("--seed", cfg.rng_seed, "RNG seed for all randomized choices");
        sub->callback([&cfg, name] { cfg.command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    for (const auto& kv : sets) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::cerr << "error: --set expects key=value, got '" << kv << "'\n";
            return 1;
        }
        cfg.overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }

    return morse::run(cfg, std::cerr);
}
