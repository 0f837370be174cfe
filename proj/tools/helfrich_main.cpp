#include <CLI11.hpp>

#include "helfrich/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Helfrich energy minimization and varifold diagnostics"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;

    const char* commands[] = {"primitive", "energy",    "minimize",   "varifold", "diagnose",
                              "slab",      "lsc-graph", "biharmonic", "axisym"};
    std::string chosen;
    for (const char* name : commands) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "seed override");
        sub->callback([&chosen, name]() { chosen = name; });
    }

    CLI11_PARSE(app, argc, argv);
    return helfrich::run_command(chosen, config_path, out_dir, seed);
}
