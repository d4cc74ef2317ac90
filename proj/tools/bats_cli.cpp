// Command-line front end for the planner and simulator.
//
//   bats --mode plan --config configs/example3.cfg
//   bats --mode simulate --config configs/experiment.cfg --n 167 --runs 50 --out-dir out
//   bats --config configs/fig7.cfg --set k_max=9 --set p2=0.2

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bats/experiment.hpp"

namespace {

void print_error(const char* kind, const std::string& field, const std::string& message) {
    std::cerr << "error kind=" << kind;
    if (!field.empty()) std::cerr << " field=" << field;
    std::cerr << " message=\"" << message << "\"\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-phase cooperative broadcast with BATS codes: planner and simulator"};
    std::string mode, config, out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> runs, n;
    std::vector<std::string> overrides;
    app.add_option("--mode", mode, "plan | simulate | sweep | robustness | single-phase");
    app.add_option("-c,--config", config, "key=value config file");
    app.add_option("--seed", seed, "base seed; run i uses seed + i");
    app.add_option("--runs", runs, "number of seeded runs");
    app.add_option("-n,--n", n, "batch count, overriding the planned optimum");
    app.add_option("-o,--out-dir", out_dir, "directory for CSV output");
    app.add_option("--set", overrides, "extra key=value override, repeatable");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        print_error("usage", "", e.what());
        return 2;
    }

    using namespace bats::experiment;
    try {
        ExperimentConfig cfg;
        if (!config.empty()) cfg = load_config(config);
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw ConfigError(kv, "override must be key=value");
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (!mode.empty()) cfg.set("mode", mode);
        if (seed) cfg.set("seed", std::to_string(*seed));
        if (runs) cfg.set("runs", std::to_string(*runs));
        if (n) cfg.set("n", std::to_string(*n));
        if (!out_dir.empty()) cfg.set("out_dir", out_dir);

        const std::string headline = execute(cfg, std::cerr);
        std::cout << headline << '\n';
        return 0;
    } catch (const ConfigError& e) {
        print_error("config", e.field(), e.what());
        return 2;
    } catch (const std::exception& e) {
        print_error("runtime", "", e.what());
        return 1;
    }
}
