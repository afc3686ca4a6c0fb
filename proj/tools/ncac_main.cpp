#include <CLI11.hpp>

#include <string>

#include "ncac/harness.hpp"
#include "ncac/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"ncac: causal-network simulation, integration (phi), perturbational "
                 "complexity (pci), and phi-targeted adaptation"};
    app.set_version_flag("--version", ncac::kVersion);
    app.require_subcommand(1);

    ncac::CliOptions opts;
    std::uint64_t seed_value = 0;

    const char* descriptions[][2] = {
        {"simulate", "run a spiking network and export raster + binarized states"},
        {"phi", "integration of a causal network: single-state phi or state-averaged phi"},
        {"pci", "perturbational complexity index of a spiking network"},
        {"adapt", "tune edge weights toward a target phi"},
        {"report", "consolidate result files from earlier runs"},
    };
    for (auto& d : descriptions) {
        CLI::App* sub = app.add_subcommand(d[0], d[1]);
        sub->add_option("--config", opts.config_path, "JSON config file")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--seed", seed_value, "override the config's seed");
        sub->add_option("--out", opts.out_dir, "output directory (default: .)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // bad usage is an input error
    }

    CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--seed")) opts.seed = seed_value;
    return ncac::dispatch_command(sub->get_name(), opts);
}
