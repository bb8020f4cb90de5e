#include <CLI11.hpp>

#include <iostream>

#include "twinbridge/cli.hpp"

int main(int argc, char** argv) {
    using namespace twinbridge;
    CLI::App app{"Cost-aware sim-to-real bridging experiments"};
    app.require_subcommand(1);

    RunOptions run_opts;
    std::string spec, out, methods;
    std::uint64_t seed = 0;
    double budget = 0.0;
    std::vector<std::string> sets;

    auto* run = app.add_subcommand("run", "run the configured methods and write CSV results");
    run->add_option("--spec", spec, "key = value experiment file");
    run->add_option("--out", out, "output directory");
    run->add_option("--seed", seed, "run seed");
    run->add_option("--method", methods, "comma-separated methods (L2B, L2B-Lite, GS, Random)");
    run->add_option("--budget", budget, "maximum cumulative querying cost");
    run->add_option("--set", sets, "extra key=value overrides")->take_all();

    std::string results_dir;
    auto* report = app.add_subcommand("report", "render SVG charts from a results directory");
    report->add_option("results", results_dir, "directory written by `run`")->required();

    std::string dataset_out;
    auto* gen = app.add_subcommand("gen-dataset", "write the synthetic pair over the grid as CSV");
    gen->add_option("--spec", spec, "key = value experiment file");
    gen->add_option("--out", dataset_out, "dataset CSV path")->required();
    gen->add_option("--set", sets, "extra key=value overrides")->take_all();

    auto* keys = app.add_subcommand("keys", "list every spec key with its default");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (*run) {
        if (!spec.empty()) run_opts.spec = spec;
        if (!out.empty()) run_opts.out = out;
        if (run->count("--seed")) run_opts.seed = seed;
        if (!methods.empty()) run_opts.methods = methods;
        if (run->count("--budget")) run_opts.budget = budget;
        run_opts.overrides = sets;
        return cmd_run(run_opts, std::cout, std::cerr);
    }
    if (*report) return cmd_report(results_dir, std::cout, std::cerr);
    if (*gen) {
        std::optional<std::filesystem::path> sp;
        if (!spec.empty()) sp = spec;
        return cmd_gen_dataset(sp, dataset_out, sets, std::cout, std::cerr);
    }
    if (*keys) {
        for (const auto& k : spec_keys()) {
            std::cout << k.key << " = " << k.default_value;
            if (!k.help.empty()) std::cout << "    # " << k.help;
            std::cout << '\n';
        }
    }
    return 0;
}
