// rydsim: Monte-Carlo sweeps for Rydberg reuse-array hybrid combining.

#include "rydmimo/config.hpp"
#include "rydmimo/experiment.hpp"
#include "rydmimo/validation.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumeric = 2;

struct SweepOptions {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    std::optional<long> trials;
    std::optional<unsigned> threads;
};

void add_sweep_options(CLI::App* cmd, SweepOptions& opts)
{
    cmd->add_option("--config", opts.config, "Experiment configuration (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", opts.out, "Output directory")->capture_default_str();
    cmd->add_option("--seed", opts.seed, "Override the master seed");
    cmd->add_option("--trials", opts.trials, "Override the number of channel realizations");
    cmd->add_option("--threads", opts.threads, "Worker threads (also SIM_THREADS)");
}

int run_sweep(const SweepOptions& opts, rydmimo::SweepAxis axis)
{
    rydmimo::ExperimentSpec spec;
    try {
        spec = rydmimo::parse_config(opts.config);
        spec.axis = axis;
        if (opts.seed)
            spec.seed = *opts.seed;
        if (opts.trials)
            spec.trials = *opts.trials;
        if (const char* env = std::getenv("SIM_THREADS"))
            spec.threads = static_cast<unsigned>(std::stoul(env));
        if (opts.threads)
            spec.threads = *opts.threads;
        spec.validate();
    } catch (const std::exception& e) {
        std::cerr << "rydsim: " << e.what() << "\n";
        return kExitConfig;
    }

    rydmimo::ResultTable table;
    try {
        table = rydmimo::run_experiment(spec);
    } catch (const std::exception& e) {
        std::cerr << "rydsim: numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    }

    for (const auto& f : table.failures)
        std::cerr << "rydsim: warning: excluded " << f << "\n";

    try {
        rydmimo::emit_results(table, spec, opts.out);
    } catch (const std::exception& e) {
        std::cerr << "rydsim: " << e.what() << "\n";
        return kExitConfig;
    }

    for (const auto& r : table.rows)
        if (r.trials == 0) {
            std::cerr << "rydsim: every trial failed for '" << r.label << "'\n";
            return kExitNumeric;
        }
    std::cout << "wrote " << table.rows.size() << " rows to " << opts.out << "/results.csv\n";
    return kExitOk;
}

int run_validate()
{
    bool failed = false;
    for (const auto& check : rydmimo::run_validation()) {
        std::cout << rydmimo::to_string(check.status) << "  " << check.name << "  (" << check.detail << ")\n";
        failed |= check.status == rydmimo::CheckStatus::Fail;
    }
    return failed ? kExitNumeric : kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Rydberg reuse-array hybrid combining simulator"};
    app.require_subcommand(1);

    SweepOptions snr, chains, depth, conv;
    add_sweep_options(app.add_subcommand("sweep-snr", "Spectral efficiency versus SNR"), snr);
    add_sweep_options(app.add_subcommand("sweep-chains", "Spectral efficiency versus laser/RF chain count"), chains);
    add_sweep_options(app.add_subcommand("sweep-depth", "Spectral efficiency versus LO reuse depth"), depth);
    add_sweep_options(app.add_subcommand("convergence", "Mean combiner residual per iteration"), conv);
    auto* validate = app.add_subcommand("validate", "Run the built-in oracle checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (app.got_subcommand("sweep-snr"))
        return run_sweep(snr, rydmimo::SweepAxis::Snr);
    if (app.got_subcommand("sweep-chains"))
        return run_sweep(chains, rydmimo::SweepAxis::Chains);
    if (app.got_subcommand("sweep-depth"))
        return run_sweep(depth, rydmimo::SweepAxis::LoDepth);
    if (app.got_subcommand("convergence"))
        return run_sweep(conv, rydmimo::SweepAxis::Iteration);
    if (validate->parsed())
        return run_validate();
    return kExitConfig;
}
