// Command-line driver: simulate | ensemble | study | verify.

#include "hallspde/commands.hpp"
#include "hallspde/config.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

namespace {

unsigned default_jobs()
{
    if (const char* env = std::getenv("HALLSPDE_JOBS")) {
        try {
            const long v = std::stol(env);
            if (v > 0)
                return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
        std::cerr << "warning: ignoring invalid HALLSPDE_JOBS='" << env << "'\n";
    }
    return 1;
}

} // namespace

int main(int argc, char** argv)
{
    using namespace hallspde;

    CLI::App app{"Truncated stochastic Hall-MHD solver and diagnostics"};
    app.set_version_flag("--version", tool_version);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    unsigned jobs = 0;
    bool force = false;
    std::vector<int> levels;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (default: run_<command>)");
        sub->add_option("--seed", seed, "override the master seed");
        sub->add_option("--jobs", jobs, "worker threads (default: HALLSPDE_JOBS or 1)")->check(CLI::PositiveNumber);
        sub->add_flag("--force", force, "overwrite an existing run directory");
    };

    CLI::App* simulate = app.add_subcommand("simulate", "single trajectory");
    CLI::App* ensemble = app.add_subcommand("ensemble", "moment estimates over an ensemble");
    CLI::App* study = app.add_subcommand("study", "per-level moments and coupled distances");
    CLI::App* verify = app.add_subcommand("verify", "run the property suites");
    for (CLI::App* sub : {simulate, ensemble, study, verify})
        common(sub);
    study->add_option("--levels", levels, "comma-separated integer cutoff levels")->delimiter(',')->required();

    CLI11_PARSE(app, argc, argv);

    try {
        RunSpec spec = load_run_spec(config_path);
        if (seed)
            spec.seed = *seed;
        CommandOptions options;
        options.jobs = jobs > 0 ? jobs : default_jobs();
        options.force = force;
        options.levels.assign(levels.begin(), levels.end());
        CLI::App* chosen = app.get_subcommands().front();
        if (out_dir.empty())
            out_dir = "run_" + chosen->get_name();

        if (simulate->parsed())
            return cmd_simulate(make_manifest(std::move(spec), out_dir, CommandKind::simulate), options);
        if (ensemble->parsed())
            return cmd_ensemble(make_manifest(std::move(spec), out_dir, CommandKind::ensemble), options);
        if (study->parsed())
            return cmd_study(make_manifest(std::move(spec), out_dir, CommandKind::study), options);
        return cmd_verify(make_manifest(std::move(spec), out_dir, CommandKind::verify), options);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
