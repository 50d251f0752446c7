// icelines: equilibria, switching geometry and glacial cycles of the
// two-albedo-line flip-flop climate model.

#include "icelines/commands.hpp"
#include "icelines/config.hpp"
#include "icelines/equilibria.hpp"
#include "icelines/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int exit_config = 2;
constexpr int exit_solver = 3;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonsmooth ice-line climate model: equilibria, switching geometry, glacial cycles"};
    app.fallthrough();
    app.require_subcommand(0, 1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    int jobs = 1;
    bool dump = false;
    app.add_option("--config", config_path, "TOML scenario file")->check(CLI::ExistingFile);
    app.add_option("--set", overrides, "override one setting, KEY=VALUE (repeatable)")
        ->expected(1)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--jobs", jobs, "worker threads for sweep")->check(CLI::PositiveNumber);
    app.add_flag("--dump-config", dump, "print the resolved configuration as TOML and exit");

    const std::vector<std::pair<std::string, std::string>> commands{
        {"equilibria", "equilibria of the reduced system and their lifts"},
        {"simulate", "integrate the reduced or the switched system"},
        {"cycle", "locate the attracting glacial cycle"},
        {"sweep", "cycle search over an eps x T_cN_minus grid"},
        {"classify", "classify a point of the switching surface"},
    };
    for (const auto& [name, help] : commands) app.add_subcommand(name, help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        (void)app.exit(e);
        return exit_config;
    }

    icelines::ScenarioConfig config;
    try {
        if (!config_path.empty()) config = icelines::load_config(config_path);
        if (!app.get_subcommands().empty()) config.scenario = app.get_subcommands().front()->get_name();
        for (const auto& kv : overrides) icelines::apply_override(config, kv);
        if (!out_dir.empty()) config.output_dir = out_dir;
        config.finalize();
    } catch (const icelines::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    }

    if (dump) {
        std::cout << icelines::dump_config(config);
        return 0;
    }
    if (app.get_subcommands().empty()) {
        std::cerr << "no subcommand given\n" << app.help();
        return exit_config;
    }

    try {
        icelines::verify_insolation_anchor();
        std::vector<std::filesystem::path> written;
        const std::filesystem::path out = config.output_dir;
        const std::string& s = config.scenario;
        if (s == "equilibria") written = icelines::run_equilibria(config, out);
        else if (s == "simulate") written = icelines::run_simulate(config, out);
        else if (s == "cycle") written = icelines::run_cycle(config, out);
        else if (s == "sweep") written = icelines::run_sweep(config, out, jobs);
        else written = icelines::run_classify(config, out);
        for (const auto& f : written) std::cout << f.string() << "\n";
    } catch (const icelines::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const icelines::SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return exit_solver;
    } catch (const icelines::DomainError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return exit_solver;
    }
    return 0;
}
