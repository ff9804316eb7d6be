#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rigidlab/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"rigidlab: leafwise measure laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    bool strict = false;
    int threads = 1;

    CLI::App* run_cmd = app.add_subcommand("run", "execute an experiment config");
    run_cmd->add_option("config", config_path, "config file")->required();
    run_cmd->add_option("--out", out_dir, "output directory");
    run_cmd->add_flag("--strict", strict, "exit 2 on an inconclusive verdict");
    run_cmd->add_option("--threads", threads, "worker threads for plaque evaluation");

    CLI::App* verify_cmd = app.add_subcommand("verify", "validate a config without executing");
    verify_cmd->add_option("config", config_path, "config file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        rigidlab::ExperimentConfig config =
            rigidlab::resolve_config(rigidlab::parse_config_file(config_path));
        if (strict) config.strict = true;
        if (threads > 0) config.threads = threads;
        if (app.got_subcommand(verify_cmd)) {
            std::cout << rigidlab::verify_report(config);
            return 0;
        }
        rigidlab::RunResult result = rigidlab::run_experiment(config, out_dir);
        if (result.verdict) {
            std::cout << "verdict: " << rigidlab::verdict_name(result.verdict->verdict)
                      << " (delta_bar = " << result.verdict->delta_bar
                      << ", cv = " << result.verdict->cv << ")\n";
        }
        std::cout << "reports written to " << result.out_dir << "\n";
        return result.exit_code;
    } catch (const rigidlab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
