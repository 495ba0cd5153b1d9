// gdprox: run one experiment from a config file.
//
//   gdprox <proximity|lowerbound|gn|generalize|rates> --config PATH [--seed U64] [--out DIR] [--workers N]

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "gdprox/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"gradient descent trajectory proximity experiments"};
    app.require_subcommand(1);
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> workers;
    for (const auto& name : gdprox::command_names()) {
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", config_path, "key = value config file")->required();
        sub->add_option("--seed", seed, "override the config seed");
        sub->add_option("--out", out, "output directory");
        sub->add_option("--workers", workers, "worker threads (default: GDPROX_WORKERS or hardware)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : gdprox::exit_config;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    gdprox::ExperimentConfig cfg;
    try {
        cfg = gdprox::load_config(config_path);
    } catch (const gdprox::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return gdprox::exit_config;
    }
    if (seed) {
        cfg.seed = *seed;
        cfg.echo.emplace_back("seed (--seed)", std::to_string(*seed));
    }
    if (out) cfg.output = *out;
    if (workers) cfg.workers = *workers;
    const int rc = gdprox::run_command(command, cfg, std::cout);
    std::cout << "exit " << rc << '\n';
    return rc;
}
