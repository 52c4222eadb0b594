#include <string>

#include <CLI11.hpp>

#include "calib/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"calibration study runner"};
    app.set_version_flag("--version", calib::cli::kVersion);
    app.require_subcommand(1);

    std::string run_config;
    calib::cli::Overrides overrides;
    unsigned workers = 0;
    std::string out_dir;

    CLI::App* run = app.add_subcommand("run", "execute a study config and write its outputs");
    run->add_option("config", run_config, "path to the JSON study config")->required();
    CLI::Option* workers_opt =
        run->add_option("--workers", workers, "worker threads (overrides CALIB_WORKERS and config)");
    CLI::Option* out_opt = run->add_option("--out", out_dir, "output directory (overrides config)");

    std::string validate_config_path;
    CLI::App* validate = app.add_subcommand("validate", "check a study config without running it");
    validate->add_option("config", validate_config_path, "path to the JSON study config")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        // Successful --help/--version parse "errors" exit 0; anything else is
        // a usage problem and maps to the config-error code.
        return code == 0 ? calib::cli::kExitOk : calib::cli::kExitConfigError;
    }

    if (run->parsed()) {
        if (workers_opt->count() > 0) overrides.workers = workers;
        if (out_opt->count() > 0) overrides.out_dir = out_dir;
        return calib::cli::run_study(run_config, overrides);
    }
    return calib::cli::validate_config(validate_config_path);
}
