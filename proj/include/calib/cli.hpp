#pragma once

#include <optional>
#include <string>
#include <vector>

namespace calib::cli {

inline constexpr const char* kVersion = "1.0.0";

// Exit codes shared by run and validate.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericalError = 3;

struct Overrides {
    std::optional<unsigned> workers; // flag beats CALIB_WORKERS beats config
    std::optional<std::string> out_dir;
};

// Parses and checks a config document without running it; one message per
// problem, empty when the config is valid.
std::vector<std::string> validate_config_text(const std::string& json_text);

// Runs the study described by the config file: writes the study CSVs and a
// manifest JSON into the output directory.  Returns kExitOk, or
// kExitConfigError / kExitNumericalError with a message on stderr.
int run_study(const std::string& config_path, const Overrides& overrides = {});

// Validates the config file and prints diagnostics to stderr.
int validate_config(const std::string& config_path);

} // namespace calib::cli
