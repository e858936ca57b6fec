#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace psboot::cli {

struct RunConfig {
    std::string command;
    std::filesystem::path config_path;
    std::filesystem::path out_dir;
    std::optional<std::uint64_t> seed;
    std::size_t threads = 1;  // 0: one per hardware thread
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;

const std::vector<std::string>& commands();
bool is_stochastic(const std::string& command);

/// Executes one command and writes its artifacts followed by manifest.json.
/// Errors are reported on `err`; no manifest is written when a command fails.
int run(const RunConfig& cfg, std::ostream& err);
int run(const RunConfig& cfg);

/// Config schema and defaults of each command, as shown by --help.
std::string schema_help();

}  // namespace psboot::cli
