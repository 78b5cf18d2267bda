#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>

#include "sdi/metadata.hpp"

namespace sdi {

enum ExitCode : int {
    kExitOk = 0,
    kExitDomainFailure = 1,
    kExitUsageOrIo = 2,
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Reads the process environment.
std::optional<std::string> process_env(const std::string& name);

struct CliConfig {
    std::filesystem::path catalog_dir = "catalog";
    std::string profile = "sdi-basic";
    std::optional<std::filesystem::path> thesaurus_path;
    std::string listen_addr = "127.0.0.1:8080";
};

/// Settings given on the command line; unset members fall through.
struct CliOverrides {
    std::optional<std::filesystem::path> catalog_dir;
    std::optional<std::string> profile;
    std::optional<std::filesystem::path> thesaurus_path;
    std::optional<std::string> listen_addr;
};

/// flags > SDI_* environment > <catalog_dir>/config.json > defaults.
/// Throws Error on an unreadable or malformed config file.
CliConfig resolve_config(const CliOverrides& flags, const EnvLookup& env);

/// "sdi-basic" or a path to a profile JSON document.
MetadataProfile load_profile(const std::string& name_or_path);

/// Entry point of the `sdi` tool. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
            const EnvLookup& env = process_env);

}  // namespace sdi
