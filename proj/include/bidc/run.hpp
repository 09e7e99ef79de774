#ifndef BIDC_RUN_HPP
#define BIDC_RUN_HPP

#include "bidc/config.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace bidc {

inline constexpr const char* code_version = "0.1.0";

struct RunManifest {
    std::string config_hash;
    std::string version = code_version;
    std::string started;
    std::string finished;
    std::vector<std::string> outputs; // paths relative to the output directory
    std::map<std::string, double> metrics;
};

/// Execute one validated config, writing CSV/JSON outputs and a manifest
/// into out_dir (atomically). Throws std::invalid_argument for validation
/// problems and std::runtime_error / std::domain_error for numerical ones.
RunManifest run_task(const RunConfig& config, const std::filesystem::path& out_dir);

void write_manifest(const std::filesystem::path& path, const RunManifest& m);

} // namespace bidc

#endif
