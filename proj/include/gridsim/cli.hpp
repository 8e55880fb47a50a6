#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace gridsim::cli {

inline const std::vector<std::string> kExperimentKinds = {
    "bounds", "simulate", "treefold", "variance", "percolation", "smallworld", "latency"};

using ConfigMap = std::map<std::string, std::string>;

// Flat "key = value" lines; '#' starts a comment. Later duplicates win.
ConfigMap parse_config_file(const std::string& path);
ConfigMap parse_config_text(const std::string& text);

// Outcome of one experiment run, before any file is written.
struct ExperimentOutcome {
    int exit_code = 0; // 0 success, 1 validation error, 2 statistical failure
    std::string message;
    std::string artifact;           // primary output body
    std::string artifact_extension; // "csv" / "jsonl"
    std::string secondary;          // optional extra artifact (e.g. summary JSON)
    std::string secondary_extension;
    nlohmann::ordered_json summary; // deterministic, goes into the manifest
};

// Validates the merged config against the experiment's key set and runs it.
// Unknown keys are rejected by name. Never writes files except the optional
// trace stream named by the "trace" key.
ExperimentOutcome execute(const std::string& kind, const ConfigMap& config);

// execute() plus artifacts on disk: the primary output at `out_path`
// (extension appended if missing), any secondary artifact next to it, and
// `<out>.manifest.json`. Returns the process exit code.
int run_to_files(const std::string& kind, const ConfigMap& config, const std::string& out_path);

} // namespace gridsim::cli
