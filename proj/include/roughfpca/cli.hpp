#pragma once

#include <string>

#include "roughfpca/io.hpp"

namespace roughfpca {

/// Runs an experiment config (see docs/config.md) and writes its outputs and manifest.json
/// into outdir. A non-zero seed_override replaces the config seed.
RunManifest run_experiment(const json& config, const std::string& outdir, std::uint64_t seed_override = 0);

/// Entry point of the command-line tool; returns the process exit code.
int cli_main(int argc, char** argv);

}  // namespace roughfpca
