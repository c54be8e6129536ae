// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "btforge/generator.hpp"
#include "btforge/recovery.hpp"

namespace btforge {

/// Process-level configuration: endpoint settings, generation parameters,
/// recovery policy, worker count and output directory. Loadable from one
/// JSON file with environment-variable overrides; a missing endpoint is
/// legal whenever a mock generator is in use.
struct AppConfig {
    GeneratorConfig generator;
    RecoveryPolicy recovery;
    int workers = 1;
    std::string output_dir = "out";

    /// Parses the JSON text and applies BTFORGE_* environment overrides
    /// (BTFORGE_ENDPOINT_URL, BTFORGE_MODEL, BTFORGE_WORKERS,
    /// BTFORGE_OUTPUT_DIR). Throws ConfigError.
    static AppConfig from_json(const std::string& json_text);

    static AppConfig load_file(const std::string& path);

    /// Defaults plus environment overrides.
    static AppConfig from_environment();

    std::string to_json() const;
};

}  // namespace btforge
