// SPDX-License-Identifier: Apache-2.0
#include "btforge/config.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace btforge {
namespace {

void apply_environment(AppConfig& config) {
    if (const char* url = std::getenv("BTFORGE_ENDPOINT_URL")) {
        config.generator.endpoint_url = url;
    }
    if (const char* model = std::getenv("BTFORGE_MODEL")) {
        config.generator.model_name = model;
    }
    if (const char* workers = std::getenv("BTFORGE_WORKERS")) {
        try {
            config.workers = std::stoi(workers);
        } catch (const std::logic_error&) {
            throw ConfigError("BTFORGE_WORKERS must be an integer");
        }
    }
    if (const char* out = std::getenv("BTFORGE_OUTPUT_DIR")) {
        config.output_dir = out;
    }
}

}  // namespace

AppConfig AppConfig::from_json(const std::string& json_text) {
    nlohmann::json doc = nlohmann::json::parse(json_text, nullptr, false);
    if (doc.is_discarded()) throw ConfigError("config is not valid JSON");

    AppConfig config;
    if (doc.contains("endpoint")) {
        const auto& endpoint = doc["endpoint"];
        config.generator.endpoint_url = endpoint.value("url", config.generator.endpoint_url);
        config.generator.model_name = endpoint.value("model", config.generator.model_name);
        config.generator.auth_header =
            endpoint.value("auth_header", config.generator.auth_header);
        config.generator.auth_env_var =
            endpoint.value("auth_env", config.generator.auth_env_var);
        config.generator.response_text_path =
            endpoint.value("response_path", config.generator.response_text_path);
    }
    if (doc.contains("generation")) {
        const auto& gen = doc["generation"];
        config.generator.temperature = gen.value("temperature", config.generator.temperature);
        config.generator.top_p = gen.value("top_p", config.generator.top_p);
        config.generator.max_output_tokens =
            gen.value("max_output_tokens", config.generator.max_output_tokens);
        config.generator.timeout_seconds =
            gen.value("timeout_seconds", config.generator.timeout_seconds);
        if (config.generator.top_p <= 0.0 || config.generator.top_p > 1.0) {
            throw ConfigError("top_p must be in (0,1]");
        }
        if (config.generator.temperature < 0.0) {
            throw ConfigError("temperature must be >= 0");
        }
    }
    if (doc.contains("recovery")) {
        const auto& recovery = doc["recovery"];
        config.recovery.max_inference_retries =
            recovery.value("max_inference_retries", config.recovery.max_inference_retries);
        config.recovery.max_regen_rounds =
            recovery.value("max_regen_rounds", config.recovery.max_regen_rounds);
        config.recovery.tick_budget = recovery.value("tick_budget", config.recovery.tick_budget);
        std::string scope = recovery.value("scope", std::string("failed-subtree"));
        if (scope == "failed-subtree") {
            config.recovery.regen_scope = RegenScope::FailedSubtree;
        } else if (scope == "whole-tree") {
            config.recovery.regen_scope = RegenScope::WholeTree;
        } else {
            throw ConfigError("recovery scope must be failed-subtree or whole-tree");
        }
        if (config.recovery.max_inference_retries < 1) {
            throw ConfigError("max_inference_retries must be >= 1");
        }
        if (config.recovery.max_regen_rounds < 0) {
            throw ConfigError("max_regen_rounds must be >= 0");
        }
    }
    config.workers = doc.value("workers", config.workers);
    config.output_dir = doc.value("output_dir", config.output_dir);
    if (config.workers < 1) throw ConfigError("workers must be >= 1");

    apply_environment(config);
    return config;
}

AppConfig AppConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

AppConfig AppConfig::from_environment() {
    AppConfig config;
    apply_environment(config);
    return config;
}

std::string AppConfig::to_json() const {
    nlohmann::ordered_json doc;
    doc["endpoint"] = {
        {"url", generator.endpoint_url},
        {"model", generator.model_name},
        {"auth_header", generator.auth_header},
        {"auth_env", generator.auth_env_var},
        {"response_path", generator.response_text_path},
    };
    doc["generation"] = {
        {"temperature", generator.temperature},
        {"top_p", generator.top_p},
        {"max_output_tokens", generator.max_output_tokens},
        {"timeout_seconds", generator.timeout_seconds},
    };
    doc["recovery"] = {
        {"max_inference_retries", recovery.max_inference_retries},
        {"max_regen_rounds", recovery.max_regen_rounds},
        {"tick_budget", recovery.tick_budget},
        {"scope",
         recovery.regen_scope == RegenScope::FailedSubtree ? "failed-subtree" : "whole-tree"},
    };
    doc["workers"] = workers;
    doc["output_dir"] = output_dir;
    return doc.dump(2);
}

}  // namespace btforge
