// SPDX-License-Identifier: Apache-2.0
//
// Pluggable BT generators: deterministic prompt construction, a JSON over
// HTTP transport for chat-completion style endpoints, and scripted doubles
// for offline runs. The transport never interprets model text; extraction
// and validation live in the validator module.
#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "btforge/errors.hpp"

namespace btforge {

struct TaskSpec;  // defined in bench.hpp

/// Alpaca-style record: instruction (system context), input (task text plus
/// rendered action list), output (expected tree; empty outside dataset
/// records and one-shot exemplars).
struct PromptRecord {
    std::string instruction;
    std::string input;
    std::string output;

    friend bool operator==(const PromptRecord&, const PromptRecord&) = default;
};

enum class PromptMode { ZeroShot, OneShot };

struct GeneratorConfig {
    std::string endpoint_url;
    std::string model_name = "btforge-dev";
    double temperature = 0.0;
    double top_p = 1.0;
    int max_output_tokens = 2048;
    PromptMode mode = PromptMode::ZeroShot;
    std::optional<PromptRecord> exemplar;  // required when mode == OneShot
    double timeout_seconds = 60.0;
    /// Dot path into the response JSON where the generated text lives.
    std::string response_text_path = "choices.0.message.content";
    std::string auth_header = "Authorization";
    /// Environment variable holding the bearer token; empty disables auth.
    std::string auth_env_var;
};

struct GenerationResponse {
    std::string raw_text;
    double latency_seconds = 0.0;
};

class Generator {
public:
    virtual ~Generator() = default;
    virtual GenerationResponse generate(const PromptRecord& prompt) = 0;
    virtual const GeneratorConfig& config() const { return default_config_; }

private:
    GeneratorConfig default_config_;
};

/// The fixed system template plus task description and rendered action list.
/// One-shot mode prepends the exemplar as a worked example. Pure function of
/// its inputs, byte-deterministic.
PromptRecord build_prompt(const TaskSpec& task, const GeneratorConfig& cfg);

/// Variant that takes the pieces directly (used by dataset and recovery).
PromptRecord build_prompt(const std::string& description, const std::string& action_list,
                          const GeneratorConfig& cfg);

/// POSTs {model, messages, temperature, top_p, max_tokens} and pulls the
/// generated text out of the response. One silent retry, then
/// TransportError. Latency is wall clock around the transport call.
class HttpGenerator : public Generator {
public:
    explicit HttpGenerator(GeneratorConfig cfg);
    GenerationResponse generate(const PromptRecord& prompt) override;
    const GeneratorConfig& config() const override { return cfg_; }

private:
    GenerationResponse post_once(const PromptRecord& prompt);
    GeneratorConfig cfg_;
};

/// Test double: yields scripted texts in order, repeating the last entry,
/// and records every prompt it was given. Internally serialized, safe to
/// share between threads.
class ScriptedGenerator : public Generator {
public:
    explicit ScriptedGenerator(std::vector<std::string> script,
                               GeneratorConfig cfg = GeneratorConfig{});

    GenerationResponse generate(const PromptRecord& prompt) override;
    const GeneratorConfig& config() const override { return cfg_; }

    std::vector<PromptRecord> prompts() const;
    std::size_t requests_served() const;

    /// Injects an artificial delay per request, for latency tests.
    void set_delay_seconds(double seconds) { delay_seconds_ = seconds; }

private:
    mutable std::mutex mutex_;
    std::vector<std::string> script_;
    std::vector<PromptRecord> prompts_;
    std::size_t next_ = 0;
    double delay_seconds_ = 0.0;
    GeneratorConfig cfg_;
};

/// Extracts text at a dot path like "choices.0.message.content" from a JSON
/// document. Returns nullopt when the path does not resolve to a string.
std::optional<std::string> json_text_at_path(const std::string& body, const std::string& path);

}  // namespace btforge
