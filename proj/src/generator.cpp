// SPDX-License-Identifier: Apache-2.0
#include "btforge/generator.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "btforge/bench.hpp"
#include "btforge/manifest.hpp"

#include <httplib.h>

namespace btforge {

namespace {

constexpr const char* kSystemTemplate =
    "You are a robot task planner that converts natural language task "
    "descriptions into behavior trees.\n"
    "Output exactly one XML document of the form "
    "<root BTCPP_format=\"4\"><BehaviorTree ID=\"MainTree\">...</BehaviorTree></root> "
    "and nothing else.\n"
    "Use only these control nodes: Sequence, Fallback, ReactiveFallback, Parallel, "
    "Inverter, RetryUntilSuccessful, Repeat, Timeout, ForceSuccess, ForceFailure.\n"
    "Use only the action and condition primitives listed in the request, with "
    "exactly the parameters they declare.";

std::string render_task_block(const std::string& description, const std::string& action_list) {
    std::string out = "Task:\n";
    out += description;
    out += "\n\nAvailable primitives:\n";
    out += action_list;
    return out;
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

PromptRecord build_prompt(const std::string& description, const std::string& action_list,
                          const GeneratorConfig& cfg) {
    PromptRecord record;
    record.instruction = kSystemTemplate;
    std::string input;
    if (cfg.mode == PromptMode::OneShot) {
        if (!cfg.exemplar || cfg.exemplar->output.empty()) {
            throw Error("one-shot mode requires an exemplar with a non-empty output");
        }
        input += "Worked example.\n";
        input += cfg.exemplar->input;
        input += "\n";
        input += cfg.exemplar->output;
        input += "\n\nNow solve this task.\n";
    }
    input += render_task_block(description, action_list);
    record.input = std::move(input);
    return record;
}

PromptRecord build_prompt(const TaskSpec& task, const GeneratorConfig& cfg) {
    GeneratorConfig effective = cfg;
    if (cfg.mode == PromptMode::OneShot && !cfg.exemplar && task.one_shot_exemplar) {
        effective.exemplar = task.one_shot_exemplar;
    }
    return build_prompt(task.description, render_action_list(task.manifest), effective);
}

std::optional<std::string> json_text_at_path(const std::string& body, const std::string& path) {
    nlohmann::json doc = nlohmann::json::parse(body, nullptr, false);
    if (doc.is_discarded()) return std::nullopt;

    const nlohmann::json* node = &doc;
    std::istringstream segments(path);
    std::string segment;
    while (std::getline(segments, segment, '.')) {
        if (node->is_array()) {
            try {
                std::size_t index = std::stoul(segment);
                if (index >= node->size()) return std::nullopt;
                node = &(*node)[index];
            } catch (const std::logic_error&) {
                return std::nullopt;
            }
        } else if (node->is_object()) {
            auto it = node->find(segment);
            if (it == node->end()) return std::nullopt;
            node = &*it;
        } else {
            return std::nullopt;
        }
    }
    if (!node->is_string()) return std::nullopt;
    return node->get<std::string>();
}

HttpGenerator::HttpGenerator(GeneratorConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.endpoint_url.empty()) {
        throw ConfigError("HttpGenerator requires an endpoint URL");
    }
}

GenerationResponse HttpGenerator::post_once(const PromptRecord& prompt) {
    // Split scheme://host:port and path.
    std::string url = cfg_.endpoint_url;
    std::string path = "/";
    std::size_t scheme = url.find("://");
    std::size_t path_start = (scheme == std::string::npos) ? url.find('/')
                                                           : url.find('/', scheme + 3);
    if (path_start != std::string::npos) {
        path = url.substr(path_start);
        url = url.substr(0, path_start);
    }

    httplib::Client client(url);
    client.set_connection_timeout(std::chrono::duration<double>(cfg_.timeout_seconds));
    client.set_read_timeout(std::chrono::duration<double>(cfg_.timeout_seconds));

    nlohmann::json body;
    body["model"] = cfg_.model_name;
    body["messages"] = nlohmann::json::array({
        nlohmann::json{{"role", "system"}, {"content", prompt.instruction}},
        nlohmann::json{{"role", "user"}, {"content", prompt.input}},
    });
    body["temperature"] = cfg_.temperature;
    body["top_p"] = cfg_.top_p;
    body["max_tokens"] = cfg_.max_output_tokens;

    httplib::Headers headers;
    if (!cfg_.auth_env_var.empty()) {
        if (const char* token = std::getenv(cfg_.auth_env_var.c_str())) {
            headers.emplace(cfg_.auth_header, std::string("Bearer ") + token);
        }
    }

    auto start = std::chrono::steady_clock::now();
    httplib::Result res = client.Post(path, headers, body.dump(), "application/json");
    double latency = elapsed_seconds(start);

    if (!res) {
        throw TransportError("endpoint unreachable: " + httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
        throw TransportError("endpoint returned HTTP " + std::to_string(res->status));
    }
    auto text = json_text_at_path(res->body, cfg_.response_text_path);
    if (!text) {
        throw TransportError("response JSON has no text at '" + cfg_.response_text_path + "'");
    }
    return GenerationResponse{*text, latency};
}

GenerationResponse HttpGenerator::generate(const PromptRecord& prompt) {
    try {
        return post_once(prompt);
    } catch (const TransportError&) {
        // One silent retry, then surface the failure.
        return post_once(prompt);
    }
}

ScriptedGenerator::ScriptedGenerator(std::vector<std::string> script, GeneratorConfig cfg)
    : script_(std::move(script)), cfg_(std::move(cfg)) {
    if (script_.empty()) throw Error("scripted generator requires a non-empty script");
}

GenerationResponse ScriptedGenerator::generate(const PromptRecord& prompt) {
    auto start = std::chrono::steady_clock::now();
    if (delay_seconds_ > 0.0) {
        std::this_thread::sleep_for(std::chrono::duration<double>(delay_seconds_));
    }
    std::lock_guard<std::mutex> lock(mutex_);
    prompts_.push_back(prompt);
    const std::string& text = script_[std::min(next_, script_.size() - 1)];
    ++next_;
    return GenerationResponse{text, elapsed_seconds(start)};
}

std::vector<PromptRecord> ScriptedGenerator::prompts() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return prompts_;
}

std::size_t ScriptedGenerator::requests_served() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return next_;
}

}  // namespace btforge
