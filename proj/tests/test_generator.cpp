// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "btforge/generator.hpp"
#include "btforge/task.hpp"

using namespace btforge;

namespace {

TaskSpec make_task() {
    TaskSpec task;
    task.id = "t1";
    task.description = "go to the kitchen";
    task.manifest = load_manifest(
        "primitives:\n"
        "  - id: MoveTo\n"
        "    params: [{name: goal, type: text, required: true}]\n");
    return task;
}

}  // namespace

TEST_CASE("build_prompt includes the task text and the action list") {
    GeneratorConfig cfg;
    PromptRecord prompt = build_prompt(make_task(), cfg);
    CHECK(prompt.input.find("go to the kitchen") != std::string::npos);
    CHECK(prompt.input.find("MoveTo(goal: text)") != std::string::npos);
    CHECK(prompt.instruction.find("behavior tree") != std::string::npos);
    CHECK(prompt.output.empty());
}

TEST_CASE("one-shot mode prepends the exemplar verbatim") {
    GeneratorConfig cfg;
    cfg.mode = PromptMode::OneShot;
    cfg.exemplar = PromptRecord{"", "example task", "<root>...</root>"};
    PromptRecord prompt = build_prompt(make_task(), cfg);
    CHECK(prompt.input.find("example task") != std::string::npos);
    CHECK(prompt.input.find("<root>...</root>") != std::string::npos);
    CHECK(prompt.input.find("example task") < prompt.input.find("go to the kitchen"));

    // The task's own exemplar is picked up when the config has none.
    GeneratorConfig bare;
    bare.mode = PromptMode::OneShot;
    TaskSpec task = make_task();
    task.one_shot_exemplar = PromptRecord{"", "from task", "<root/>"};
    CHECK(build_prompt(task, bare).input.find("from task") != std::string::npos);

    GeneratorConfig broken;
    broken.mode = PromptMode::OneShot;
    CHECK_THROWS_AS(build_prompt(make_task(), broken), Error);
}

TEST_CASE("build_prompt is byte-deterministic") {
    GeneratorConfig cfg;
    TaskSpec task = make_task();
    CHECK(build_prompt(task, cfg) == build_prompt(task, cfg));
}

TEST_CASE("scripted generator replays, repeats and records") {
    ScriptedGenerator gen({"first", "second"});
    PromptRecord prompt{"sys", "ask", ""};
    CHECK(gen.generate(prompt).raw_text == "first");
    CHECK(gen.generate(prompt).raw_text == "second");
    CHECK(gen.generate(prompt).raw_text == "second");  // exhausted: repeat last
    CHECK(gen.prompts().size() == 3);
    CHECK(gen.prompts()[0].input == "ask");
    CHECK_THROWS_AS(ScriptedGenerator({}), Error);
}

TEST_CASE("scripted generator latency reflects injected delay") {
    ScriptedGenerator gen({"x"});
    gen.set_delay_seconds(0.05);
    GenerationResponse response = gen.generate(PromptRecord{});
    CHECK(response.latency_seconds >= 0.05);
}

TEST_CASE("http generator talks to a chat-completions endpoint") {
    httplib::Server server;
    std::atomic<int> hits{0};
    server.Post("/v1/chat/completions",
                [&](const httplib::Request& req, httplib::Response& res) {
        ++hits;
        auto body = nlohmann::json::parse(req.body);
        CHECK(body["model"] == "test-model");
        CHECK(body["messages"][0]["role"] == "system");
        nlohmann::json reply = {
            {"choices", {{{"message", {{"content", "<root/> from " +
                                                        body["messages"][1]["role"]
                                                            .get<std::string>()}}}}}}};
        res.set_content(reply.dump(), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    GeneratorConfig cfg;
    cfg.endpoint_url = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    cfg.model_name = "test-model";
    HttpGenerator gen(cfg);
    GenerationResponse response = gen.generate(PromptRecord{"sys", "user text", ""});
    CHECK(response.raw_text == "<root/> from user");
    CHECK(response.latency_seconds >= 0.0);
    CHECK(hits == 1);

    server.stop();
    thread.join();
}

TEST_CASE("http generator retries once then surfaces TransportError") {
    httplib::Server server;
    std::atomic<int> hits{0};
    server.Post("/gen", [&](const httplib::Request&, httplib::Response& res) {
        if (++hits == 1) {
            res.status = 500;
        } else {
            res.set_content("{\"choices\":[{\"message\":{\"content\":\"ok\"}}]}",
                            "application/json");
        }
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    GeneratorConfig cfg;
    cfg.endpoint_url = "http://127.0.0.1:" + std::to_string(port) + "/gen";
    HttpGenerator gen(cfg);
    CHECK(gen.generate(PromptRecord{}).raw_text == "ok");
    CHECK(hits == 2);

    server.stop();
    thread.join();

    GeneratorConfig dead;
    dead.endpoint_url = "http://127.0.0.1:1/gen";
    dead.timeout_seconds = 0.2;
    HttpGenerator unreachable(dead);
    CHECK_THROWS_AS(unreachable.generate(PromptRecord{}), TransportError);
}

TEST_CASE("json_text_at_path walks objects and arrays") {
    std::string body = R"({"choices":[{"message":{"content":"hello"}}],"alt":"x"})";
    CHECK(json_text_at_path(body, "choices.0.message.content") == "hello");
    CHECK(json_text_at_path(body, "alt") == "x");
    CHECK(!json_text_at_path(body, "choices.1.message.content").has_value());
    CHECK(!json_text_at_path(body, "choices.0.message").has_value());  // not a string
    CHECK(!json_text_at_path("not json", "a").has_value());
}
