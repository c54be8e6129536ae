// SPDX-License-Identifier: Apache-2.0
//
// btforge: validate | run | solve | bench | dataset | eval-text
// Exit codes: 0 success, 1 domain failure, 2 usage or configuration error.
#include <CLI11.hpp>

#include <yaml-cpp/yaml.h>

#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "btforge/bench.hpp"
#include "btforge/config.hpp"
#include "btforge/dataset.hpp"
#include "btforge/recovery.hpp"
#include "btforge/textmetrics.hpp"
#include "btforge/validator.hpp"

namespace fs = std::filesystem;
using namespace btforge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    if (fs::path(path).has_parent_path()) {
        fs::create_directories(fs::path(path).parent_path());
    }
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << content;
}

/// Scripted candidates per task id, from a JSON-lines fixture:
/// {"task_id": "...", "candidates": ["<root>...", ...]}
std::map<std::string, std::vector<std::string>> load_mock_scripts(const std::string& path) {
    std::map<std::string, std::vector<std::string>> scripts;
    std::istringstream stream(read_file(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
        if (doc.is_discarded() || !doc.contains("task_id") || !doc.contains("candidates")) {
            throw ConfigError(path + ":" + std::to_string(line_no) +
                              ": expected {\"task_id\", \"candidates\"}");
        }
        std::vector<std::string> candidates;
        for (const auto& candidate : doc["candidates"]) {
            candidates.push_back(candidate.get<std::string>());
        }
        if (candidates.empty()) {
            throw ConfigError(path + ": empty candidate list for " +
                              doc["task_id"].get<std::string>());
        }
        scripts[doc["task_id"].get<std::string>()] = std::move(candidates);
    }
    if (scripts.empty()) throw ConfigError(path + ": no mock scripts found");
    return scripts;
}

struct CommonOptions {
    std::string config_path;
    std::string endpoint_url;
    std::string model_name;
    std::string mock_script_path;
    bool one_shot = false;
    std::string exemplar_path;
    bool er = false;
    int max_regen = -1;
    int max_retries = -1;
    int workers = 0;

    AppConfig resolve() const {
        AppConfig config;
        std::string path = config_path;
        if (path.empty()) {
            if (const char* env = std::getenv("BTFORGE_CONFIG")) path = env;
        }
        config = path.empty() ? AppConfig::from_environment() : AppConfig::load_file(path);
        if (!endpoint_url.empty()) config.generator.endpoint_url = endpoint_url;
        if (!model_name.empty()) config.generator.model_name = model_name;
        if (workers > 0) config.workers = workers;
        if (one_shot) {
            config.generator.mode = PromptMode::OneShot;
            if (!exemplar_path.empty()) {
                YAML::Node doc = YAML::Load(read_file(exemplar_path));
                PromptRecord exemplar;
                exemplar.input = doc["input"].as<std::string>();
                exemplar.output = doc["output"].as<std::string>();
                config.generator.exemplar = std::move(exemplar);
            }
        }
        if (!er) {
            config.recovery = RecoveryPolicy::disabled();
        }
        if (max_regen >= 0) config.recovery.max_regen_rounds = max_regen;
        if (max_retries >= 1) config.recovery.max_inference_retries = max_retries;
        return config;
    }

    bench::GeneratorFactory generator_factory(const AppConfig& config) const {
        if (!mock_script_path.empty()) {
            auto scripts = std::make_shared<std::map<std::string, std::vector<std::string>>>(
                load_mock_scripts(mock_script_path));
            GeneratorConfig gen_cfg = config.generator;
            return [scripts, gen_cfg](const TaskSpec& task) -> std::unique_ptr<Generator> {
                auto it = scripts->find(task.id);
                if (it == scripts->end()) {
                    throw ConfigError("mock script has no entry for task '" + task.id + "'");
                }
                return std::make_unique<ScriptedGenerator>(it->second, gen_cfg);
            };
        }
        if (config.generator.endpoint_url.empty()) {
            throw ConfigError("no endpoint configured; pass --endpoint or --mock-script");
        }
        GeneratorConfig gen_cfg = config.generator;
        return [gen_cfg](const TaskSpec&) -> std::unique_ptr<Generator> {
            return std::make_unique<HttpGenerator>(gen_cfg);
        };
    }
};

void add_common_flags(CLI::App* cmd, CommonOptions& options, bool with_generator = true) {
    cmd->add_option("--config", options.config_path, "JSON config file");
    if (with_generator) {
        cmd->add_option("--endpoint", options.endpoint_url, "chat-completions endpoint URL");
        cmd->add_option("--model", options.model_name, "model name sent to the endpoint");
        cmd->add_option("--mock-script", options.mock_script_path,
                        "JSONL of scripted candidates per task id (offline mode)");
        cmd->add_flag("--one-shot", options.one_shot, "prepend a worked example");
        cmd->add_option("--exemplar", options.exemplar_path,
                        "YAML {input, output} exemplar for --one-shot");
        cmd->add_flag("--er", options.er, "enable inference retries and runtime regeneration");
        cmd->add_option("--max-regen", options.max_regen, "regeneration round budget");
        cmd->add_option("--max-retries", options.max_retries, "inference retry budget");
    }
}

int cmd_validate(const std::string& tree_path, const std::string& manifest_path, bool as_json) {
    PrimitiveManifest manifest = load_manifest_file(manifest_path);
    auto [report, tree] = validate(read_file(tree_path), manifest);
    if (as_json || !report.accepted()) {
        std::cout << report.to_json() << "\n";
    } else {
        std::cout << report.verdict() << "\n";
    }
    return report.accepted() ? kExitOk : kExitDomain;
}

int cmd_run(const std::string& tree_path, const std::string& manifest_path,
            const std::string& world_path, int budget, const std::string& trace_path) {
    PrimitiveManifest manifest = load_manifest_file(manifest_path);
    auto [report, tree] = validate(read_file(tree_path), manifest);
    if (!tree) {
        std::cout << report.to_json() << "\n";
        return kExitDomain;
    }
    sim::SimEnvironment env(sim::load_world(read_file(world_path)), manifest);
    ExecutionResult result = execute(*tree, env, budget);
    if (!trace_path.empty()) write_file(trace_path, result.trace_to_jsonl());

    std::cout << "status: " << tick_status_name(result.final_status)
              << "  ticks: " << result.ticks_used
              << "  failures: " << result.failure_reports.size() << "\n";
    std::cout << sim::world_to_json(env.world()) << "\n";
    return result.succeeded() ? kExitOk : kExitDomain;
}

int cmd_solve(const CommonOptions& options, const std::string& task_path,
              const std::string& out_path) {
    AppConfig config = options.resolve();
    TaskSpec task = bench::load_task_file(task_path);
    auto factory = options.generator_factory(config);
    std::unique_ptr<Generator> gen = factory(task);

    sim::SimEnvironment env(task.world_spec, task.manifest);
    PipelineOutcome outcome = run_with_recovery(task, *gen, env, config.recovery);
    bool goal_ok = outcome.succeeded() && sim::evaluate_goal(env.world(), task.goal);

    nlohmann::ordered_json summary = nlohmann::ordered_json::parse(outcome.to_json());
    summary["goal_achieved"] = goal_ok;
    std::string rendered = summary.dump(2);
    std::string target = out_path.empty()
                             ? (fs::path(config.output_dir) / (task.id + ".outcome.json")).string()
                             : out_path;
    write_file(target, rendered);

    std::cout << "task " << task.id << ": " << pipeline_status_name(outcome.status)
              << (goal_ok ? ", goal achieved" : ", goal missed")
              << " (retries " << outcome.inference_retries_used << ", regen rounds "
              << outcome.regen_rounds_used << ")\n";
    if (outcome.final_tree) std::cout << serialize_bt(*outcome.final_tree);
    return goal_ok ? kExitOk : kExitDomain;
}

int cmd_bench(const CommonOptions& options, const std::string& suite_path,
              const std::string& difficulty, const std::string& category, int samples, int k,
              const std::string& out_path, const std::string& csv_path) {
    AppConfig config = options.resolve();
    std::vector<TaskSpec> tasks = bench::load_suite(suite_path);
    if (!difficulty.empty() || !category.empty()) {
        std::vector<TaskSpec> filtered;
        for (TaskSpec& task : tasks) {
            if (!difficulty.empty() && difficulty_name(task.difficulty) != difficulty) continue;
            if (!category.empty() && category_name(task.category) != category) continue;
            filtered.push_back(std::move(task));
        }
        tasks = std::move(filtered);
    }
    if (tasks.empty()) throw SuiteError("no tasks left after filtering");

    bench::RunOptions run_options;
    run_options.policy = config.recovery;
    run_options.n_samples = samples;
    run_options.k = k;
    run_options.workers = config.workers;

    auto factory = options.generator_factory(config);
    std::vector<bench::TaskResult> results = bench::run_suite(tasks, factory, run_options);
    bench::BenchReport report = bench::emit_report(std::move(results));

    if (!out_path.empty()) write_file(out_path, report.to_json());
    if (!csv_path.empty()) write_file(csv_path, report.to_csv());

    std::cout << "tasks: " << report.total_tasks << "  avg SR: "
              << bench::percent_string(report.total_successes, report.total_tasks)
              << "  action coherency: "
              << bench::percent_string(report.coherent_count, report.total_tasks)
              << "  xml syntax: "
              << bench::percent_string(report.xml_valid_count, report.total_tasks) << "\n";
    std::cout << report.to_csv();
    for (const bench::TaskResult& result : report.results) {
        if (!result.error.empty()) {
            std::cout << "task " << result.task_id << " error: " << result.error << "\n";
        }
    }
    return kExitOk;
}

int cmd_dataset(const CommonOptions& options, const std::string& seeds_dir, bool mock,
                const std::string& out_dir, data::CurationConfig curation) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(seeds_dir)) {
        if (entry.path().extension() == ".xml") files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ConfigError("no .xml seeds under '" + seeds_dir + "'");

    std::vector<std::pair<std::string, std::string>> seeds;
    for (const std::string& file : files) {
        std::ifstream in(file);
        std::ostringstream buf;
        buf << in.rdbuf();
        seeds.emplace_back(file, buf.str());
    }

    std::unique_ptr<Generator> gen;
    if (mock) {
        gen = std::make_unique<data::MockCurationGenerator>();
    } else {
        AppConfig config = options.resolve();
        config.generator.top_p = curation.top_p;
        if (config.generator.endpoint_url.empty()) {
            throw ConfigError("dataset needs --mock or an endpoint");
        }
        gen = std::make_unique<HttpGenerator>(config.generator);
    }

    data::CurationResult result = data::curate(seeds, *gen, curation);

    auto dump_records = [](const std::vector<data::DatasetRecord>& records) {
        std::string out;
        for (const data::DatasetRecord& record : records) {
            out += record.to_jsonl_line();
            out += "\n";
        }
        return out;
    };
    write_file((fs::path(out_dir) / "train.jsonl").string(), dump_records(result.train));
    write_file((fs::path(out_dir) / "test.jsonl").string(), dump_records(result.test));
    write_file((fs::path(out_dir) / "stats.json").string(), result.stats.to_json() + "\n");
    std::string rejects;
    for (const data::RejectEntry& entry : result.rejects) {
        rejects += entry.source + "\t" + entry.reason + "\n";
    }
    write_file((fs::path(out_dir) / "rejects.log").string(), rejects);

    std::cout << "seeds: " << result.stats.seed_count << " -> cleansed "
              << result.stats.cleansed_count;
    for (std::size_t i = 0; i < result.stats.round_counts.size(); ++i) {
        std::cout << " -> round" << (i + 1) << " " << result.stats.round_counts[i];
    }
    std::cout << " -> records " << result.records.size() << " (train " << result.train.size()
              << ", test " << result.test.size() << ")\n";
    std::cout << result.stats.to_json() << "\n";
    return kExitOk;
}

int cmd_eval_text(const std::string& pred_path, const std::string& ref_path,
                  const std::string& out_path) {
    auto load_outputs = [](const std::string& path) {
        std::vector<std::string> outputs;
        std::istringstream stream(read_file(path));
        std::string line;
        while (std::getline(stream, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
            if (doc.is_discarded() || !doc.contains("output")) {
                throw ConfigError(path + ": every line needs an \"output\" field");
            }
            outputs.push_back(doc["output"].get<std::string>());
        }
        return outputs;
    };
    std::vector<std::string> preds = load_outputs(pred_path);
    std::vector<std::string> refs = load_outputs(ref_path);
    if (preds.size() != refs.size() || preds.empty()) {
        throw ConfigError("prediction and reference files must pair up line by line");
    }

    std::map<std::string, std::vector<double>> metrics;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        text::TokenSeq cand = text::tokenize(preds[i]);
        text::TokenSeq ref = text::tokenize(refs[i]);
        metrics["rouge1"].push_back(text::rouge_n(cand, ref, 1).f1 * 100.0);
        metrics["rouge2"].push_back(text::rouge_n(cand, ref, 2).f1 * 100.0);
        metrics["rougeL"].push_back(text::rouge_l(cand, ref).f1 * 100.0);
        metrics["rougeLsum"].push_back(
            text::rouge_lsum(text::tokenize_lines(preds[i]), text::tokenize_lines(refs[i])).f1 *
            100.0);
        metrics["bleu"].push_back(text::bleu(cand, {ref}) * 100.0);
    }

    nlohmann::ordered_json doc;
    doc["pairs"] = preds.size();
    for (const auto& [name, values] : metrics) {
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double variance = 0.0;
        for (double v : values) variance += (v - mean) * (v - mean);
        double stddev = std::sqrt(variance / static_cast<double>(values.size()));
        doc[name] = {{"mean", mean}, {"std", stddev}};
        std::cout << name << ": " << mean << " +/- " << stddev << "\n";
    }
    if (!out_path.empty()) write_file(out_path, doc.dump(2));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"behavior-tree generation, validation, execution and benchmarking"};
    app.require_subcommand(1);

    // validate
    auto* validate_cmd = app.add_subcommand("validate", "check a BT against a manifest");
    std::string tree_path;
    std::string manifest_path;
    bool as_json = false;
    validate_cmd->add_option("tree", tree_path, "BT XML file")->required();
    validate_cmd->add_option("--manifest", manifest_path, "primitive manifest YAML")->required();
    validate_cmd->add_flag("--json", as_json, "always print the JSON report");

    // run
    auto* run_cmd = app.add_subcommand("run", "execute a BT in a simulated world");
    std::string world_path;
    std::string trace_path;
    int budget = kDefaultTickBudget;
    run_cmd->add_option("tree", tree_path, "BT XML file")->required();
    run_cmd->add_option("--manifest", manifest_path, "primitive manifest YAML")->required();
    run_cmd->add_option("--world", world_path, "world YAML")->required();
    run_cmd->add_option("--budget", budget, "tick budget");
    run_cmd->add_option("--trace", trace_path, "write the tick trace as JSON lines");

    // solve
    CommonOptions solve_options;
    auto* solve_cmd = app.add_subcommand("solve", "generate, validate and execute one task");
    std::string task_path;
    std::string out_path;
    solve_cmd->add_option("--task", task_path, "task YAML")->required();
    solve_cmd->add_option("--out", out_path, "write the outcome JSON here");
    add_common_flags(solve_cmd, solve_options);

    // bench
    CommonOptions bench_options;
    auto* bench_cmd = app.add_subcommand("bench", "run the benchmark suite");
    std::string suite_path;
    std::string difficulty;
    std::string category;
    std::string csv_path;
    std::string bench_out;
    int samples = 3;
    int k = 3;
    bench_cmd->add_option("--suite", suite_path, "task directory or file")->required();
    bench_cmd->add_option("--difficulty", difficulty, "filter: easy|medium|hard");
    bench_cmd->add_option("--category", category, "filter: navigation|manipulation");
    bench_cmd->add_option("--samples", samples, "pipeline samples per task");
    bench_cmd->add_option("--k", k, "k for pass@k");
    bench_cmd->add_option("--out", bench_out, "write the JSON report here");
    bench_cmd->add_option("--csv", csv_path, "write the CSV table here");
    bench_cmd->add_option("--workers", bench_options.workers, "parallel task workers");
    add_common_flags(bench_cmd, bench_options);

    // dataset
    CommonOptions dataset_options;
    auto* dataset_cmd = app.add_subcommand("dataset", "run the curation pipeline");
    std::string seeds_dir;
    std::string dataset_out = "data_out";
    bool mock = false;
    data::CurationConfig curation;
    dataset_cmd->add_option("--seeds", seeds_dir, "directory of seed BT XML files")->required();
    dataset_cmd->add_option("--out", dataset_out, "output directory");
    dataset_cmd->add_flag("--mock", mock, "use the deterministic offline generator");
    dataset_cmd->add_option("--variants", curation.variants_per_tree, "variants per tree");
    dataset_cmd->add_option("--rounds", curation.rounds, "variant generation rounds");
    dataset_cmd->add_option("--top-p", curation.top_p, "nucleus sampling parameter");
    dataset_cmd->add_option("--split", curation.split_test_fraction, "test fraction");
    dataset_cmd->add_option("--seed", curation.split_seed, "split shuffle seed");
    add_common_flags(dataset_cmd, dataset_options);

    // eval-text
    auto* eval_cmd = app.add_subcommand("eval-text", "ROUGE/BLEU over prediction pairs");
    std::string pred_path;
    std::string ref_path;
    std::string eval_out;
    eval_cmd->add_option("--pred", pred_path, "predictions JSONL")->required();
    eval_cmd->add_option("--ref", ref_path, "references JSONL")->required();
    eval_cmd->add_option("--out", eval_out, "write metric JSON here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (validate_cmd->parsed()) return cmd_validate(tree_path, manifest_path, as_json);
        if (run_cmd->parsed()) {
            return cmd_run(tree_path, manifest_path, world_path, budget, trace_path);
        }
        if (solve_cmd->parsed()) return cmd_solve(solve_options, task_path, out_path);
        if (bench_cmd->parsed()) {
            return cmd_bench(bench_options, suite_path, difficulty, category, samples, k,
                             bench_out, csv_path);
        }
        if (dataset_cmd->parsed()) {
            return cmd_dataset(dataset_options, seeds_dir, mock, dataset_out, curation);
        }
        if (eval_cmd->parsed()) return cmd_eval_text(pred_path, ref_path, eval_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const SuiteError& e) {
        std::cerr << "suite error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    }
    return kExitUsage;
}
