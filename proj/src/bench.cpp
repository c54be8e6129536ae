// SPDX-License-Identifier: Apache-2.0
#include "btforge/bench.hpp"

#include <yaml-cpp/yaml.h>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <thread>

namespace btforge {

std::string_view category_name(TaskCategory c) {
    return c == TaskCategory::Navigation ? "navigation" : "manipulation";
}

std::string_view difficulty_name(TaskDifficulty d) {
    switch (d) {
        case TaskDifficulty::Easy: return "easy";
        case TaskDifficulty::Medium: return "medium";
        case TaskDifficulty::Hard: return "hard";
    }
    return "easy";
}

}  // namespace btforge

namespace btforge::bench {

namespace fs = std::filesystem;

namespace {

TaskCategory category_from_name(const std::string& name) {
    if (name == "navigation" || name == "nav") return TaskCategory::Navigation;
    if (name == "manipulation" || name == "manip") return TaskCategory::Manipulation;
    throw SuiteError("unknown category '" + name + "'");
}

TaskDifficulty difficulty_from_name(const std::string& name) {
    if (name == "easy") return TaskDifficulty::Easy;
    if (name == "medium") return TaskDifficulty::Medium;
    if (name == "hard") return TaskDifficulty::Hard;
    throw SuiteError("unknown difficulty '" + name + "'");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SuiteError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string format_seconds(double seconds) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(2);
    out << seconds << "s";
    return out.str();
}

}  // namespace

TaskSpec load_task(const std::string& yaml_text, const std::string& base_dir) {
    YAML::Node doc;
    try {
        doc = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw SuiteError(std::string("malformed task YAML: ") + e.what());
    }
    if (!doc.IsMap()) throw SuiteError("task file must be a YAML map");

    TaskSpec task;
    try {
        if (!doc["id"]) throw SuiteError("task requires an 'id'");
        task.id = doc["id"].as<std::string>();
        if (!doc["category"]) throw SuiteError("task requires a 'category'");
        task.category = category_from_name(doc["category"].as<std::string>());
        if (!doc["difficulty"]) throw SuiteError("task requires a 'difficulty'");
        task.difficulty = difficulty_from_name(doc["difficulty"].as<std::string>());
        if (!doc["description"]) throw SuiteError("task requires a 'description'");
        task.description = doc["description"].as<std::string>();
        if (task.description.empty()) throw SuiteError("task description must be non-empty");

        if (!doc["manifest"]) throw SuiteError("task requires a 'manifest'");
        if (doc["manifest"].IsScalar()) {
            fs::path ref = doc["manifest"].as<std::string>();
            if (ref.is_relative() && !base_dir.empty()) ref = fs::path(base_dir) / ref;
            task.manifest_ref = ref.string();
            task.manifest = load_manifest_file(task.manifest_ref);
        } else {
            task.manifest = load_manifest(YAML::Dump(doc["manifest"]));
        }

        if (!doc["world"]) throw SuiteError("task requires a 'world'");
        task.world_spec = sim::load_world(YAML::Dump(doc["world"]));
        if (!doc["goal"]) throw SuiteError("task requires a 'goal'");
        task.goal = sim::load_goal(YAML::Dump(doc["goal"]));

        if (doc["exemplar"]) {
            PromptRecord exemplar;
            exemplar.input = doc["exemplar"]["input"].as<std::string>();
            exemplar.output = doc["exemplar"]["output"].as<std::string>();
            task.one_shot_exemplar = std::move(exemplar);
        }
    } catch (const SuiteError&) {
        throw;
    } catch (const Error& e) {
        throw SuiteError("task '" + task.id + "': " + e.what());
    } catch (const YAML::Exception& e) {
        throw SuiteError("task '" + task.id + "': malformed field: " + e.what());
    }

    // The goal must be evaluable against this world type.
    for (const sim::GoalAtom& atom : task.goal.atoms) {
        const bool nav_atom = atom.kind == sim::GoalAtom::Kind::RobotAt ||
                              atom.kind == sim::GoalAtom::Kind::VisitedInOrder ||
                              atom.kind == sim::GoalAtom::Kind::Docked ||
                              atom.kind == sim::GoalAtom::Kind::BatteryAtLeast;
        const bool is_nav = std::holds_alternative<sim::NavWorld>(task.world_spec);
        if (nav_atom != is_nav) {
            throw SuiteError("task '" + task.id + "': goal atom does not match world type");
        }
    }
    return task;
}

TaskSpec load_task_file(const std::string& path) {
    return load_task(read_file(path), fs::path(path).parent_path().string());
}

std::vector<TaskSpec> load_suite(const std::string& dir_or_file) {
    std::vector<std::string> files;
    if (fs::is_directory(dir_or_file)) {
        for (const auto& entry : fs::directory_iterator(dir_or_file)) {
            if (entry.path().extension() == ".yaml" || entry.path().extension() == ".yml") {
                files.push_back(entry.path().string());
            }
        }
        std::sort(files.begin(), files.end());
    } else if (fs::exists(dir_or_file)) {
        files.push_back(dir_or_file);
    } else {
        throw SuiteError("suite path '" + dir_or_file + "' does not exist");
    }

    std::vector<TaskSpec> tasks;
    std::set<std::string> seen;
    for (const std::string& file : files) {
        TaskSpec task = load_task_file(file);
        if (!seen.insert(task.id).second) {
            throw SuiteError("duplicate task id '" + task.id + "' in " + file);
        }
        tasks.push_back(std::move(task));
    }
    return tasks;
}

double pass_at_k(int n, int c, int k) {
    if (c < 0 || c > n) throw DomainError("pass_at_k requires 0 <= c <= n");
    if (k < 1 || k > n) throw DomainError("pass_at_k requires 1 <= k <= n");
    if (n - c < k) return 1.0;  // every size-k subset contains a correct sample
    double prod = 1.0;
    for (int i = 0; i < k; ++i) {
        prod *= static_cast<double>(n - c - i) / static_cast<double>(n - i);
    }
    return 1.0 - prod;
}

TaskResult run_task(const TaskSpec& task, Generator& gen, const RecoveryPolicy& policy,
                    int n_samples, int k) {
    if (n_samples < 1 || k < 1 || n_samples < k) {
        throw DomainError("run_task requires n_samples >= k >= 1");
    }

    TaskResult result;
    result.task_id = task.id;
    result.category = task.category;
    result.difficulty = task.difficulty;

    int correct = 0;
    double latency_sum = 0.0;
    for (int i = 0; i < n_samples; ++i) {
        bool sample_correct = false;
        try {
            sim::SimEnvironment env(task.world_spec, task.manifest);
            PipelineOutcome outcome = run_with_recovery(task, gen, env, policy);
            sample_correct =
                outcome.succeeded() && sim::evaluate_goal(env.world(), task.goal);
            latency_sum += outcome.total_latency_seconds;

            if (i == 0) {
                result.success = sample_correct;
                if (const CandidateRecord* cand = outcome.committed_candidate()) {
                    try {
                        std::string xml = extract_xml(cand->raw_text);
                        result.xml_valid = xml_syntax_ok(xml);
                        result.action_coherent = action_coherent(xml, task.manifest);
                    } catch (const ExtractError&) {
                        result.xml_valid = false;
                        result.action_coherent = false;
                    }
                }
            }
            result.samples.push_back(std::move(outcome));
        } catch (const Error& e) {
            // Transport or environment trouble counts as a failed sample and
            // never aborts the suite.
            result.error = e.what();
            result.samples.push_back(PipelineOutcome{});
        }
        if (sample_correct) ++correct;
    }

    result.pass_at_k[k] = pass_at_k(n_samples, correct, k);
    result.inference_time_seconds = latency_sum / n_samples;
    return result;
}

std::vector<TaskResult> run_suite(const std::vector<TaskSpec>& tasks,
                                  const GeneratorFactory& factory, const RunOptions& options) {
    std::vector<TaskResult> results(tasks.size());
    const int workers =
        std::max(1, std::min<int>(options.workers, static_cast<int>(tasks.size())));

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t index = next.fetch_add(1);
            if (index >= tasks.size()) return;
            const TaskSpec& task = tasks[index];
            try {
                std::unique_ptr<Generator> gen = factory(task);
                results[index] =
                    run_task(task, *gen, options.policy, options.n_samples, options.k);
            } catch (const Error& e) {
                TaskResult failed;
                failed.task_id = task.id;
                failed.category = task.category;
                failed.difficulty = task.difficulty;
                failed.error = e.what();
                failed.pass_at_k[options.k] = 0.0;
                results[index] = std::move(failed);
            }
        }
    };

    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    return results;
}

std::string percent_string(long long numerator, long long denominator) {
    if (denominator == 0) return "0.00%";
    // Exact rational, truncated (not rounded) at two decimals: 51/52 is
    // 98.0769..% and renders as "98.07%".
    long long scaled = numerator * 10000 / denominator;
    std::ostringstream out;
    out << scaled / 100 << ".";
    out.width(2);
    out.fill('0');
    out << scaled % 100 << "%";
    return out.str();
}

BenchReport emit_report(std::vector<TaskResult> results) {
    BenchReport report;
    report.results = std::move(results);
    for (const TaskResult& r : report.results) {
        ++report.total_tasks;
        if (r.success) ++report.total_successes;
        if (r.action_coherent) ++report.coherent_count;
        if (r.xml_valid) ++report.xml_valid_count;

        double p_at_k = r.pass_at_k.empty() ? 0.0 : r.pass_at_k.begin()->second;
        auto& by_diff = report.by_difficulty[r.difficulty];
        ++by_diff.tasks;
        by_diff.successes += r.success ? 1 : 0;
        by_diff.pass_at_k_sum += p_at_k;
        by_diff.time_sum += r.inference_time_seconds;

        auto& by_group = report.by_group[{r.category, r.difficulty}];
        ++by_group.tasks;
        by_group.successes += r.success ? 1 : 0;
        by_group.pass_at_k_sum += p_at_k;
        by_group.time_sum += r.inference_time_seconds;
    }
    return report;
}

namespace {

bool pass_values_integral(const std::vector<TaskResult>& results, TaskDifficulty d,
                          int& passed, int& total) {
    passed = 0;
    total = 0;
    bool integral = true;
    for (const TaskResult& r : results) {
        if (r.difficulty != d) continue;
        ++total;
        double v = r.pass_at_k.empty() ? 0.0 : r.pass_at_k.begin()->second;
        if (v == 1.0) {
            ++passed;
        } else if (v != 0.0) {
            integral = false;
        }
    }
    return integral;
}

}  // namespace

std::string BenchReport::to_json() const {
    nlohmann::ordered_json doc;
    doc["tasks"] = nlohmann::ordered_json::array();
    for (const TaskResult& r : results) {
        nlohmann::ordered_json entry;
        entry["id"] = r.task_id;
        entry["category"] = std::string(category_name(r.category));
        entry["difficulty"] = std::string(difficulty_name(r.difficulty));
        entry["success"] = r.success;
        for (const auto& [k, v] : r.pass_at_k) {
            entry["pass_at_" + std::to_string(k)] = v;
        }
        entry["inference_time_seconds"] = r.inference_time_seconds;
        entry["action_coherent"] = r.action_coherent;
        entry["xml_valid"] = r.xml_valid;
        if (!r.error.empty()) entry["error"] = r.error;
        nlohmann::ordered_json samples = nlohmann::ordered_json::array();
        for (const PipelineOutcome& sample : r.samples) {
            samples.push_back({
                {"status", std::string(pipeline_status_name(sample.status))},
                {"inference_retries_used", sample.inference_retries_used},
                {"regen_rounds_used", sample.regen_rounds_used},
            });
        }
        entry["samples"] = std::move(samples);
        doc["tasks"].push_back(std::move(entry));
    }

    nlohmann::ordered_json aggregates;
    for (const auto& [difficulty, agg] : by_difficulty) {
        nlohmann::ordered_json group;
        group["tasks"] = agg.tasks;
        group["successes"] = agg.successes;
        group["sr"] = percent_string(agg.successes, agg.tasks);
        group["mean_pass_at_k"] = agg.mean_pass_at_k();
        group["mean_time_seconds"] = agg.mean_time();
        aggregates[std::string(difficulty_name(difficulty))] = std::move(group);
    }
    for (const auto& [key, agg] : by_group) {
        nlohmann::ordered_json group;
        group["tasks"] = agg.tasks;
        group["successes"] = agg.successes;
        group["sr"] = percent_string(agg.successes, agg.tasks);
        std::string name = std::string(category_name(key.first)) + "/" +
                           std::string(difficulty_name(key.second));
        aggregates[name] = std::move(group);
    }
    aggregates["overall"] = {
        {"tasks", total_tasks},
        {"successes", total_successes},
        {"avg_sr", percent_string(total_successes, total_tasks)},
        {"action_coherency", percent_string(coherent_count, total_tasks)},
        {"xml_syntax", percent_string(xml_valid_count, total_tasks)},
    };
    doc["aggregates"] = std::move(aggregates);
    return doc.dump(2);
}

std::string BenchReport::to_csv() const {
    static const TaskDifficulty order[] = {TaskDifficulty::Easy, TaskDifficulty::Medium,
                                           TaskDifficulty::Hard};
    std::string header;
    std::string row;
    for (TaskDifficulty d : order) {
        std::string suffix = "(";
        suffix += static_cast<char>(std::toupper(difficulty_name(d)[0]));
        suffix += ")";
        header += "SR " + suffix + ",P@k " + suffix + ",Time " + suffix + ",";

        auto it = by_difficulty.find(d);
        if (it == by_difficulty.end()) {
            row += ",,,";
            continue;
        }
        const GroupAggregate& agg = it->second;
        row += std::to_string(agg.successes) + " / " + std::to_string(agg.tasks) + ",";
        int passed = 0;
        int total = 0;
        if (pass_values_integral(results, d, passed, total)) {
            row += std::to_string(passed) + " / " + std::to_string(total) + ",";
        } else {
            double mean = agg.mean_pass_at_k();
            row += percent_string(static_cast<long long>(mean * 1000000), 1000000) + ",";
        }
        row += format_seconds(agg.mean_time()) + ",";
    }
    header += "Avg SR,Action Coherency,XML Syntax\n";
    row += percent_string(total_successes, total_tasks) + ",";
    row += percent_string(coherent_count, total_tasks) + ",";
    row += percent_string(xml_valid_count, total_tasks) + "\n";
    return header + row;
}

}  // namespace btforge::bench
