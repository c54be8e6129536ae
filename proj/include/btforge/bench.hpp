// SPDX-License-Identifier: Apache-2.0
//
// The standardized benchmark harness: task suite loading, the functional
// and non-functional metrics, and the report emitter.
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "btforge/recovery.hpp"
#include "btforge/task.hpp"

namespace btforge::bench {

/// Parses one task YAML document. `base_dir` resolves relative manifest
/// paths. Throws SuiteError on malformed input.
TaskSpec load_task(const std::string& yaml_text, const std::string& base_dir = "");

TaskSpec load_task_file(const std::string& path);

/// Loads every task from a directory of *.yaml files (sorted by filename)
/// or from a single file. Throws SuiteError on duplicate ids.
std::vector<TaskSpec> load_suite(const std::string& dir_or_file);

/// Unbiased pass@k estimator 1 - C(n-c,k)/C(n,k), evaluated in product form.
/// Requires 0 <= c <= n and 1 <= k <= n; throws DomainError otherwise.
double pass_at_k(int n, int c, int k);

struct TaskResult {
    std::string task_id;
    TaskCategory category = TaskCategory::Navigation;
    TaskDifficulty difficulty = TaskDifficulty::Easy;
    /// SR: the first sample's pipeline succeeded and reached the goal.
    bool success = false;
    std::map<int, double> pass_at_k;  // k -> estimate
    double inference_time_seconds = 0.0;  // mean generation latency per sample
    /// Measured on the candidate the pipeline committed to (the first
    /// accepted candidate, or the first raw one when none was accepted), so
    /// the inference-time validator's effect on these is visible.
    bool action_coherent = false;
    bool xml_valid = false;
    std::vector<PipelineOutcome> samples;
    std::string error;  // transport/suite error recorded instead of aborting
};

/// Generator factory; the harness requests one generator per task so scripted
/// runs can key scripts by task id and workers never share transports.
using GeneratorFactory = std::function<std::unique_ptr<Generator>(const TaskSpec&)>;

/// Draws n_samples independent pipeline runs over fresh environments and
/// derives every per-task metric. Never throws; failures land in `error`.
TaskResult run_task(const TaskSpec& task, Generator& gen, const RecoveryPolicy& policy,
                    int n_samples, int k);

struct RunOptions {
    RecoveryPolicy policy;
    int n_samples = 3;
    int k = 3;
    int workers = 1;
};

std::vector<TaskResult> run_suite(const std::vector<TaskSpec>& tasks,
                                  const GeneratorFactory& factory, const RunOptions& options);

struct GroupAggregate {
    int tasks = 0;
    int successes = 0;
    double pass_at_k_sum = 0.0;
    double time_sum = 0.0;

    double mean_pass_at_k() const { return tasks ? pass_at_k_sum / tasks : 0.0; }
    double mean_time() const { return tasks ? time_sum / tasks : 0.0; }
};

struct BenchReport {
    std::vector<TaskResult> results;
    std::map<TaskDifficulty, GroupAggregate> by_difficulty;
    std::map<std::pair<TaskCategory, TaskDifficulty>, GroupAggregate> by_group;
    int total_tasks = 0;
    int total_successes = 0;
    int coherent_count = 0;
    int xml_valid_count = 0;

    std::string to_json() const;
    /// Columns mirror the evaluation table: SR/P@k/Time per difficulty, then
    /// the average SR and the non-functional percentages.
    std::string to_csv() const;
};

BenchReport emit_report(std::vector<TaskResult> results);

/// Renders 100*numerator/denominator truncated (not rounded) to two
/// decimals, the convention the reported percentages follow:
/// 47/52 -> "90.38%", 51/52 -> "98.07%".
std::string percent_string(long long numerator, long long denominator);

}  // namespace btforge::bench
