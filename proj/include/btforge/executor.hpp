// SPDX-License-Identifier: Apache-2.0
//
// Deterministic tick engine over a validated behavior tree.
//
// Tick semantics (one root tick per engine step, children ticked left to
// right, all within the calling thread):
//   Sequence (memory)   resumes at the running child; any child Failure
//                       resets the node and fails it; all Success succeeds.
//   Fallback (memory)   dual of Sequence.
//   ReactiveFallback    restarts from the first child every tick; a child
//                       returning Running halts every child after it.
//   Parallel            ticks each non-completed child once per tick and
//                       latches terminal results; Success once
//                       success_threshold children have succeeded (checked
//                       before failure_threshold), Failure once
//                       failure_threshold have failed; resets on completion.
//   Inverter            swaps Success and Failure.
//   RetryUntilSuccessful(n)  re-ticks its child within the same tick after a
//                       Failure; the n-th child failure fails the node.
//   Repeat(n)           re-ticks after Success within the same tick; n child
//                       successes succeed the node, any Failure fails it.
//   Timeout(t)          counts child ticks per activation; a child still
//                       Running on its t-th tick is halted and the node
//                       fails.
//   ForceSuccess/ForceFailure  coerce the child's terminal status.
//
// Every leaf Failure produces a FailureReport. A Failure that a decorator
// creates on its own (Timeout expiry, Inverter flipping Success, the Force
// coercions) synthesizes a report at the last leaf ticked inside its
// subtree, so a failed run always carries a leaf-terminated report.
#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "btforge/bt_model.hpp"
#include "btforge/errors.hpp"

namespace btforge {

enum class TickStatus { Success, Failure, Running };

std::string_view tick_status_name(TickStatus s);

using BlackboardValue = std::variant<std::string, double, bool>;

std::string blackboard_value_to_string(const BlackboardValue& v);

/// Shared key-value store read and written through leaf ports.
class Blackboard {
public:
    void set(const std::string& key, BlackboardValue value);
    const BlackboardValue* get(const std::string& key) const;
    std::optional<std::string> get_text(const std::string& key) const;
    const std::map<std::string, BlackboardValue>& entries() const { return entries_; }
    void clear() { entries_.clear(); }

    friend bool operator==(const Blackboard&, const Blackboard&) = default;

private:
    std::map<std::string, BlackboardValue> entries_;
};

/// Ports after blackboard resolution: literals verbatim, references replaced
/// by the referenced value. References to missing keys are absent here.
using ResolvedPorts = std::map<std::string, std::string>;

/// Everything a leaf handler gets to see for one tick.
struct LeafContext {
    const BTNode& leaf;
    const ResolvedPorts& ports;
    Blackboard& blackboard;
    int tick_index;
};

/// Environment side of the engine. One adapter instance per executor run;
/// adapters are never shared across concurrent executors.
class EnvironmentAdapter {
public:
    virtual ~EnvironmentAdapter() = default;

    virtual bool has_handler(const std::string& leaf_id) const = 0;

    /// Applies one leaf tick. `message` may be filled with an environment
    /// explanation (reported on Failure). Conditions must not mutate the
    /// environment and must not return Running.
    virtual TickStatus tick_leaf(const LeafContext& ctx, std::string& message) = 0;

    /// Restores the environment to its initial state.
    virtual void reset() = 0;
};

/// The runtime "stack trace": where and when a leaf failed.
struct FailureReport {
    NodePath node_path;
    std::string node_names;  // rendered root-to-leaf path
    std::string failed_leaf;
    Blackboard blackboard_snapshot;
    int tick_index = 0;
    std::string env_message;
};

struct TraceEntry {
    int tick_index;
    NodePath node_path;
    TickStatus status;

    friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct ExecutionResult {
    TickStatus final_status = TickStatus::Failure;  // never Running
    int ticks_used = 0;
    std::vector<FailureReport> failure_reports;
    std::vector<TraceEntry> trace;

    bool succeeded() const { return final_status == TickStatus::Success; }

    /// JSON-lines trace export, one record per trace entry.
    std::string trace_to_jsonl() const;
};

inline constexpr int kDefaultTickBudget = 10000;

using FailureSink = std::function<void(const FailureReport&)>;

/// Executes one tree against one environment. Single-threaded for its run;
/// distinct executors over distinct environments may run in parallel.
class TreeExecutor {
public:
    TreeExecutor(const BehaviorTree& tree, EnvironmentAdapter& env);
    ~TreeExecutor();

    /// Registers a sink that receives each FailureReport synchronously at
    /// the tick where the failure occurs.
    void subscribe_logger(FailureSink sink);

    Blackboard& blackboard() { return blackboard_; }

    /// Ticks the root until it returns a terminal status or the budget runs
    /// out (which counts as Failure with a synthetic report). Throws
    /// AdapterError when the environment lacks a binding for a leaf.
    ExecutionResult run(int max_ticks = kDefaultTickBudget);

private:
    struct Runtime;

    TickStatus tick_node(Runtime& node, NodePath& path);
    TickStatus tick_leaf(Runtime& node, const NodePath& path);
    void record(const NodePath& path, TickStatus status);
    void report_leaf_failure(const NodePath& path, const std::string& leaf_id,
                             const std::string& message);
    void synthesize_failure(const Runtime& subtree, const std::string& message);

    const BehaviorTree& tree_;
    EnvironmentAdapter& env_;
    Blackboard blackboard_;
    std::vector<FailureSink> sinks_;
    std::unique_ptr<Runtime> root_;
    ExecutionResult result_;
    int tick_index_ = 0;
    std::optional<NodePath> last_leaf_ticked_;
    std::optional<NodePath> last_running_leaf_;
};

/// One-shot convenience wrapper around TreeExecutor.
ExecutionResult execute(const BehaviorTree& tree, EnvironmentAdapter& env,
                        int max_ticks = kDefaultTickBudget);

}  // namespace btforge
