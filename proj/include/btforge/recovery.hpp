// SPDX-License-Identifier: Apache-2.0
//
// The two recovery loops: the inference-time retry loop (reject and
// regenerate until the validator accepts) and the runtime regeneration loop
// (escalate a propagated failure, splice a regenerated subtree, reset the
// environment and re-execute).
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "btforge/executor.hpp"
#include "btforge/generator.hpp"
#include "btforge/task.hpp"
#include "btforge/validator.hpp"

namespace btforge {

enum class RegenScope { FailedSubtree, WholeTree };

struct RecoveryPolicy {
    /// Candidate generations allowed per validation loop (>= 1).
    int max_inference_retries = 5;
    /// Runtime regeneration rounds allowed; 0 disables runtime recovery.
    int max_regen_rounds = 3;
    RegenScope regen_scope = RegenScope::FailedSubtree;
    int tick_budget = kDefaultTickBudget;

    /// The plain, no-recovery baseline: one candidate, no regeneration.
    static RecoveryPolicy disabled() {
        return RecoveryPolicy{1, 0, RegenScope::FailedSubtree, kDefaultTickBudget};
    }
};

struct CandidateRecord {
    std::string raw_text;
    ValidationReport report;
    double latency_seconds = 0.0;

    bool accepted() const { return report.accepted(); }
};

/// Outcome of the validated-generation loop.
struct GenerationOutcome {
    std::optional<BehaviorTree> tree;
    int retries_used = 0;
    std::vector<CandidateRecord> history;
    double total_latency_seconds = 0.0;

    bool exhausted() const { return !tree.has_value(); }
};

/// Requests candidates until one passes the validator, at most
/// policy.max_inference_retries times. Each retry carries the previous
/// violations as corrective context. An exhausted budget returns the full
/// history with no tree.
GenerationOutcome generate_validated(const TaskSpec& task, Generator& gen,
                                     const RecoveryPolicy& policy);

struct Escalation {
    NodePath subtree_path;
    std::string context;  // failure context given to the generator
};

/// Picks the regeneration target for a propagated failure: the ancestor of
/// the failed leaf sitting directly under the root (the root itself for a
/// degenerate tree or WholeTree scope) and bundles the failure context.
/// Throws PathError when the report's path is stale.
Escalation escalate(const FailureReport& report, const BehaviorTree& tree,
                    const TaskSpec& task, RegenScope scope = RegenScope::FailedSubtree);

enum class PipelineStatus {
    Succeeded,
    GenerationExhausted,  // no candidate ever passed validation
    RegenExhausted,       // execution still failing after the regen budget
};

std::string_view pipeline_status_name(PipelineStatus s);

struct PipelineOutcome {
    PipelineStatus status = PipelineStatus::RegenExhausted;
    std::optional<BehaviorTree> final_tree;
    std::optional<ExecutionResult> result;
    int inference_retries_used = 0;  // retries spent on the initial candidate
    int regen_rounds_used = 0;
    std::vector<CandidateRecord> history;  // every candidate seen, in order
    double total_latency_seconds = 0.0;

    bool succeeded() const { return status == PipelineStatus::Succeeded; }
    /// The candidate the pipeline committed to executing (first accepted
    /// entry), or the first raw candidate when nothing was ever accepted.
    const CandidateRecord* committed_candidate() const;

    std::string to_json() const;
};

/// Full pipeline: generate a validated tree, execute it, and while execution
/// fails and regen rounds remain, escalate, regenerate the subtree, validate
/// it, splice it in, reset the environment and re-execute.
PipelineOutcome run_with_recovery(const TaskSpec& task, Generator& gen,
                                  EnvironmentAdapter& env, const RecoveryPolicy& policy);

}  // namespace btforge
