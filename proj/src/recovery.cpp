// SPDX-License-Identifier: Apache-2.0
#include "btforge/recovery.hpp"

#include <nlohmann/json.hpp>

namespace btforge {
namespace {

std::string violations_as_context(const ValidationReport& report) {
    std::string out;
    for (const Violation& v : report.violations) {
        out += "- ";
        out += violation_code_name(v.code);
        out += " at ";
        out += path_to_string(v.node_path);
        out += ": ";
        out += v.message;
        out += "\n";
    }
    return out;
}

/// One validation loop: used for the initial candidate and for each
/// regeneration round (with a failure context appended to the prompt).
GenerationOutcome request_validated(const TaskSpec& task, Generator& gen,
                                    const RecoveryPolicy& policy,
                                    const std::string& extra_context) {
    GenerationOutcome outcome;
    PromptRecord base = build_prompt(task, gen.config());
    if (!extra_context.empty()) {
        base.input += "\n\n";
        base.input += extra_context;
    }

    std::string corrective;
    for (int attempt = 1; attempt <= policy.max_inference_retries; ++attempt) {
        PromptRecord prompt = base;
        if (!corrective.empty()) {
            prompt.input += "\n\nYour previous answer was rejected:\n";
            prompt.input += corrective;
            prompt.input += "Produce a corrected tree.";
        }

        GenerationResponse response = gen.generate(prompt);
        outcome.total_latency_seconds += response.latency_seconds;
        outcome.retries_used = attempt;

        CandidateRecord record;
        record.raw_text = response.raw_text;
        record.latency_seconds = response.latency_seconds;

        std::string xml;
        try {
            xml = extract_xml(response.raw_text);
        } catch (const ExtractError& e) {
            record.report.violations.push_back(
                Violation{ViolationCode::SyntaxError, {}, e.what()});
            corrective = violations_as_context(record.report);
            outcome.history.push_back(std::move(record));
            continue;
        }

        auto [report, tree] = validate(xml, task.manifest);
        record.report = report;
        outcome.history.push_back(std::move(record));
        if (tree) {
            outcome.tree = std::move(tree);
            return outcome;
        }
        corrective = violations_as_context(report);
    }
    return outcome;
}

}  // namespace

GenerationOutcome generate_validated(const TaskSpec& task, Generator& gen,
                                     const RecoveryPolicy& policy) {
    return request_validated(task, gen, policy, "");
}

Escalation escalate(const FailureReport& report, const BehaviorTree& tree,
                    const TaskSpec& task, RegenScope scope) {
    // Throws PathError when the report no longer matches the tree.
    const BTNode& failed = node_at(tree, report.node_path);

    Escalation escalation;
    if (scope == RegenScope::FailedSubtree && !report.node_path.empty()) {
        escalation.subtree_path = {report.node_path.front()};
    }
    // WholeTree scope and degenerate single-node trees regenerate the root.

    std::string context = "The tree below failed while executing.\n";
    context += "Task: " + task.description + "\n";
    context += "Available primitives:\n" + render_action_list(task.manifest);
    context += "Failed node: " + report.node_names + " (leaf '" + failed.id + "', path " +
               path_to_string(report.node_path) + ", tick " +
               std::to_string(report.tick_index) + ")\n";
    if (!report.env_message.empty()) {
        context += "Environment said: " + report.env_message + "\n";
    }
    if (!report.blackboard_snapshot.entries().empty()) {
        context += "Blackboard at failure:\n";
        for (const auto& [key, value] : report.blackboard_snapshot.entries()) {
            context += "  " + key + " = " + blackboard_value_to_string(value) + "\n";
        }
    }
    context += "Failing subtree:\n";
    context += serialize_bt(BehaviorTree{"FailingSubtree", node_at(tree, escalation.subtree_path)});
    context += "Respond with a replacement for that subtree as a complete "
               "<root><BehaviorTree ID=\"Regen\">...</BehaviorTree></root> document.";
    escalation.context = std::move(context);
    return escalation;
}

std::string_view pipeline_status_name(PipelineStatus s) {
    switch (s) {
        case PipelineStatus::Succeeded: return "Succeeded";
        case PipelineStatus::GenerationExhausted: return "GenerationExhausted";
        case PipelineStatus::RegenExhausted: return "RegenExhausted";
    }
    return "RegenExhausted";
}

const CandidateRecord* PipelineOutcome::committed_candidate() const {
    for (const CandidateRecord& record : history) {
        if (record.accepted()) return &record;
    }
    return history.empty() ? nullptr : &history.front();
}

std::string PipelineOutcome::to_json() const {
    nlohmann::ordered_json doc;
    doc["status"] = std::string(pipeline_status_name(status));
    doc["succeeded"] = succeeded();
    doc["inference_retries_used"] = inference_retries_used;
    doc["regen_rounds_used"] = regen_rounds_used;
    doc["total_latency_seconds"] = total_latency_seconds;
    if (final_tree) doc["final_tree"] = serialize_bt(*final_tree);
    if (result) {
        doc["execution"] = {
            {"final_status", std::string(tick_status_name(result->final_status))},
            {"ticks_used", result->ticks_used},
            {"failure_reports", result->failure_reports.size()},
        };
    }
    doc["history"] = nlohmann::ordered_json::array();
    for (const CandidateRecord& record : history) {
        doc["history"].push_back({
            {"accepted", record.accepted()},
            {"violations", record.report.violations.size()},
            {"latency_seconds", record.latency_seconds},
        });
    }
    return doc.dump(2);
}

PipelineOutcome run_with_recovery(const TaskSpec& task, Generator& gen,
                                  EnvironmentAdapter& env, const RecoveryPolicy& policy) {
    PipelineOutcome outcome;

    GenerationOutcome initial = generate_validated(task, gen, policy);
    outcome.inference_retries_used = initial.retries_used;
    outcome.total_latency_seconds += initial.total_latency_seconds;
    outcome.history = std::move(initial.history);
    if (initial.exhausted()) {
        outcome.status = PipelineStatus::GenerationExhausted;
        return outcome;
    }

    BehaviorTree tree = std::move(*initial.tree);
    env.reset();
    ExecutionResult result = execute(tree, env, policy.tick_budget);

    while (result.final_status == TickStatus::Failure &&
           outcome.regen_rounds_used < policy.max_regen_rounds) {
        // A Failure here has, by definition, propagated past every local
        // recovery in the tree, so a regeneration round begins.
        const FailureReport& report = result.failure_reports.back();
        Escalation escalation = escalate(report, tree, task, policy.regen_scope);

        GenerationOutcome regen = request_validated(task, gen, policy, escalation.context);
        outcome.total_latency_seconds += regen.total_latency_seconds;
        for (CandidateRecord& record : regen.history) {
            outcome.history.push_back(std::move(record));
        }
        if (regen.exhausted()) {
            outcome.status = PipelineStatus::GenerationExhausted;
            outcome.final_tree = std::move(tree);
            outcome.result = std::move(result);
            return outcome;
        }

        tree = splice_subtree(tree, escalation.subtree_path, regen.tree->root);
        ++outcome.regen_rounds_used;
        env.reset();
        result = execute(tree, env, policy.tick_budget);
    }

    outcome.status = result.succeeded() ? PipelineStatus::Succeeded
                                        : PipelineStatus::RegenExhausted;
    outcome.final_tree = std::move(tree);
    outcome.result = std::move(result);
    return outcome;
}

}  // namespace btforge
