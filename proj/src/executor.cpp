// SPDX-License-Identifier: Apache-2.0
#include "btforge/executor.hpp"

#include <nlohmann/json.hpp>

#include <set>
#include <sstream>

namespace btforge {

std::string_view tick_status_name(TickStatus s) {
    switch (s) {
        case TickStatus::Success: return "Success";
        case TickStatus::Failure: return "Failure";
        case TickStatus::Running: return "Running";
    }
    return "Failure";
}

std::string blackboard_value_to_string(const BlackboardValue& v) {
    if (const auto* text = std::get_if<std::string>(&v)) return *text;
    if (const auto* num = std::get_if<double>(&v)) {
        std::ostringstream out;
        out << *num;
        return out.str();
    }
    return std::get<bool>(v) ? "true" : "false";
}

void Blackboard::set(const std::string& key, BlackboardValue value) {
    if (!PortValue::valid_key(key)) {
        throw Error("invalid blackboard key '" + key + "'");
    }
    entries_[key] = std::move(value);
}

const BlackboardValue* Blackboard::get(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

std::optional<std::string> Blackboard::get_text(const std::string& key) const {
    const BlackboardValue* v = get(key);
    if (!v) return std::nullopt;
    return blackboard_value_to_string(*v);
}

std::string ExecutionResult::trace_to_jsonl() const {
    std::string out;
    for (const TraceEntry& entry : trace) {
        nlohmann::ordered_json record;
        record["tick"] = entry.tick_index;
        record["path"] = entry.node_path;
        record["status"] = std::string(tick_status_name(entry.status));
        out += record.dump();
        out += "\n";
    }
    return out;
}

struct TreeExecutor::Runtime {
    const BTNode* node = nullptr;
    std::vector<Runtime> children;
    std::size_t cursor = 0;                            // memory composites
    int failures = 0;                                  // RetryUntilSuccessful
    int successes = 0;                                 // Repeat
    int child_ticks = 0;                               // Timeout
    std::vector<std::optional<TickStatus>> latched;    // Parallel

    static Runtime build(const BTNode& n) {
        Runtime rt;
        rt.node = &n;
        rt.children.reserve(n.children.size());
        for (const BTNode& child : n.children) rt.children.push_back(build(child));
        return rt;
    }

    void reset_state() {
        cursor = 0;
        failures = 0;
        successes = 0;
        child_ticks = 0;
        latched.assign(latched.size(), std::nullopt);
        for (Runtime& child : children) child.reset_state();
    }
};

TreeExecutor::TreeExecutor(const BehaviorTree& tree, EnvironmentAdapter& env)
    : tree_(tree), env_(env), root_(std::make_unique<Runtime>(Runtime::build(tree.root))) {}

TreeExecutor::~TreeExecutor() = default;

void TreeExecutor::subscribe_logger(FailureSink sink) {
    sinks_.push_back(std::move(sink));
}

void TreeExecutor::record(const NodePath& path, TickStatus status) {
    result_.trace.push_back(TraceEntry{tick_index_, path, status});
}

void TreeExecutor::report_leaf_failure(const NodePath& path, const std::string& leaf_id,
                                       const std::string& message) {
    FailureReport report;
    report.node_path = path;
    report.node_names = describe_path(tree_, path);
    report.failed_leaf = leaf_id;
    report.blackboard_snapshot = blackboard_;
    report.tick_index = tick_index_;
    report.env_message = message;
    result_.failure_reports.push_back(report);
    for (const FailureSink& sink : sinks_) sink(result_.failure_reports.back());
}

void TreeExecutor::synthesize_failure(const Runtime&, const std::string& message) {
    // The engine is depth-first, so the most recent leaf tick happened inside
    // the subtree of whichever decorator is synthesizing right now.
    const NodePath& path = last_leaf_ticked_.value();
    const BTNode& leaf = node_at(tree_, path);
    report_leaf_failure(path, leaf.id, message);
}

TickStatus TreeExecutor::tick_leaf(Runtime& rt, const NodePath& path) {
    const BTNode& leaf = *rt.node;
    last_leaf_ticked_ = path;

    ResolvedPorts resolved;
    for (const auto& [name, value] : leaf.ports) {
        if (value.is_blackboard()) {
            if (auto text = blackboard_.get_text(value.text())) {
                resolved.emplace(name, *text);
            }
        } else {
            resolved.emplace(name, value.text());
        }
    }

    std::string message;
    TickStatus status = env_.tick_leaf(LeafContext{leaf, resolved, blackboard_, tick_index_},
                                       message);
    if (leaf.kind == NodeKind::Condition && status == TickStatus::Running) {
        throw AdapterError("condition '" + leaf.id + "' returned Running");
    }
    if (status == TickStatus::Failure) {
        report_leaf_failure(path, leaf.id, message);
    } else if (status == TickStatus::Running) {
        last_running_leaf_ = path;
    }
    return status;
}

TickStatus TreeExecutor::tick_node(Runtime& rt, NodePath& path) {
    const BTNode& node = *rt.node;
    const std::size_t n = rt.children.size();

    auto tick_child = [&](std::size_t i) {
        path.push_back(i);
        TickStatus s = tick_node(rt.children[i], path);
        path.pop_back();
        return s;
    };

    TickStatus status = TickStatus::Failure;
    switch (node.kind) {
        case NodeKind::Action:
        case NodeKind::Condition:
            status = tick_leaf(rt, path);
            break;

        case NodeKind::Sequence: {
            status = TickStatus::Success;
            while (rt.cursor < n) {
                TickStatus s = tick_child(rt.cursor);
                if (s == TickStatus::Running) {
                    status = s;
                    break;
                }
                if (s == TickStatus::Failure) {
                    rt.reset_state();
                    status = s;
                    break;
                }
                ++rt.cursor;
            }
            if (status == TickStatus::Success) rt.reset_state();
            break;
        }

        case NodeKind::Fallback: {
            status = TickStatus::Failure;
            while (rt.cursor < n) {
                TickStatus s = tick_child(rt.cursor);
                if (s == TickStatus::Running) {
                    status = s;
                    break;
                }
                if (s == TickStatus::Success) {
                    rt.reset_state();
                    status = s;
                    break;
                }
                ++rt.cursor;
            }
            if (status == TickStatus::Failure) rt.reset_state();
            break;
        }

        case NodeKind::ReactiveFallback: {
            status = TickStatus::Failure;
            for (std::size_t i = 0; i < n; ++i) {
                TickStatus s = tick_child(i);
                if (s == TickStatus::Success) {
                    rt.reset_state();
                    status = s;
                    break;
                }
                if (s == TickStatus::Running) {
                    for (std::size_t j = i + 1; j < n; ++j) rt.children[j].reset_state();
                    status = s;
                    break;
                }
            }
            if (status == TickStatus::Failure) rt.reset_state();
            break;
        }

        case NodeKind::Parallel: {
            if (rt.latched.size() != n) rt.latched.assign(n, std::nullopt);
            for (std::size_t i = 0; i < n; ++i) {
                if (rt.latched[i]) continue;
                TickStatus s = tick_child(i);
                if (s != TickStatus::Running) rt.latched[i] = s;
            }
            int successes = 0;
            int failures = 0;
            for (const auto& latched : rt.latched) {
                if (!latched) continue;
                if (*latched == TickStatus::Success) ++successes;
                if (*latched == TickStatus::Failure) ++failures;
            }
            if (successes >= node.success_threshold) {
                rt.reset_state();
                status = TickStatus::Success;
            } else if (failures >= node.failure_threshold) {
                rt.reset_state();
                status = TickStatus::Failure;
            } else {
                status = TickStatus::Running;
            }
            break;
        }

        case NodeKind::Inverter: {
            TickStatus s = tick_child(0);
            if (s == TickStatus::Running) {
                status = s;
            } else if (s == TickStatus::Success) {
                synthesize_failure(rt, "inverted child success");
                status = TickStatus::Failure;
            } else {
                status = TickStatus::Success;
            }
            break;
        }

        case NodeKind::RetryUntilSuccessful: {
            for (;;) {
                TickStatus s = tick_child(0);
                if (s == TickStatus::Running) {
                    status = s;
                    break;
                }
                if (s == TickStatus::Success) {
                    rt.reset_state();
                    status = s;
                    break;
                }
                ++rt.failures;
                if (rt.failures >= node.limit) {
                    rt.reset_state();
                    status = TickStatus::Failure;
                    break;
                }
            }
            break;
        }

        case NodeKind::Repeat: {
            for (;;) {
                TickStatus s = tick_child(0);
                if (s == TickStatus::Running) {
                    status = s;
                    break;
                }
                if (s == TickStatus::Failure) {
                    rt.reset_state();
                    status = s;
                    break;
                }
                ++rt.successes;
                if (rt.successes >= node.limit) {
                    rt.reset_state();
                    status = TickStatus::Success;
                    break;
                }
            }
            break;
        }

        case NodeKind::Timeout: {
            TickStatus s = tick_child(0);
            ++rt.child_ticks;
            if (s != TickStatus::Running) {
                rt.child_ticks = 0;
                status = s;
            } else if (rt.child_ticks >= node.limit) {
                rt.children[0].reset_state();
                rt.child_ticks = 0;
                synthesize_failure(rt, "timeout after " + std::to_string(node.limit) +
                                           " child ticks");
                status = TickStatus::Failure;
            } else {
                status = TickStatus::Running;
            }
            break;
        }

        case NodeKind::ForceSuccess: {
            TickStatus s = tick_child(0);
            status = (s == TickStatus::Running) ? TickStatus::Running : TickStatus::Success;
            break;
        }

        case NodeKind::ForceFailure: {
            TickStatus s = tick_child(0);
            if (s == TickStatus::Running) {
                status = TickStatus::Running;
            } else {
                if (s == TickStatus::Success) {
                    synthesize_failure(rt, "forced failure");
                }
                status = TickStatus::Failure;
            }
            break;
        }
    }

    record(path, status);
    return status;
}

ExecutionResult TreeExecutor::run(int max_ticks) {
    if (max_ticks < 1) throw DomainError("tick budget must be >= 1");

    std::set<std::string> missing;
    std::vector<const BTNode*> stack{&tree_.root};
    while (!stack.empty()) {
        const BTNode* node = stack.back();
        stack.pop_back();
        if (is_leaf(node->kind) && !env_.has_handler(node->id)) {
            missing.insert(node->id);
        }
        for (const BTNode& child : node->children) stack.push_back(&child);
    }
    if (!missing.empty()) {
        std::string ids;
        for (const std::string& id : missing) {
            if (!ids.empty()) ids += ", ";
            ids += id;
        }
        throw AdapterError("environment has no binding for: " + ids);
    }

    result_ = ExecutionResult{};
    root_->reset_state();
    last_leaf_ticked_.reset();
    last_running_leaf_.reset();

    for (tick_index_ = 1; tick_index_ <= max_ticks; ++tick_index_) {
        NodePath path;
        TickStatus status = tick_node(*root_, path);
        if (status != TickStatus::Running) {
            result_.final_status = status;
            result_.ticks_used = tick_index_;
            return std::move(result_);
        }
    }

    // Budget exhausted: synthetic report at the leaf that was last running.
    tick_index_ = max_ticks;
    const NodePath path = last_running_leaf_ ? *last_running_leaf_ : last_leaf_ticked_.value();
    report_leaf_failure(path, node_at(tree_, path).id,
                        "tick budget exceeded after " + std::to_string(max_ticks) + " ticks");
    result_.final_status = TickStatus::Failure;
    result_.ticks_used = max_ticks;
    return std::move(result_);
}

ExecutionResult execute(const BehaviorTree& tree, EnvironmentAdapter& env, int max_ticks) {
    TreeExecutor executor(tree, env);
    return executor.run(max_ticks);
}

}  // namespace btforge
