// SPDX-License-Identifier: Apache-2.0
//
// Python bindings for the core operations: parsing and serialization,
// manifest handling, validation, simulated execution, the recovery pipeline
// (with a Python callable as the generator), pass@k and the text metrics.
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "btforge/bench.hpp"
#include "btforge/dataset.hpp"
#include "btforge/recovery.hpp"
#include "btforge/textmetrics.hpp"
#include "btforge/validator.hpp"

namespace py = pybind11;
using namespace btforge;

namespace {

py::dict report_to_dict(const ValidationReport& report) {
    py::dict out;
    out["verdict"] = report.verdict();
    out["accepted"] = report.accepted();
    py::list violations;
    for (const Violation& v : report.violations) {
        py::dict entry;
        entry["code"] = std::string(violation_code_name(v.code));
        entry["node_path"] = v.node_path;
        entry["message"] = v.message;
        violations.append(std::move(entry));
    }
    out["violations"] = std::move(violations);
    return out;
}

py::dict execution_to_dict(const ExecutionResult& result) {
    py::dict out;
    out["status"] = std::string(tick_status_name(result.final_status));
    out["succeeded"] = result.succeeded();
    out["ticks_used"] = result.ticks_used;
    py::list reports;
    for (const FailureReport& report : result.failure_reports) {
        py::dict entry;
        entry["node_path"] = report.node_path;
        entry["node_names"] = report.node_names;
        entry["failed_leaf"] = report.failed_leaf;
        entry["tick_index"] = report.tick_index;
        entry["env_message"] = report.env_message;
        reports.append(std::move(entry));
    }
    out["failure_reports"] = std::move(reports);
    return out;
}

/// Adapts a Python callable (instruction, input) -> text into a Generator.
class CallableGenerator : public Generator {
public:
    explicit CallableGenerator(py::function fn) : fn_(std::move(fn)) {}

    GenerationResponse generate(const PromptRecord& prompt) override {
        py::object raw = fn_(prompt.instruction, prompt.input);
        return GenerationResponse{raw.cast<std::string>(), 0.0};
    }

private:
    py::function fn_;
};

py::dict solve_task(const TaskSpec& task, py::function generator, bool er, int max_regen,
                    int max_retries, int tick_budget) {
    RecoveryPolicy policy = er ? RecoveryPolicy{} : RecoveryPolicy::disabled();
    if (er) {
        policy.max_regen_rounds = max_regen;
        policy.max_inference_retries = max_retries;
    }
    policy.tick_budget = tick_budget;

    CallableGenerator gen(std::move(generator));
    sim::SimEnvironment env(task.world_spec, task.manifest);
    PipelineOutcome outcome = run_with_recovery(task, gen, env, policy);

    py::dict out;
    out["status"] = std::string(pipeline_status_name(outcome.status));
    out["succeeded"] = outcome.succeeded();
    out["goal_achieved"] =
        outcome.succeeded() && sim::evaluate_goal(env.world(), task.goal);
    out["inference_retries_used"] = outcome.inference_retries_used;
    out["regen_rounds_used"] = outcome.regen_rounds_used;
    if (outcome.final_tree) out["final_tree"] = serialize_bt(*outcome.final_tree);
    if (outcome.result) out["execution"] = execution_to_dict(*outcome.result);
    py::list history;
    for (const CandidateRecord& record : outcome.history) {
        py::dict entry;
        entry["accepted"] = record.accepted();
        entry["raw_text"] = record.raw_text;
        history.append(std::move(entry));
    }
    out["history"] = std::move(history);
    out["world"] = sim::world_to_json(env.world());
    return out;
}

}  // namespace

PYBIND11_MODULE(_btforge, m) {
    m.doc() = "behavior-tree generation, validation, execution and benchmarking";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<PathError>(m, "PathError", PyExc_IndexError);
    py::register_exception<ManifestError>(m, "ManifestError", PyExc_ValueError);
    py::register_exception<ExtractError>(m, "ExtractError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

    py::class_<TreeStats>(m, "TreeStats")
        .def_readonly("node_count", &TreeStats::node_count)
        .def_readonly("transition_count", &TreeStats::transition_count)
        .def_readonly("depth", &TreeStats::depth)
        .def_readonly("leaf_ids", &TreeStats::leaf_ids)
        .def("__repr__", [](const TreeStats& s) {
            return "TreeStats(nodes=" + std::to_string(s.node_count) +
                   ", transitions=" + std::to_string(s.transition_count) +
                   ", depth=" + std::to_string(s.depth) + ")";
        });

    py::class_<BehaviorTree>(m, "BehaviorTree")
        .def_readonly("tree_id", &BehaviorTree::tree_id)
        .def("stats", [](const BehaviorTree& t) { return tree_stats(t); })
        .def("to_xml", [](const BehaviorTree& t) { return serialize_bt(t); })
        .def("__eq__",
             [](const BehaviorTree& a, const BehaviorTree& b) { return a == b; })
        .def("__repr__", [](const BehaviorTree& t) {
            return "BehaviorTree(id='" + t.tree_id + "', nodes=" +
                   std::to_string(tree_stats(t).node_count) + ")";
        });

    py::class_<PrimitiveManifest>(m, "PrimitiveManifest")
        .def_property_readonly("ids",
                               [](const PrimitiveManifest& m_) {
                                   std::vector<std::string> ids;
                                   for (const PrimitiveSpec& p : m_.primitives) {
                                       ids.push_back(p.id);
                                   }
                                   return ids;
                               })
        .def("render_action_list",
             [](const PrimitiveManifest& m_) { return render_action_list(m_); })
        .def("to_yaml", [](const PrimitiveManifest& m_) { return save_manifest(m_); });

    py::class_<TaskSpec>(m, "TaskSpec")
        .def_readonly("id", &TaskSpec::id)
        .def_readonly("description", &TaskSpec::description)
        .def_property_readonly("category",
                               [](const TaskSpec& t) {
                                   return std::string(category_name(t.category));
                               })
        .def_property_readonly("difficulty", [](const TaskSpec& t) {
            return std::string(difficulty_name(t.difficulty));
        });

    m.def("parse_bt", [](const std::string& xml) { return parse_bt(xml); },
          py::arg("xml_text"), "Parse a BT XML document.");
    m.def("serialize_bt", [](const BehaviorTree& t) { return serialize_bt(t); });
    m.def("tree_stats", [](const BehaviorTree& t) { return tree_stats(t); });
    m.def(
        "splice_subtree",
        [](const BehaviorTree& tree, const NodePath& path, const BehaviorTree& replacement) {
            return splice_subtree(tree, path, replacement.root);
        },
        py::arg("tree"), py::arg("path"), py::arg("replacement"),
        "Replace the node at `path` with the replacement tree's root.");

    m.def("load_manifest", [](const std::string& yaml) { return load_manifest(yaml); });
    m.def("load_manifest_file",
          [](const std::string& path) { return load_manifest_file(path); });

    m.def(
        "validate",
        [](const std::string& xml, const PrimitiveManifest& manifest) {
            auto [report, tree] = validate(xml, manifest);
            return py::make_tuple(report_to_dict(report),
                                  tree ? py::cast(*tree) : py::none());
        },
        py::arg("xml_text"), py::arg("manifest"),
        "Returns (report dict, validated tree or None).");
    m.def("extract_xml", [](const std::string& raw) { return extract_xml(raw); });
    m.def("action_coherent", [](const std::string& xml, const PrimitiveManifest& manifest) {
        return action_coherent(xml, manifest);
    });

    m.def(
        "execute_xml",
        [](const std::string& xml, const std::string& manifest_yaml,
           const std::string& world_yaml, int budget) {
            PrimitiveManifest manifest = load_manifest(manifest_yaml);
            auto [report, tree] = validate(xml, manifest);
            if (!tree) throw DomainError("tree rejected: " + report.to_json());
            sim::SimEnvironment env(sim::load_world(world_yaml), manifest);
            py::dict out = execution_to_dict(execute(*tree, env, budget));
            out["world"] = sim::world_to_json(env.world());
            return out;
        },
        py::arg("xml_text"), py::arg("manifest_yaml"), py::arg("world_yaml"),
        py::arg("budget") = kDefaultTickBudget,
        "Validate and run a tree in a simulated world.");

    m.def("load_task_file",
          [](const std::string& path) { return bench::load_task_file(path); });
    m.def("load_suite", [](const std::string& path) { return bench::load_suite(path); });

    m.def("solve_task", &solve_task, py::arg("task"), py::arg("generator"),
          py::arg("er") = true, py::arg("max_regen") = 3, py::arg("max_retries") = 5,
          py::arg("tick_budget") = kDefaultTickBudget,
          "Run the generate/validate/execute pipeline with a Python generator "
          "callable (instruction, input) -> text.");

    m.def("pass_at_k", &bench::pass_at_k, py::arg("n"), py::arg("c"), py::arg("k"));

    m.def("tokenize", &text::tokenize);
    m.def(
        "rouge_n",
        [](const std::string& cand, const std::string& ref, int n) {
            text::PrfScore s = text::rouge_n(text::tokenize(cand), text::tokenize(ref), n);
            return py::make_tuple(s.precision, s.recall, s.f1);
        },
        py::arg("candidate"), py::arg("reference"), py::arg("n") = 1);
    m.def(
        "rouge_l",
        [](const std::string& cand, const std::string& ref) {
            text::PrfScore s = text::rouge_l(text::tokenize(cand), text::tokenize(ref));
            return py::make_tuple(s.precision, s.recall, s.f1);
        },
        py::arg("candidate"), py::arg("reference"));
    m.def(
        "rouge_lsum",
        [](const std::string& cand, const std::string& ref) {
            text::PrfScore s =
                text::rouge_lsum(text::tokenize_lines(cand), text::tokenize_lines(ref));
            return py::make_tuple(s.precision, s.recall, s.f1);
        },
        py::arg("candidate"), py::arg("reference"));
    m.def(
        "bleu",
        [](const std::string& cand, const std::vector<std::string>& refs, int max_n) {
            std::vector<text::TokenSeq> references;
            for (const std::string& ref : refs) references.push_back(text::tokenize(ref));
            return text::bleu(text::tokenize(cand), references, max_n);
        },
        py::arg("candidate"), py::arg("references"), py::arg("max_n") = 4);

    m.attr("__version__") = "1.0.0";
}
