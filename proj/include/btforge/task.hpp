// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>

#include "btforge/envsim.hpp"
#include "btforge/generator.hpp"
#include "btforge/manifest.hpp"

namespace btforge {

enum class TaskCategory { Navigation, Manipulation };
enum class TaskDifficulty { Easy, Medium, Hard };

std::string_view category_name(TaskCategory c);
std::string_view difficulty_name(TaskDifficulty d);

/// A benchmark task: the natural-language instruction plus everything needed
/// to execute and judge a generated tree.
struct TaskSpec {
    std::string id;
    TaskCategory category = TaskCategory::Navigation;
    TaskDifficulty difficulty = TaskDifficulty::Easy;
    std::string description;
    PrimitiveManifest manifest;
    std::string manifest_ref;  // path the manifest came from, empty if inline
    sim::WorldState world_spec;
    sim::GoalPredicate goal;
    std::optional<PromptRecord> one_shot_exemplar;
};

}  // namespace btforge
