#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "opm/dialogue.hpp"

namespace opm {

// Cross-validation split at source-dialogue granularity: the two
// perspectives of one dialogue never land in different roles.
struct FoldPlan {
    struct Fold {
        std::vector<std::string> train_ids;  // dialogue ids
        std::vector<std::string> tune_ids;
        std::vector<std::string> eval_ids;
    };
    int fold_count = 5;
    std::vector<Fold> folds;

    void validate() const;  // folds partition dialogues; roles disjoint per fold
    nlohmann::json to_json() const;
    static FoldPlan from_json(const nlohmann::json& j);
};

FoldPlan make_fold_plan(const std::vector<Instance>& instances, int fold_count, int tune_dialogues,
                        std::uint64_t seed);

// instances whose dialogue id appears in ids, in corpus order
std::vector<Instance> select_by_dialogues(const std::vector<Instance>& instances,
                                          const std::vector<std::string>& ids);

// first-appearance-ordered unique dialogue ids
std::vector<std::string> dialogue_ids(const std::vector<Instance>& instances);

}  // namespace opm
