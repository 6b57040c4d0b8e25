#include "opm/foldplan.hpp"

#include <algorithm>
#include <set>

#include "opm/errors.hpp"
#include "opm/rng.hpp"

namespace opm {

std::vector<std::string> dialogue_ids(const std::vector<Instance>& instances) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& inst : instances) {
        std::string did = dialogue_id_of(inst.id);
        if (seen.insert(did).second) out.push_back(did);
    }
    return out;
}

std::vector<Instance> select_by_dialogues(const std::vector<Instance>& instances,
                                          const std::vector<std::string>& ids) {
    std::set<std::string> want(ids.begin(), ids.end());
    std::vector<Instance> out;
    for (const auto& inst : instances)
        if (want.count(dialogue_id_of(inst.id))) out.push_back(inst);
    return out;
}

void FoldPlan::validate() const {
    if (fold_count < 1 || static_cast<int>(folds.size()) != fold_count)
        throw ValidationError("fold plan: fold count mismatch");
    std::set<std::string> eval_union;
    std::size_t eval_total = 0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        const Fold& fold = folds[f];
        std::set<std::string> train(fold.train_ids.begin(), fold.train_ids.end());
        std::set<std::string> tune(fold.tune_ids.begin(), fold.tune_ids.end());
        std::set<std::string> eval(fold.eval_ids.begin(), fold.eval_ids.end());
        if (train.size() != fold.train_ids.size() || tune.size() != fold.tune_ids.size() ||
            eval.size() != fold.eval_ids.size())
            throw ValidationError("fold plan: duplicate dialogue id within fold " + std::to_string(f));
        for (const auto& id : tune)
            if (train.count(id)) throw ValidationError("fold plan: fold " + std::to_string(f) + " overlaps train/tune");
        for (const auto& id : eval)
            if (train.count(id) || tune.count(id))
                throw ValidationError("fold plan: fold " + std::to_string(f) + " leaks eval dialogues");
        eval_union.insert(eval.begin(), eval.end());
        eval_total += eval.size();
    }
    if (eval_union.size() != eval_total)
        throw ValidationError("fold plan: eval sets of different folds overlap");
}

nlohmann::json FoldPlan::to_json() const {
    nlohmann::json j;
    j["fold_count"] = fold_count;
    j["folds"] = nlohmann::json::array();
    for (const auto& f : folds)
        j["folds"].push_back({{"train", f.train_ids}, {"tune", f.tune_ids}, {"eval", f.eval_ids}});
    return j;
}

FoldPlan FoldPlan::from_json(const nlohmann::json& j) {
    FoldPlan plan;
    plan.fold_count = j.at("fold_count").get<int>();
    for (const auto& jf : j.at("folds")) {
        FoldPlan::Fold f;
        f.train_ids = jf.at("train").get<std::vector<std::string>>();
        f.tune_ids = jf.at("tune").get<std::vector<std::string>>();
        f.eval_ids = jf.at("eval").get<std::vector<std::string>>();
        plan.folds.push_back(std::move(f));
    }
    plan.validate();
    return plan;
}

FoldPlan make_fold_plan(const std::vector<Instance>& instances, int fold_count, int tune_dialogues,
                        std::uint64_t seed) {
    if (fold_count < 1) throw ValidationError("make_fold_plan: fold_count must be >= 1");
    std::vector<std::string> ids = dialogue_ids(instances);
    if (static_cast<int>(ids.size()) < fold_count + tune_dialogues)
        throw ValidationError("make_fold_plan: not enough dialogues for the requested plan");
    Rng rng(seed);
    rng.shuffle(ids);

    FoldPlan plan;
    plan.fold_count = fold_count;
    std::size_t n = ids.size();
    for (int f = 0; f < fold_count; ++f) {
        std::size_t lo = n * static_cast<std::size_t>(f) / static_cast<std::size_t>(fold_count);
        std::size_t hi = n * static_cast<std::size_t>(f + 1) / static_cast<std::size_t>(fold_count);
        // single fold: hold out a tail as eval instead of evaluating on train
        if (fold_count == 1) {
            lo = n - std::max<std::size_t>(1, n / 5);
            hi = n;
        }
        FoldPlan::Fold fold;
        for (std::size_t i = 0; i < n; ++i) {
            if (i >= lo && i < hi)
                fold.eval_ids.push_back(ids[i]);
            else if (static_cast<int>(fold.tune_ids.size()) < tune_dialogues)
                fold.tune_ids.push_back(ids[i]);
            else
                fold.train_ids.push_back(ids[i]);
        }
        plan.folds.push_back(std::move(fold));
    }
    plan.validate();
    return plan;
}

}  // namespace opm
