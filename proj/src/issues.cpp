#include "opm/issues.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace opm {

IssueSet::IssueSet(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.size() < 2) throw ValidationError("issue set needs at least 2 issues");
    std::set<std::string> uniq(names_.begin(), names_.end());
    if (uniq.size() != names_.size()) throw ValidationError("issue set has duplicate names");
}

const IssueSet& IssueSet::standard() {
    static IssueSet std_set(std::vector<std::string>{"food", "water", "firewood"});
    return std_set;
}

int IssueSet::find(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return static_cast<int>(i);
    return -1;
}

int IssueSet::index_of(const std::string& name) const {
    int idx = find(name);
    if (idx < 0) throw ValidationError("unknown issue name: '" + name + "'");
    return idx;
}

int PriorityOrder::rank_of(int issue) const {
    for (std::size_t i = 0; i < order.size(); ++i)
        if (order[i] == issue) return static_cast<int>(i);
    throw ValidationError("issue index " + std::to_string(issue) + " not in priority order");
}

bool PriorityOrder::is_permutation_of(int m) const {
    if (static_cast<int>(order.size()) != m) return false;
    std::vector<bool> seen(static_cast<std::size_t>(m), false);
    for (int v : order) {
        if (v < 0 || v >= m || seen[static_cast<std::size_t>(v)]) return false;
        seen[static_cast<std::size_t>(v)] = true;
    }
    return true;
}

void PriorityOrder::validate(int m) const {
    if (!is_permutation_of(m)) throw ValidationError("priority order is not a permutation of all issues");
}

std::vector<std::string> PriorityOrder::to_names(const IssueSet& issues) const {
    std::vector<std::string> out;
    out.reserve(order.size());
    for (int v : order) out.push_back(issues.name(v));
    return out;
}

PriorityOrder PriorityOrder::from_names(const std::vector<std::string>& names, const IssueSet& issues) {
    PriorityOrder p;
    p.order.reserve(names.size());
    for (const auto& n : names) p.order.push_back(issues.index_of(n));
    p.validate(issues.size());
    return p;
}

int kendall_distance(const PriorityOrder& a, const PriorityOrder& b) {
    int m = a.size();
    if (b.size() != m) throw ValidationError("kendall_distance: order sizes differ");
    a.validate(m);
    b.validate(m);
    int d = 0;
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            bool a_above = a.rank_of(i) < a.rank_of(j);
            bool b_above = b.rank_of(i) < b.rank_of(j);
            if (a_above != b_above) ++d;
        }
    }
    return d;
}

std::vector<PriorityOrder> all_orders(int m) {
    std::vector<int> idx(static_cast<std::size_t>(m));
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<PriorityOrder> out;
    do {
        out.emplace_back(idx);
    } while (std::next_permutation(idx.begin(), idx.end()));
    return out;
}

PriorityOrder order_from_scores(const std::vector<double>& scores) {
    for (double s : scores)
        if (std::isnan(s)) throw NumericError("order_from_scores: NaN score");
    std::vector<int> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (scores[static_cast<std::size_t>(a)] != scores[static_cast<std::size_t>(b)])
            return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
        return a < b;
    });
    return PriorityOrder(std::move(idx));
}

}  // namespace opm
