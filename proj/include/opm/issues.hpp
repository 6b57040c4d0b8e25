#pragma once

#include <string>
#include <vector>

#include "opm/errors.hpp"

namespace opm {

// The fixed, ordered set of negotiable issues for a run. Indices into this
// set are the canonical issue ids used by labels, scores and tie-breaking.
class IssueSet {
public:
    IssueSet() = default;
    explicit IssueSet(std::vector<std::string> names);

    static const IssueSet& standard();  // food, water, firewood

    int size() const { return static_cast<int>(names_.size()); }
    const std::string& name(int idx) const { return names_.at(static_cast<std::size_t>(idx)); }
    const std::vector<std::string>& names() const { return names_; }

    // -1 when unknown
    int find(const std::string& name) const;
    // throws ValidationError when unknown
    int index_of(const std::string& name) const;

private:
    std::vector<std::string> names_;
};

// Permutation of all issues, highest priority first. Stored as issue indices.
struct PriorityOrder {
    std::vector<int> order;

    PriorityOrder() = default;
    explicit PriorityOrder(std::vector<int> o) : order(std::move(o)) {}

    int size() const { return static_cast<int>(order.size()); }
    int at(int pos) const { return order.at(static_cast<std::size_t>(pos)); }
    int top() const { return order.at(0); }

    // position of an issue in this order (0 = highest)
    int rank_of(int issue) const;

    bool operator==(const PriorityOrder& other) const { return order == other.order; }
    bool operator!=(const PriorityOrder& other) const { return !(*this == other); }

    bool is_permutation_of(int m) const;
    void validate(int m) const;  // throws ValidationError unless a permutation of 0..m-1

    std::vector<std::string> to_names(const IssueSet& issues) const;
    static PriorityOrder from_names(const std::vector<std::string>& names, const IssueSet& issues);
};

// Number of discordant pairs between two orders over the same issue set
// (0 .. m*(m-1)/2).
int kendall_distance(const PriorityOrder& a, const PriorityOrder& b);

// All m! orders in lexicographic index order; m is small (metrics use m=3).
std::vector<PriorityOrder> all_orders(int m);

// Issues sorted by descending value; exact ties broken by lower canonical
// index first.
PriorityOrder order_from_scores(const std::vector<double>& scores);

}  // namespace opm
