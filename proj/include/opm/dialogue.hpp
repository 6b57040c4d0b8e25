#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "opm/issues.hpp"

namespace opm {

enum class Author { Self, Opp };

enum class Source { CD, CA, DND, SYN };

std::string to_string(Author a);
std::string to_string(Source s);
Author author_from_string(const std::string& s);
Source source_from_string(const std::string& s);

struct Utterance {
    Author author = Author::Self;
    std::string text;
    std::vector<std::string> tags;  // optional strategy labels, normalized lowercase

    bool has_tag(const std::string& tag) const;
};

struct Scenario {
    PriorityOrder self_order;
    PriorityOrder opp_order;
};

// One perspective of a dialogue: alternating utterances plus the opponent's
// ground-truth priority order. pair_mask, when present, limits supervision to
// the issue pairs whose relative order is actually known.
struct Instance {
    std::string id;
    Source source = Source::CD;
    std::vector<Utterance> utterances;
    PriorityOrder label;
    // each pair is (higher issue, lower issue), agreeing with label
    std::optional<std::vector<std::pair<int, int>>> pair_mask;
    std::optional<Scenario> scenario;

    int opponent_utterance_count() const;
    // 0-based utterance index of the k-th opponent utterance (k is 1-based);
    // -1 when the instance has fewer than k opponent utterances
    int opponent_position(int k) const;
    bool has_full_label() const { return !pair_mask.has_value(); }
};

// Throws ValidationError on any violated invariant: non-empty trimmed texts,
// strict author alternation, label a permutation, masked pairs agreeing with
// the label, and CA instances carrying exactly one masked pair.
void validate_instance(const Instance& inst, int m);

// Prefix of an instance up to (and including) its k-th opponent utterance.
struct PartialDialogue {
    const Instance* instance = nullptr;
    int k = 0;                        // opponent utterances included (after clamping)
    bool clamped = false;             // true when the request exceeded the available ones
    std::vector<Utterance> utterances;

    int last_position() const { return static_cast<int>(utterances.size()) - 1; }
};

// k must be >= 1; a request past the last opponent utterance clamps to it.
PartialDialogue partial_view(const Instance& inst, int k);

// dialogue id shared by the two perspectives of one source dialogue: the
// instance id with a trailing ".a"/".b" perspective suffix stripped
std::string dialogue_id_of(const std::string& instance_id);

}  // namespace opm
