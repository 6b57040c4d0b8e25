#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "opm/corpus_io.hpp"
#include "opm/dialogue.hpp"
#include "opm/rng.hpp"

namespace opm {

// One participant's free-text arguments for their high/medium/low priority
// issues, with the issue each argument concerns.
struct ArgumentSet {
    std::string participant_id;
    std::array<std::string, 3> args;  // high, medium, low
    std::array<int, 3> issues;        // issue index per argument

    void validate(int m) const;  // the three issues must be distinct
};

// 4-utterance skeleton the template dialogues are built on. Slots marked by
// kArgSlot are filled with the two arguments of a pair.
struct CaTemplate {
    static constexpr const char* kArgSlot = "<arg>";
    std::vector<Utterance> skeleton;

    static CaTemplate standard();  // self opener, arg slot, self ack, arg slot
    void validate() const;
};

// Two instances per argument set: pairs (high, low) and (medium, low), with
// randomized slot order and a single-pair mask. The unknown third issue is
// placed last in the serialized label.
std::vector<Instance> build_ca_instances(const ArgumentSet& args, const CaTemplate& tmpl, Rng& rng,
                                         const IssueSet& issues = IssueSet::standard());

// argument metadata from a chat-record file (participant priorities plus
// their per-level reasons)
std::vector<ArgumentSet> extract_argument_sets(const std::string& path, const FieldMap& fm,
                                               const IssueSet& issues = IssueSet::standard());
std::vector<ArgumentSet> argument_sets_from_json(const nlohmann::json& root, const FieldMap& fm,
                                                 const IssueSet& issues, const std::string& origin);

// Bijection from the source corpus issue nouns onto the target issue set.
struct IssueMapping {
    std::map<std::string, int> pairs;  // source noun -> target issue index

    static IssueMapping dnd_default(const IssueSet& issues = IssueSet::standard());
    static IssueMapping random_mapping(const std::vector<std::string>& source_names, Rng& rng,
                                       const IssueSet& issues = IssueSet::standard());
    void validate(int m) const;  // bijective over all m issues
};

// Replaces whole-word singular/plural occurrences of each source noun with
// the mapped target name; all other bytes are untouched.
std::string remap_issue_words(const std::string& text, const IssueMapping& mapping, const IssueSet& issues);

// reader-agent values sorted descending (ties to the lower native index)
PriorityOrder dnd_label(const RawDndDialogue& raw);

// Adapted instance: reader turns become the opponent, texts are remapped,
// and the label comes from the reader's per-issue values.
Instance remap_dnd(const RawDndDialogue& raw, const IssueMapping& mapping,
                   const IssueSet& issues = IssueSet::standard());

// keep only dialogues with >= 4 utterances and pairwise-distinct values
bool filter_dnd(const RawDndDialogue& raw);

// >= 3 distinct members of a fixed phrase list appear in the lowercased text
bool detect_offer(const std::string& text);
const std::vector<std::string>& offer_phrases();

enum class UtteranceCategory { Preference, Offer, Other };
std::string to_string(UtteranceCategory c);

// preference tags win over the offer pattern; everything else is Other
UtteranceCategory tag_utterance_category(const Utterance& u);

}  // namespace opm
