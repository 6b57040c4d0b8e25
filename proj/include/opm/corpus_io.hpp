#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "opm/dialogue.hpp"

namespace opm {

// Declarative mapping from logical fields to JSON paths (dot-separated for
// nesting), so dataset layout drift is a config change, not a code change.
struct FieldMap {
    std::map<std::string, std::string> paths;

    static FieldMap casino_defaults();
    static FieldMap from_file(const std::string& path);
    const std::string& path(const std::string& key) const;
};

struct RawTurn {
    std::string pid;
    std::string text;
    std::vector<std::string> tags;
};

// Two-participant source dialogue before perspective extraction.
struct RawDialogue {
    std::string id;
    std::array<std::string, 2> pids;
    std::array<PriorityOrder, 2> orders;
    std::vector<RawTurn> turns;
};

struct CasinoLoad {
    std::vector<RawDialogue> dialogues;
    int skipped = 0;  // records dropped for missing/unusable priority metadata
};

// chat-record array -> raw dialogues; throws ParseError with the record
// index on malformed input
CasinoLoad load_casino(const std::string& path, const FieldMap& fm, const IssueSet& issues = IssueSet::standard());
CasinoLoad load_casino_json(const nlohmann::json& root, const FieldMap& fm, const IssueSet& issues,
                            const std::string& origin);

// One instance per perspective: the label is the opponent's order, texts are
// unchanged.
std::pair<Instance, Instance> extract_perspectives(const RawDialogue& raw, const IssueSet& issues);

// Turn-marked negotiation transcript with per-agent (count, value) integers
// for the three native issues (book, hat, ball in canonical file order).
struct RawDndDialogue {
    std::string id;
    std::array<int, 3> counts{};
    std::array<int, 3> reader_values{};
    std::array<int, 3> partner_values{};
    struct Turn {
        bool by_reader = false;  // "YOU:" turns
        std::string text;
    };
    std::vector<Turn> turns;
};

std::vector<RawDndDialogue> load_dnd(const std::string& path);
const std::vector<std::string>& dnd_native_issues();  // book, hat, ball

// canonical instance JSON-lines
nlohmann::json instance_to_json(const Instance& inst, const IssueSet& issues);
Instance instance_from_json(const nlohmann::json& j, const IssueSet& issues);
std::vector<Instance> read_instances(const std::string& path, const IssueSet& issues = IssueSet::standard());
void write_instances(const std::string& path, const std::vector<Instance>& instances,
                     const IssueSet& issues = IssueSet::standard());

// "self_need"/"Self-Need"/... -> "self-need"
std::string normalize_tag(const std::string& tag);

}  // namespace opm
