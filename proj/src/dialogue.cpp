#include "opm/dialogue.hpp"

#include <algorithm>
#include <cctype>

namespace opm {

std::string to_string(Author a) { return a == Author::Self ? "self" : "opp"; }

std::string to_string(Source s) {
    switch (s) {
        case Source::CD: return "CD";
        case Source::CA: return "CA";
        case Source::DND: return "DND";
        case Source::SYN: return "SYN";
    }
    return "CD";
}

Author author_from_string(const std::string& s) {
    if (s == "self") return Author::Self;
    if (s == "opp" || s == "opponent") return Author::Opp;
    throw ValidationError("unknown author: '" + s + "'");
}

Source source_from_string(const std::string& s) {
    if (s == "CD") return Source::CD;
    if (s == "CA") return Source::CA;
    if (s == "DND") return Source::DND;
    if (s == "SYN") return Source::SYN;
    throw ValidationError("unknown source: '" + s + "'");
}

bool Utterance::has_tag(const std::string& tag) const {
    return std::find(tags.begin(), tags.end(), tag) != tags.end();
}

int Instance::opponent_utterance_count() const {
    int n = 0;
    for (const auto& u : utterances)
        if (u.author == Author::Opp) ++n;
    return n;
}

int Instance::opponent_position(int k) const {
    int seen = 0;
    for (std::size_t i = 0; i < utterances.size(); ++i) {
        if (utterances[i].author == Author::Opp) {
            ++seen;
            if (seen == k) return static_cast<int>(i);
        }
    }
    return -1;
}

namespace {

bool is_blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

void validate_instance(const Instance& inst, int m) {
    if (inst.utterances.empty())
        throw ValidationError("instance " + inst.id + ": no utterances");
    for (std::size_t i = 0; i < inst.utterances.size(); ++i) {
        if (is_blank(inst.utterances[i].text))
            throw ValidationError("instance " + inst.id + ": blank utterance at index " + std::to_string(i));
        if (i > 0 && inst.utterances[i].author == inst.utterances[i - 1].author)
            throw ValidationError("instance " + inst.id + ": authors do not alternate at index " + std::to_string(i));
    }
    inst.label.validate(m);
    if (inst.pair_mask) {
        if (inst.pair_mask->empty())
            throw ValidationError("instance " + inst.id + ": empty pair_mask");
        for (const auto& [hi, lo] : *inst.pair_mask) {
            if (hi < 0 || hi >= m || lo < 0 || lo >= m || hi == lo)
                throw ValidationError("instance " + inst.id + ": malformed masked pair");
            if (inst.label.rank_of(hi) >= inst.label.rank_of(lo))
                throw ValidationError("instance " + inst.id + ": masked pair disagrees with label");
        }
        if (inst.source == Source::CA && inst.pair_mask->size() != 1)
            throw ValidationError("instance " + inst.id + ": CA instance must have exactly one masked pair");
    }
    if (inst.scenario) {
        inst.scenario->self_order.validate(m);
        inst.scenario->opp_order.validate(m);
    }
}

PartialDialogue partial_view(const Instance& inst, int k) {
    if (k <= 0) throw ValidationError("partial_view: k must be >= 1, got " + std::to_string(k));
    int available = inst.opponent_utterance_count();
    if (available == 0) throw ValidationError("partial_view: instance " + inst.id + " has no opponent utterance");

    PartialDialogue pv;
    pv.instance = &inst;
    pv.clamped = k > available;
    pv.k = pv.clamped ? available : k;
    int end = inst.opponent_position(pv.k);
    pv.utterances.assign(inst.utterances.begin(), inst.utterances.begin() + end + 1);
    return pv;
}

std::string dialogue_id_of(const std::string& instance_id) {
    if (instance_id.size() >= 2) {
        std::string tail = instance_id.substr(instance_id.size() - 2);
        if (tail == ".a" || tail == ".b") return instance_id.substr(0, instance_id.size() - 2);
    }
    return instance_id;
}

}  // namespace opm
