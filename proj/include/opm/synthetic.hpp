#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "opm/adapt.hpp"
#include "opm/dialogue.hpp"

namespace opm {

// Templated corpus whose labels are recoverable from the utterance text by
// rule. Opponent turns mix graded preference statements, explicit
// full-order statements and division offers; `noise` replaces an opponent
// turn with small talk. Dialogues where `offers_only` is set reveal the
// order exclusively through offers.
struct SynthConfig {
    int count = 2000;
    int min_opp_utterances = 4;
    int max_opp_utterances = 5;
    double noise = 0.1;
    double offer_reliant_rate = 0.10;  // dialogues whose signal is offers only
    bool offers_only = false;
    std::string id_prefix = "syn";

    void validate() const;
};

std::vector<Instance> generate_synthetic(const SynthConfig& cfg, std::uint64_t seed,
                                         const IssueSet& issues = IssueSet::standard());

// Reads the template statements back out of a (possibly partial) utterance
// sequence; nullopt when no statement constrains the order.
std::optional<PriorityOrder> synthetic_oracle(const std::vector<Utterance>& utterances,
                                              const IssueSet& issues = IssueSet::standard());

// Argument sets with the same graded phrasing, for building template
// dialogues that play the argument-metadata role.
std::vector<ArgumentSet> synth_argument_sets(int count, std::uint64_t seed,
                                             const IssueSet& issues = IssueSet::standard());

}  // namespace opm
