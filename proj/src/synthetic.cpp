#include "opm/synthetic.hpp"

#include <algorithm>
#include <array>

#include "opm/errors.hpp"
#include "opm/vocab.hpp"

namespace opm {

namespace {

const std::vector<std::string>& small_talk() {
    static std::vector<std::string> pool{
        "hello there friend",
        "nice to meet you",
        "sounds good to me",
        "ok let us sort this out",
        "that works for us",
        "how is your day going",
        "great weather for camping today",
        "hope the trip goes well",
    };
    return pool;
}

std::string graded_high(const std::string& a, int variant) {
    return variant == 0 ? "i really really need " + a + " , we can not have enough " + a
                        : a + " is everything for us , we always run out of " + a;
}

std::string graded_med(const std::string& b, int variant) {
    return variant == 0 ? "some extra " + b + " would be useful for us"
                        : "we could use a bit more " + b + " on this trip";
}

std::string graded_low(const std::string& c, int variant) {
    return variant == 0 ? "we do not need much " + c + " honestly"
                        : c + " is the least of our worries";
}

std::string full_pref(const std::string& a, const std::string& b, const std::string& c, int variant) {
    return variant == 0 ? "we need " + a + " the most , then " + b + " , and " + c + " matters least"
                        : "our top priority is " + a + " , after that " + b + " , and finally " + c;
}

// Division offer: keep three of the top issue, two of the middle one, hand
// over the last one. Clause wording and clause order both vary, so reading
// it means pairing each quantity with its issue, not skimming mention order.
std::string offer_statement(const std::string& a, const std::string& b, const std::string& c, Rng& rng) {
    std::array<std::string, 3> top_clause{"i take three " + a, "i get 3 " + a, "three " + a + " for me"};
    std::array<std::string, 3> mid_clause{"i keep two " + b, "i get 2 " + b, "two " + b + " for me"};
    std::array<std::string, 3> low_clause{"you can take all the " + c, "all the " + c + " for you",
                                          "you get the " + c};
    std::vector<std::string> clauses{top_clause[rng.below(3)], mid_clause[rng.below(3)], low_clause[rng.below(3)]};
    rng.shuffle(clauses);
    std::string joiner = rng.bernoulli(0.5) ? " and " : " , ";
    return clauses[0] + joiner + clauses[1] + " and " + clauses[2];
}

Utterance opp_turn(std::string text, std::vector<std::string> tags) {
    return Utterance{Author::Opp, std::move(text), std::move(tags)};
}

}  // namespace

void SynthConfig::validate() const {
    if (count < 1) throw ValidationError("synthetic config: count must be >= 1");
    if (min_opp_utterances < 2 || max_opp_utterances < min_opp_utterances)
        throw ValidationError("synthetic config: bad opponent utterance range");
    if (noise < 0.0 || noise >= 1.0) throw ValidationError("synthetic config: noise must be in [0,1)");
    if (offer_reliant_rate < 0.0 || offer_reliant_rate > 1.0)
        throw ValidationError("synthetic config: offer_reliant_rate must be in [0,1]");
}

std::vector<Instance> generate_synthetic(const SynthConfig& cfg, std::uint64_t seed, const IssueSet& issues) {
    cfg.validate();
    if (issues.size() != 3) throw ValidationError("synthetic generator: issue set must have 3 issues");
    Rng rng(seed);
    std::vector<PriorityOrder> orders = all_orders(issues.size());

    std::vector<Instance> out;
    out.reserve(static_cast<std::size_t>(cfg.count));
    for (int i = 0; i < cfg.count; ++i) {
        Instance inst;
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%s_%05d", cfg.id_prefix.c_str(), i);
        inst.id = buf;
        inst.source = Source::SYN;
        inst.label = orders[rng.below(orders.size())];
        inst.scenario = Scenario{orders[rng.below(orders.size())], inst.label};

        const std::string a = issues.name(inst.label.at(0));
        const std::string b = issues.name(inst.label.at(1));
        const std::string c = issues.name(inst.label.at(2));

        int k_opp = cfg.min_opp_utterances +
                    static_cast<int>(rng.below(static_cast<std::size_t>(cfg.max_opp_utterances - cfg.min_opp_utterances + 1)));
        bool self_first = rng.bernoulli(0.5);
        bool offers_throughout = cfg.offers_only || rng.bernoulli(cfg.offer_reliant_rate);

        // opponent plan; the last turn always carries the full order
        std::vector<Utterance> opp;
        for (int j = 0; j < k_opp; ++j) {
            int variant = static_cast<int>(rng.below(2));
            Utterance u;
            if (offers_throughout) {
                u = opp_turn(offer_statement(a, b, c, rng), {});
            } else if (j == k_opp - 1) {
                u = opp_turn(full_pref(a, b, c, variant), {"self-need"});
            } else if (j == 0) {
                u = opp_turn(graded_high(a, variant), {"self-need"});
            } else if (j == 1) {
                u = opp_turn(full_pref(a, b, c, variant), {"self-need"});
            } else if (j == 2) {
                u = rng.bernoulli(0.5) ? opp_turn(graded_low(c, variant), {"no-need"})
                                       : opp_turn(graded_med(b, variant), {"self-need"});
            } else {
                u = rng.bernoulli(0.5) ? opp_turn(full_pref(a, b, c, variant), {"self-need"})
                                       : opp_turn(graded_med(b, variant), {"self-need"});
            }
            if (rng.bernoulli(cfg.noise)) u = opp_turn(small_talk()[rng.below(small_talk().size())], {});
            opp.push_back(std::move(u));
        }

        for (int j = 0; j < k_opp; ++j) {
            if (self_first || j > 0)
                inst.utterances.push_back({Author::Self, small_talk()[rng.below(small_talk().size())], {}});
            inst.utterances.push_back(std::move(opp[static_cast<std::size_t>(j)]));
        }
        validate_instance(inst, issues.size());
        out.push_back(std::move(inst));
    }
    return out;
}

namespace {

bool contains(const std::string& hay, const char* needle) { return hay.find(needle) != std::string::npos; }

// Clause semantics of the division offers: a "you" clause hands its issue
// away; otherwise three beats two.
std::optional<PriorityOrder> parse_offer(const std::string& text, const IssueSet& issues) {
    // split on " and " and " , "
    std::vector<std::string> clauses;
    std::string rest = text;
    std::size_t pos = 0;
    while (pos < rest.size()) {
        std::size_t cut_and = rest.find(" and ", pos);
        std::size_t cut_comma = rest.find(" , ", pos);
        std::size_t cut = std::min(cut_and, cut_comma);
        if (cut == std::string::npos) {
            clauses.push_back(rest.substr(pos));
            break;
        }
        clauses.push_back(rest.substr(pos, cut - pos));
        pos = cut + (cut == cut_and ? 5 : 3);
    }

    int top = -1, mid = -1, low = -1;
    for (const auto& clause : clauses) {
        int issue = -1;
        for (const auto& tok : tokenize(clause)) {
            int idx = issues.find(tok);
            if (idx >= 0) issue = idx;
        }
        if (issue < 0) continue;
        if (contains(clause, "you")) low = issue;
        else if (contains(clause, "three") || contains(clause, "3")) top = issue;
        else if (contains(clause, "two") || contains(clause, "2")) mid = issue;
    }
    if (top >= 0 && mid >= 0 && low >= 0 && top != mid && top != low && mid != low)
        return PriorityOrder({top, mid, low});
    return std::nullopt;
}

}  // namespace

std::optional<PriorityOrder> synthetic_oracle(const std::vector<Utterance>& utterances, const IssueSet& issues) {
    int m = issues.size();
    std::optional<PriorityOrder> full;
    int top = -1, mid = -1, low = -1;

    for (const auto& u : utterances) {
        if (u.author != Author::Opp) continue;
        std::vector<int> mentioned;
        for (const auto& tok : tokenize(u.text)) {
            int idx = issues.find(tok);
            if (idx >= 0 && std::find(mentioned.begin(), mentioned.end(), idx) == mentioned.end())
                mentioned.push_back(idx);
        }
        bool offer_like = contains(u.text, "take") || contains(u.text, "for me") || contains(u.text, "for you") ||
                          contains(u.text, "i get") || contains(u.text, "you get") || contains(u.text, "i keep");
        if (offer_like && mentioned.size() >= 2) {
            auto parsed = parse_offer(u.text, issues);
            if (parsed) full = parsed;  // later statements win; all are consistent
        } else if (static_cast<int>(mentioned.size()) == m) {
            full = PriorityOrder(mentioned);  // preference statements list issues in rank order
        } else if (mentioned.size() == 1) {
            auto has = [&](const char* s) { return contains(u.text, s); };
            if (has("really need") || has("is everything")) top = mentioned[0];
            else if (has("extra") || has("bit more")) mid = mentioned[0];
            else if (has("do not need much") || has("least of our worries")) low = mentioned[0];
        }
    }
    if (full) return full;

    if (top < 0 && mid < 0 && low < 0) return std::nullopt;
    std::array<int, 3> slots{top, mid, low};
    std::vector<bool> used(static_cast<std::size_t>(m), false);
    for (int s : slots)
        if (s >= 0) used[static_cast<std::size_t>(s)] = true;
    std::vector<int> rest;
    for (int i = 0; i < m; ++i)
        if (!used[static_cast<std::size_t>(i)]) rest.push_back(i);
    std::vector<int> order;
    std::size_t next = 0;
    for (int s : slots) order.push_back(s >= 0 ? s : rest.at(next++));
    return PriorityOrder(order);
}

std::vector<ArgumentSet> synth_argument_sets(int count, std::uint64_t seed, const IssueSet& issues) {
    if (issues.size() != 3) throw ValidationError("synth_argument_sets: issue set must have 3 issues");
    Rng rng(seed);
    std::vector<PriorityOrder> orders = all_orders(issues.size());
    std::vector<ArgumentSet> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const PriorityOrder& order = orders[rng.below(orders.size())];
        ArgumentSet a;
        char buf[32];
        std::snprintf(buf, sizeof(buf), "synca_%05d", i);
        a.participant_id = buf;
        a.issues = {order.at(0), order.at(1), order.at(2)};
        a.args = {graded_high(issues.name(order.at(0)), static_cast<int>(rng.below(2))),
                  graded_med(issues.name(order.at(1)), static_cast<int>(rng.below(2))),
                  graded_low(issues.name(order.at(2)), static_cast<int>(rng.below(2)))};
        out.push_back(std::move(a));
    }
    return out;
}

}  // namespace opm
