#include "opm/adapt.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include "opm/errors.hpp"

namespace opm {

namespace {

std::string lowercase(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

}  // namespace

void ArgumentSet::validate(int m) const {
    std::set<int> uniq(issues.begin(), issues.end());
    if (uniq.size() != 3) throw ValidationError("argument set " + participant_id + ": issues must be distinct");
    for (int i : issues)
        if (i < 0 || i >= m) throw ValidationError("argument set " + participant_id + ": issue index out of range");
    for (const auto& a : args)
        if (a.empty()) throw ValidationError("argument set " + participant_id + ": empty argument text");
}

CaTemplate CaTemplate::standard() {
    CaTemplate t;
    t.skeleton = {
        {Author::Self, "hello!", {}},
        {Author::Opp, kArgSlot, {}},
        {Author::Self, "i see. what else?", {}},
        {Author::Opp, kArgSlot, {}},
    };
    return t;
}

void CaTemplate::validate() const {
    int slots = 0;
    for (const auto& u : skeleton)
        if (u.text == kArgSlot) {
            if (u.author != Author::Opp) throw ValidationError("ca template: argument slots must be opponent turns");
            ++slots;
        }
    if (slots != 2) throw ValidationError("ca template: expected exactly 2 argument slots");
    if (skeleton.size() < 4) throw ValidationError("ca template: expected a 4-utterance skeleton");
}

std::vector<Instance> build_ca_instances(const ArgumentSet& args, const CaTemplate& tmpl, Rng& rng,
                                         const IssueSet& issues) {
    if (issues.size() != 3) throw ValidationError("build_ca_instances: argument sets rank exactly 3 issues");
    args.validate(issues.size());
    tmpl.validate();

    struct PairSpec {
        int hi_slot;  // index into args/issues arrays: 0=high,1=medium,2=low
        int lo_slot;
        const char* suffix;
    };
    const PairSpec specs[2] = {{0, 2, ".hl"}, {1, 2, ".ml"}};

    std::vector<Instance> out;
    for (const auto& spec : specs) {
        int hi_issue = args.issues[static_cast<std::size_t>(spec.hi_slot)];
        int lo_issue = args.issues[static_cast<std::size_t>(spec.lo_slot)];
        std::string hi_text = args.args[static_cast<std::size_t>(spec.hi_slot)];
        std::string lo_text = args.args[static_cast<std::size_t>(spec.lo_slot)];

        // only the slot order is randomized
        bool hi_first = rng.bernoulli(0.5);
        std::vector<std::string> fill = hi_first ? std::vector<std::string>{hi_text, lo_text}
                                                 : std::vector<std::string>{lo_text, hi_text};

        Instance inst;
        inst.id = args.participant_id + spec.suffix;
        inst.source = Source::CA;
        std::size_t next = 0;
        for (const auto& u : tmpl.skeleton) {
            Utterance filled = u;
            if (filled.text == CaTemplate::kArgSlot) filled.text = fill.at(next++);
            inst.utterances.push_back(std::move(filled));
        }

        // known pair first, the undetermined third issue last
        int third = 3 - hi_issue - lo_issue;
        inst.label = PriorityOrder({hi_issue, lo_issue, third});
        inst.pair_mask = std::vector<std::pair<int, int>>{{hi_issue, lo_issue}};
        validate_instance(inst, issues.size());
        out.push_back(std::move(inst));
    }
    return out;
}

std::vector<ArgumentSet> extract_argument_sets(const std::string& path, const FieldMap& fm, const IssueSet& issues) {
    std::ifstream in(path);
    if (!in) throw ValidationError("input file not readable: " + path);
    nlohmann::json root;
    try {
        in >> root;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return argument_sets_from_json(root, fm, issues, path);
}

std::vector<ArgumentSet> argument_sets_from_json(const nlohmann::json& root, const FieldMap& fm,
                                                 const IssueSet& issues, const std::string& origin) {
    if (!root.is_array()) throw ParseError(origin + ": expected a top-level array");
    std::vector<ArgumentSet> out;

    for (std::size_t rec = 0; rec < root.size(); ++rec) {
        const nlohmann::json& r = root[rec];

        // plain metadata layout: {participant_id, issues:{high,..}, args:{high,..}}
        if (r.contains("args") && r.contains("issues")) {
            ArgumentSet a;
            a.participant_id = r.value("participant_id", "args_" + std::to_string(rec));
            const char* levels[3] = {"high", "medium", "low"};
            for (int i = 0; i < 3; ++i) {
                a.issues[static_cast<std::size_t>(i)] = issues.index_of(lowercase(r.at("issues").at(levels[i]).get<std::string>()));
                a.args[static_cast<std::size_t>(i)] = r.at("args").at(levels[i]).get<std::string>();
            }
            a.validate(issues.size());
            out.push_back(std::move(a));
            continue;
        }

        // chat-record layout: derive one argument set per participant
        nlohmann::json::const_iterator pit;
        if (!r.is_object() || (pit = r.find(fm.path("participants"))) == r.end() || !pit->is_object()) continue;
        std::string base_id = r.contains("dialogue_id") && r["dialogue_id"].is_string()
                                  ? r["dialogue_id"].get<std::string>()
                                  : "casino_" + std::to_string(rec);
        for (auto it = pit->begin(); it != pit->end(); ++it) {
            if (!it.value().contains(fm.path("value2issue")) || !it.value().contains(fm.path("value2reason"))) continue;
            const auto& v2i = it.value()[fm.path("value2issue")];
            const auto& v2r = it.value()[fm.path("value2reason")];
            ArgumentSet a;
            a.participant_id = base_id + "." + it.key();
            const char* levels[3] = {"High", "Medium", "Low"};
            bool ok = true;
            for (int i = 0; i < 3; ++i) {
                if (!v2i.contains(levels[i]) || !v2r.contains(levels[i])) {
                    ok = false;
                    break;
                }
                int idx = issues.find(lowercase(v2i[levels[i]].get<std::string>()));
                if (idx < 0) {
                    ok = false;
                    break;
                }
                a.issues[static_cast<std::size_t>(i)] = idx;
                a.args[static_cast<std::size_t>(i)] = v2r[levels[i]].get<std::string>();
            }
            if (!ok) continue;
            a.validate(issues.size());
            out.push_back(std::move(a));
        }
    }
    return out;
}

IssueMapping IssueMapping::dnd_default(const IssueSet& issues) {
    IssueMapping m;
    m.pairs = {{"book", issues.index_of("food")},
               {"hat", issues.index_of("water")},
               {"ball", issues.index_of("firewood")}};
    return m;
}

IssueMapping IssueMapping::random_mapping(const std::vector<std::string>& source_names, Rng& rng,
                                          const IssueSet& issues) {
    if (static_cast<int>(source_names.size()) != issues.size())
        throw ValidationError("issue mapping: source and target sets differ in size");
    std::vector<int> targets(static_cast<std::size_t>(issues.size()));
    for (int i = 0; i < issues.size(); ++i) targets[static_cast<std::size_t>(i)] = i;
    rng.shuffle(targets);
    IssueMapping m;
    for (std::size_t i = 0; i < source_names.size(); ++i) m.pairs[source_names[i]] = targets[i];
    m.validate(issues.size());
    return m;
}

void IssueMapping::validate(int m) const {
    if (static_cast<int>(pairs.size()) != m) throw ValidationError("issue mapping: must cover all issues");
    std::set<int> targets;
    for (const auto& [src, tgt] : pairs) {
        if (tgt < 0 || tgt >= m) throw ValidationError("issue mapping: target index out of range");
        targets.insert(tgt);
    }
    if (static_cast<int>(targets.size()) != m) throw ValidationError("issue mapping: not a bijection");
}

std::string remap_issue_words(const std::string& text, const IssueMapping& mapping, const IssueSet& issues) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_word_char(text[i])) {
            out.push_back(text[i]);
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && is_word_char(text[j])) ++j;
        std::string word = text.substr(i, j - i);

        auto it = mapping.pairs.find(word);
        if (it == mapping.pairs.end() && word.size() > 1 && word.back() == 's')
            it = mapping.pairs.find(word.substr(0, word.size() - 1));  // plural noun
        if (it != mapping.pairs.end())
            out += issues.name(it->second);
        else
            out += word;
        i = j;
    }
    return out;
}

PriorityOrder dnd_label(const RawDndDialogue& raw) {
    std::vector<int> idx{0, 1, 2};
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return raw.reader_values[static_cast<std::size_t>(a)] > raw.reader_values[static_cast<std::size_t>(b)];
    });
    return PriorityOrder(std::move(idx));
}

Instance remap_dnd(const RawDndDialogue& raw, const IssueMapping& mapping, const IssueSet& issues) {
    mapping.validate(issues.size());
    Instance inst;
    inst.id = raw.id;
    inst.source = Source::DND;

    // native priority orders, pushed through the mapping
    PriorityOrder native_reader = dnd_label(raw);
    std::vector<int> idx{0, 1, 2};
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return raw.partner_values[static_cast<std::size_t>(a)] > raw.partner_values[static_cast<std::size_t>(b)];
    });
    auto mapped = [&](const PriorityOrder& native) {
        std::vector<int> order;
        for (int n : native.order) order.push_back(mapping.pairs.at(dnd_native_issues()[static_cast<std::size_t>(n)]));
        return PriorityOrder(std::move(order));
    };
    inst.label = mapped(native_reader);
    inst.scenario = Scenario{mapped(PriorityOrder(idx)), inst.label};

    for (const auto& t : raw.turns) {
        Utterance u;
        u.author = t.by_reader ? Author::Opp : Author::Self;
        u.text = remap_issue_words(t.text, mapping, issues);
        inst.utterances.push_back(std::move(u));
    }
    validate_instance(inst, issues.size());
    return inst;
}

bool filter_dnd(const RawDndDialogue& raw) {
    if (raw.turns.size() < 4) return false;
    const auto& v = raw.reader_values;
    return v[0] != v[1] && v[0] != v[2] && v[1] != v[2];
}

const std::vector<std::string>& offer_phrases() {
    static std::vector<std::string> phrases{
        "0", "1", "2", "3", "one", "two", "three", "all the", "food", "water", "firewood",
        "i get", "you get", "what if", "i take", "you can take", "can do",
    };
    return phrases;
}

bool detect_offer(const std::string& text) {
    std::string lower = lowercase(text);
    int hits = 0;
    for (const auto& p : offer_phrases())
        if (lower.find(p) != std::string::npos) ++hits;
    return hits >= 3;
}

std::string to_string(UtteranceCategory c) {
    switch (c) {
        case UtteranceCategory::Preference: return "preference";
        case UtteranceCategory::Offer: return "offer";
        case UtteranceCategory::Other: return "other";
    }
    return "other";
}

UtteranceCategory tag_utterance_category(const Utterance& u) {
    for (const char* t : {"self-need", "other-need", "no-need"})
        if (u.has_tag(t)) return UtteranceCategory::Preference;
    if (detect_offer(u.text)) return UtteranceCategory::Offer;
    return UtteranceCategory::Other;
}

}  // namespace opm
