#include "opm/corpus_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "opm/errors.hpp"

namespace opm {

namespace {

std::string lowercase(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

const nlohmann::json* get_path(const nlohmann::json& j, const std::string& dotted) {
    const nlohmann::json* cur = &j;
    std::size_t start = 0;
    while (start <= dotted.size()) {
        std::size_t dot = dotted.find('.', start);
        std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (!cur->is_object() || !cur->contains(key)) return nullptr;
        cur = &(*cur)[key];
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    return cur;
}

std::vector<std::string> split_tags(const std::string& csv) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(csv);
    while (std::getline(ss, cur, ',')) {
        std::string t = normalize_tag(cur);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

}  // namespace

std::string normalize_tag(const std::string& tag) {
    std::string out;
    for (char c : tag) {
        unsigned char u = static_cast<unsigned char>(c);
        if (std::isspace(u)) continue;
        out.push_back(c == '_' ? '-' : static_cast<char>(std::tolower(u)));
    }
    return out;
}

FieldMap FieldMap::casino_defaults() {
    FieldMap fm;
    fm.paths = {
        {"dialogue_id", "dialogue_id"},
        {"chat_logs", "chat_logs"},
        {"utterance_text", "text"},
        {"utterance_speaker", "id"},
        {"participants", "participant_info"},
        {"value2issue", "value2issue"},
        {"value2reason", "value2reason"},
        {"annotations", "annotations"},
    };
    return fm;
}

FieldMap FieldMap::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("field map not readable: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("field map " + path + ": " + e.what());
    }
    FieldMap fm = casino_defaults();
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (fm.paths.find(it.key()) == fm.paths.end())
            throw ValidationError("field map " + path + ": unknown key '" + it.key() + "'");
        fm.paths[it.key()] = it.value().get<std::string>();
    }
    return fm;
}

const std::string& FieldMap::path(const std::string& key) const {
    auto it = paths.find(key);
    if (it == paths.end()) throw ValidationError("field map: no entry for '" + key + "'");
    return it->second;
}

CasinoLoad load_casino(const std::string& path, const FieldMap& fm, const IssueSet& issues) {
    std::ifstream in(path);
    if (!in) throw ValidationError("input file not readable: " + path);
    nlohmann::json root;
    try {
        in >> root;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return load_casino_json(root, fm, issues, path);
}

CasinoLoad load_casino_json(const nlohmann::json& root, const FieldMap& fm, const IssueSet& issues,
                            const std::string& origin) {
    if (!root.is_array()) throw ParseError(origin + ": expected a top-level array of chat records");

    CasinoLoad out;
    for (std::size_t rec = 0; rec < root.size(); ++rec) {
        const nlohmann::json& r = root[rec];
        std::string rec_tag = origin + " record " + std::to_string(rec);

        const nlohmann::json* parts = get_path(r, fm.path("participants"));
        if (!parts || !parts->is_object()) {
            ++out.skipped;
            continue;
        }
        RawDialogue raw;
        const nlohmann::json* did = get_path(r, fm.path("dialogue_id"));
        if (did && did->is_string())
            raw.id = did->get<std::string>();
        else {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "casino_%05zu", rec);
            raw.id = buf;
        }

        bool usable = true;
        int pi = 0;
        for (auto it = parts->begin(); it != parts->end() && pi < 2; ++it, ++pi) {
            raw.pids[static_cast<std::size_t>(pi)] = it.key();
            const nlohmann::json* v2i = get_path(it.value(), fm.path("value2issue"));
            if (!v2i || !v2i->is_object() || !v2i->contains("High") || !v2i->contains("Medium") || !v2i->contains("Low")) {
                usable = false;
                break;
            }
            std::vector<int> order;
            for (const char* level : {"High", "Medium", "Low"}) {
                int idx = issues.find(lowercase((*v2i)[level].get<std::string>()));
                if (idx < 0) {
                    usable = false;
                    break;
                }
                order.push_back(idx);
            }
            if (!usable) break;
            PriorityOrder po(order);
            if (!po.is_permutation_of(issues.size())) {
                usable = false;
                break;
            }
            raw.orders[static_cast<std::size_t>(pi)] = po;
        }
        if (!usable || pi != 2 || parts->size() != 2) {
            ++out.skipped;
            continue;
        }

        const nlohmann::json* logs = get_path(r, fm.path("chat_logs"));
        if (!logs || !logs->is_array())
            throw ParseError(rec_tag + ": missing chat log array at '" + fm.path("chat_logs") + "'");

        // strategy annotations, keyed by exact utterance text
        std::map<std::string, std::vector<std::string>> tag_index;
        const nlohmann::json* annos = get_path(r, fm.path("annotations"));
        if (annos && annos->is_array()) {
            for (const auto& a : *annos) {
                if (a.is_array() && a.size() >= 2 && a[0].is_string() && a[1].is_string())
                    tag_index[a[0].get<std::string>()] = split_tags(a[1].get<std::string>());
            }
        }

        for (std::size_t ui = 0; ui < logs->size(); ++ui) {
            const nlohmann::json& u = (*logs)[ui];
            const nlohmann::json* text = get_path(u, fm.path("utterance_text"));
            const nlohmann::json* speaker = get_path(u, fm.path("utterance_speaker"));
            if (!text || !text->is_string() || !speaker || !speaker->is_string())
                throw ParseError(rec_tag + ": malformed chat entry " + std::to_string(ui));
            RawTurn turn;
            turn.pid = speaker->get<std::string>();
            turn.text = text->get<std::string>();
            auto tg = tag_index.find(turn.text);
            if (tg != tag_index.end()) turn.tags = tg->second;
            if (turn.pid != raw.pids[0] && turn.pid != raw.pids[1])
                throw ParseError(rec_tag + ": speaker '" + turn.pid + "' is not a participant");
            // consecutive turns by one speaker collapse into a single utterance
            if (!raw.turns.empty() && raw.turns.back().pid == turn.pid) {
                raw.turns.back().text += " " + turn.text;
                for (const auto& t : turn.tags)
                    if (std::find(raw.turns.back().tags.begin(), raw.turns.back().tags.end(), t) ==
                        raw.turns.back().tags.end())
                        raw.turns.back().tags.push_back(t);
            } else {
                raw.turns.push_back(std::move(turn));
            }
        }
        if (raw.turns.empty()) {
            ++out.skipped;
            continue;
        }
        out.dialogues.push_back(std::move(raw));
    }
    return out;
}

std::pair<Instance, Instance> extract_perspectives(const RawDialogue& raw, const IssueSet& issues) {
    auto build = [&](int self_idx, const char* suffix) {
        int opp_idx = 1 - self_idx;
        Instance inst;
        inst.id = raw.id + suffix;
        inst.source = Source::CD;
        inst.label = raw.orders[static_cast<std::size_t>(opp_idx)];
        inst.scenario = Scenario{raw.orders[static_cast<std::size_t>(self_idx)],
                                 raw.orders[static_cast<std::size_t>(opp_idx)]};
        for (const auto& t : raw.turns) {
            Utterance u;
            u.author = (t.pid == raw.pids[static_cast<std::size_t>(self_idx)]) ? Author::Self : Author::Opp;
            u.text = t.text;
            u.tags = t.tags;
            inst.utterances.push_back(std::move(u));
        }
        validate_instance(inst, issues.size());
        return inst;
    };
    return {build(0, ".a"), build(1, ".b")};
}

const std::vector<std::string>& dnd_native_issues() {
    static std::vector<std::string> names{"book", "hat", "ball"};
    return names;
}

std::vector<RawDndDialogue> load_dnd(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("input file not readable: " + path);

    auto section = [&](const std::string& line, const std::string& tag, int lineno) {
        std::string open = "<" + tag + ">";
        std::string close = "</" + tag + ">";
        auto a = line.find(open);
        auto b = line.find(close);
        if (a == std::string::npos || b == std::string::npos || b < a)
            throw ParseError(path + " line " + std::to_string(lineno) + ": missing <" + tag + "> section");
        return line.substr(a + open.size(), b - a - open.size());
    };
    auto parse_six = [&](const std::string& s, int lineno) {
        std::array<int, 6> vals{};
        std::stringstream ss(s);
        std::string tok;
        int n = 0;
        while (ss >> tok) {
            if (n >= 6) throw ParseError(path + " line " + std::to_string(lineno) + ": expected 6 integers");
            try {
                std::size_t used = 0;
                vals[static_cast<std::size_t>(n)] = std::stoi(tok, &used);
                if (used != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw ParseError(path + " line " + std::to_string(lineno) + ": non-integer value field '" + tok + "'");
            }
            ++n;
        }
        if (n != 6) throw ParseError(path + " line " + std::to_string(lineno) + ": expected 6 integers, got " + std::to_string(n));
        return vals;
    };

    std::vector<RawDndDialogue> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;

        RawDndDialogue d;
        char buf[32];
        std::snprintf(buf, sizeof(buf), "dnd_%05d", lineno);
        d.id = buf;

        auto reader = parse_six(section(line, "input", lineno), lineno);
        auto partner = parse_six(section(line, "partner_input", lineno), lineno);
        for (int i = 0; i < 3; ++i) {
            d.counts[static_cast<std::size_t>(i)] = reader[static_cast<std::size_t>(2 * i)];
            d.reader_values[static_cast<std::size_t>(i)] = reader[static_cast<std::size_t>(2 * i + 1)];
            d.partner_values[static_cast<std::size_t>(i)] = partner[static_cast<std::size_t>(2 * i + 1)];
        }

        std::string dialogue = section(line, "dialogue", lineno);
        std::size_t pos = 0;
        while (pos < dialogue.size()) {
            std::size_t eos = dialogue.find("<eos>", pos);
            std::string turn_text = dialogue.substr(pos, eos == std::string::npos ? std::string::npos : eos - pos);
            pos = eos == std::string::npos ? dialogue.size() : eos + 5;

            bool by_reader;
            auto them = turn_text.find("THEM:");
            auto you = turn_text.find("YOU:");
            std::string body;
            if (them != std::string::npos) {
                by_reader = false;
                body = turn_text.substr(them + 5);
            } else if (you != std::string::npos) {
                by_reader = true;
                body = turn_text.substr(you + 4);
            } else {
                continue;
            }
            // strip control tokens and surrounding whitespace
            for (const char* ctl : {"<selection>", "<eos>"}) {
                std::size_t c;
                while ((c = body.find(ctl)) != std::string::npos) body.erase(c, std::string(ctl).size());
            }
            auto first = body.find_first_not_of(" \t");
            auto last = body.find_last_not_of(" \t");
            if (first == std::string::npos) continue;
            body = body.substr(first, last - first + 1);
            if (body.empty()) continue;

            if (!d.turns.empty() && d.turns.back().by_reader == by_reader)
                d.turns.back().text += " " + body;
            else
                d.turns.push_back({by_reader, body});
        }
        out.push_back(std::move(d));
    }
    return out;
}

nlohmann::json instance_to_json(const Instance& inst, const IssueSet& issues) {
    nlohmann::json j;
    j["id"] = inst.id;
    j["source"] = to_string(inst.source);
    nlohmann::json utts = nlohmann::json::array();
    for (const auto& u : inst.utterances) {
        nlohmann::json ju;
        ju["author"] = to_string(u.author);
        ju["text"] = u.text;
        if (!u.tags.empty()) ju["tags"] = u.tags;
        utts.push_back(std::move(ju));
    }
    j["utterances"] = std::move(utts);
    j["label"] = inst.label.to_names(issues);
    if (inst.pair_mask) {
        nlohmann::json pm = nlohmann::json::array();
        for (const auto& [hi, lo] : *inst.pair_mask) pm.push_back({issues.name(hi), issues.name(lo)});
        j["pair_mask"] = std::move(pm);
    }
    if (inst.scenario) {
        j["scenario"] = {{"self_order", inst.scenario->self_order.to_names(issues)},
                         {"opp_order", inst.scenario->opp_order.to_names(issues)}};
    }
    return j;
}

Instance instance_from_json(const nlohmann::json& j, const IssueSet& issues) {
    Instance inst;
    try {
        inst.id = j.at("id").get<std::string>();
        inst.source = source_from_string(j.at("source").get<std::string>());
        for (const auto& ju : j.at("utterances")) {
            Utterance u;
            u.author = author_from_string(ju.at("author").get<std::string>());
            u.text = ju.at("text").get<std::string>();
            if (ju.contains("tags"))
                for (const auto& t : ju["tags"]) u.tags.push_back(normalize_tag(t.get<std::string>()));
            inst.utterances.push_back(std::move(u));
        }
        inst.label = PriorityOrder::from_names(j.at("label").get<std::vector<std::string>>(), issues);
        if (j.contains("pair_mask")) {
            std::vector<std::pair<int, int>> mask;
            for (const auto& p : j["pair_mask"])
                mask.emplace_back(issues.index_of(p.at(0).get<std::string>()),
                                  issues.index_of(p.at(1).get<std::string>()));
            inst.pair_mask = std::move(mask);
        }
        if (j.contains("scenario")) {
            Scenario sc;
            sc.self_order = PriorityOrder::from_names(j["scenario"].at("self_order").get<std::vector<std::string>>(), issues);
            sc.opp_order = PriorityOrder::from_names(j["scenario"].at("opp_order").get<std::vector<std::string>>(), issues);
            inst.scenario = std::move(sc);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("instance json: ") + e.what());
    }
    validate_instance(inst, issues.size());
    return inst;
}

std::vector<Instance> read_instances(const std::string& path, const IssueSet& issues) {
    std::ifstream in(path);
    if (!in) throw ValidationError("input file not readable: " + path);
    std::vector<Instance> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path + " line " + std::to_string(lineno) + ": " + e.what());
        }
        try {
            out.push_back(instance_from_json(j, issues));
        } catch (const ValidationError& e) {
            throw ParseError(path + " line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

void write_instances(const std::string& path, const std::vector<Instance>& instances, const IssueSet& issues) {
    std::ofstream out(path);
    if (!out) throw ValidationError("output file not writable: " + path);
    for (const auto& inst : instances) out << instance_to_json(inst, issues).dump() << "\n";
}

}  // namespace opm
