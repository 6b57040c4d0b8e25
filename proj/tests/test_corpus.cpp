#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "opm/corpus_io.hpp"
#include "opm/errors.hpp"
#include "opm/foldplan.hpp"
#include "opm/synthetic.hpp"

using namespace opm;

namespace {

std::string fixture(const std::string& name) { return std::string(OPM_FIXTURE_DIR) + "/" + name; }

std::string corpus_bytes(const std::vector<Instance>& instances) {
    std::ostringstream os;
    for (const auto& i : instances) os << instance_to_json(i, IssueSet::standard()).dump() << "\n";
    return os.str();
}

}  // namespace

TEST_CASE("casino loader: records, skips and tag normalization") {
    CasinoLoad load = load_casino(fixture("casino_sample.json"), FieldMap::casino_defaults());
    CHECK(load.dialogues.size() == 2);
    CHECK(load.skipped == 1);  // demo_0003 lacks one participant's priorities

    const RawDialogue& d1 = load.dialogues[0];
    CHECK(d1.id == "demo_0001");
    CHECK(d1.turns.size() == 6);
    // annotations attach to the exact utterance, with '_' -> '-'
    CHECK(d1.turns[1].tags == std::vector<std::string>{"self-need", "promote-self"});

    // demo_0002 opens with two consecutive agent_1 messages -> merged
    const RawDialogue& d2 = load.dialogues[1];
    CHECK(d2.turns.size() == 4);
    CHECK(d2.turns[0].text == "hi there! hope you are ready to split supplies");
}

TEST_CASE("perspective extraction doubles dialogues and swaps labels") {
    CasinoLoad load = load_casino(fixture("casino_sample.json"), FieldMap::casino_defaults());
    std::vector<Instance> instances;
    for (const auto& raw : load.dialogues) {
        auto [a, b] = extract_perspectives(raw, IssueSet::standard());
        instances.push_back(a);
        instances.push_back(b);
    }
    CHECK(instances.size() == 2 * load.dialogues.size());

    const Instance& a = instances[0];
    const Instance& b = instances[1];
    CHECK(a.id == "demo_0001.a");
    CHECK(b.id == "demo_0001.b");
    // agent_1's perspective is labeled with agent_2's order: water > food > firewood
    CHECK(a.label.to_names(IssueSet::standard()) == std::vector<std::string>{"water", "food", "firewood"});
    CHECK(b.label.to_names(IssueSet::standard()) == std::vector<std::string>{"firewood", "food", "water"});
    // scenario counterparts mirror each other
    CHECK(a.scenario->opp_order == b.scenario->self_order);
    CHECK(a.scenario->self_order == b.scenario->opp_order);
    // texts unchanged, authorship flipped
    CHECK(a.utterances[0].author == Author::Self);
    CHECK(b.utterances[0].author == Author::Opp);
    CHECK(a.utterances[0].text == b.utterances[0].text);
}

TEST_CASE("partial views follow the 2k / 2k-1 rule and clamp") {
    Instance self_first;
    self_first.id = "pv1";
    self_first.label = PriorityOrder({0, 1, 2});
    for (int i = 0; i < 6; ++i)
        self_first.utterances.push_back({i % 2 == 0 ? Author::Self : Author::Opp, "u" + std::to_string(i), {}});

    PartialDialogue pv = partial_view(self_first, 2);
    CHECK(pv.utterances.size() == 4);  // 2k
    CHECK(pv.clamped == false);

    Instance opp_first = self_first;
    for (std::size_t i = 0; i < opp_first.utterances.size(); ++i)
        opp_first.utterances[i].author = i % 2 == 0 ? Author::Opp : Author::Self;
    pv = partial_view(opp_first, 2);
    CHECK(pv.utterances.size() == 3);  // 2k-1

    pv = partial_view(self_first, 5);  // only 3 opponent utterances exist
    CHECK(pv.clamped == true);
    CHECK(pv.k == 3);
    CHECK(pv.utterances.size() == 6);

    CHECK_THROWS_AS(partial_view(self_first, 0), ValidationError);
}

TEST_CASE("instance validation enforces alternation and mask agreement") {
    Instance inst;
    inst.id = "bad";
    inst.label = PriorityOrder({0, 1, 2});
    inst.utterances = {{Author::Self, "a", {}}, {Author::Self, "b", {}}};
    CHECK_THROWS_AS(validate_instance(inst, 3), ValidationError);

    inst.utterances = {{Author::Self, "a", {}}, {Author::Opp, "b", {}}};
    validate_instance(inst, 3);

    inst.pair_mask = std::vector<std::pair<int, int>>{{2, 0}};  // label says 0 above 2
    CHECK_THROWS_AS(validate_instance(inst, 3), ValidationError);

    inst.pair_mask = std::vector<std::pair<int, int>>{{0, 2}};
    validate_instance(inst, 3);
}

TEST_CASE("canonical json round-trips instances exactly") {
    SynthConfig cfg;
    cfg.count = 25;
    std::vector<Instance> corpus = generate_synthetic(cfg, 99);
    corpus[3].pair_mask.reset();

    auto tmp = std::filesystem::temp_directory_path() / "opm_roundtrip.jsonl";
    write_instances(tmp.string(), corpus);
    std::vector<Instance> back = read_instances(tmp.string());
    REQUIRE(back.size() == corpus.size());
    CHECK(corpus_bytes(back) == corpus_bytes(corpus));
    std::filesystem::remove(tmp);
}

TEST_CASE("canonical reader reports the offending line") {
    auto tmp = std::filesystem::temp_directory_path() / "opm_badline.jsonl";
    {
        std::ofstream out(tmp);
        out << "{not json}\n";
    }
    CHECK_THROWS_WITH_AS(read_instances(tmp.string()), doctest::Contains("line 1"), ParseError);
    std::filesystem::remove(tmp);
}

TEST_CASE("dnd loader: well-formed lines parse, blank lines skip") {
    std::vector<RawDndDialogue> records = load_dnd(fixture("dnd_sample.txt"));
    REQUIRE(records.size() == 3);

    const RawDndDialogue& r0 = records[0];
    CHECK(r0.counts == std::array<int, 3>{1, 4, 1});
    CHECK(r0.reader_values == std::array<int, 3>{4, 1, 2});
    CHECK(r0.partner_values == std::array<int, 3>{2, 1, 0});
    REQUIRE(r0.turns.size() == 4);  // <selection> turn dropped
    CHECK(r0.turns[0].by_reader == false);
    CHECK(r0.turns[0].text == "i would like the books and hats .");
    CHECK(r0.turns[1].by_reader == true);
}

TEST_CASE("dnd loader: non-integer value fields raise a parse error with the line") {
    auto tmp = std::filesystem::temp_directory_path() / "opm_bad_dnd.txt";
    {
        std::ofstream out(tmp);
        out << "<input> 1 4 x 1 1 2 </input> <dialogue> THEM: hi <eos> YOU: hi </dialogue> "
               "<output> </output> <partner_input> 1 2 4 1 1 0 </partner_input>\n";
    }
    CHECK_THROWS_WITH_AS(load_dnd(tmp.string()), doctest::Contains("line 1"), ParseError);
    std::filesystem::remove(tmp);
}

TEST_CASE("synthetic generation is deterministic and byte identical") {
    SynthConfig cfg;
    cfg.count = 10;
    std::vector<Instance> a = generate_synthetic(cfg, 7);
    std::vector<Instance> b = generate_synthetic(cfg, 7);
    CHECK(corpus_bytes(a) == corpus_bytes(b));
    std::vector<Instance> c = generate_synthetic(cfg, 8);
    CHECK(corpus_bytes(a) != corpus_bytes(c));
}

TEST_CASE("synthetic corpus: alternation, counts, scenario presence") {
    SynthConfig cfg;
    cfg.count = 50;
    for (const auto& inst : generate_synthetic(cfg, 3)) {
        validate_instance(inst, 3);
        int n_opp = inst.opponent_utterance_count();
        CHECK(n_opp >= cfg.min_opp_utterances);
        CHECK(n_opp <= cfg.max_opp_utterances);
        CHECK((inst.utterances.size() == 2 * static_cast<std::size_t>(n_opp) ||
               inst.utterances.size() == 2 * static_cast<std::size_t>(n_opp) - 1));
        CHECK(inst.scenario.has_value());
        CHECK(inst.source == Source::SYN);
    }
}

TEST_CASE("noise-free synthetic corpus is fully recoverable by the template reader") {
    SynthConfig cfg;
    cfg.count = 200;
    cfg.noise = 0.0;
    for (const auto& inst : generate_synthetic(cfg, 11)) {
        auto guess = synthetic_oracle(inst.utterances);
        REQUIRE(guess.has_value());
        CHECK(*guess == inst.label);
    }
}

TEST_CASE("synthetic labels are near uniform over the 6 orders at count=2000") {
    SynthConfig cfg;
    cfg.count = 2000;
    std::map<std::vector<int>, int> freq;
    for (const auto& inst : generate_synthetic(cfg, 2024)) ++freq[inst.label.order];
    CHECK(freq.size() == 6);
    for (const auto& [order, count] : freq) {
        double share = static_cast<double>(count) / 2000.0;
        CHECK(share > 1.0 / 6.0 - 0.03);
        CHECK(share < 1.0 / 6.0 + 0.03);
    }
}

TEST_CASE("offers-only corpus also encodes the full order") {
    SynthConfig cfg;
    cfg.count = 40;
    cfg.noise = 0.0;
    cfg.offers_only = true;
    cfg.id_prefix = "synd";
    for (const auto& inst : generate_synthetic(cfg, 5)) {
        auto guess = synthetic_oracle(inst.utterances);
        REQUIRE(guess.has_value());
        CHECK(*guess == inst.label);
        for (const auto& u : inst.utterances) CHECK(u.tags.empty());
    }
}

TEST_CASE("fold plan: dialogue-level partition without perspective leakage") {
    // perspective pairs share a dialogue id
    std::vector<Instance> instances;
    for (int i = 0; i < 40; ++i) {
        for (const char* suffix : {".a", ".b"}) {
            Instance inst;
            inst.id = "dlg_" + std::to_string(i) + suffix;
            inst.label = PriorityOrder({0, 1, 2});
            inst.utterances = {{Author::Self, "hi", {}}, {Author::Opp, "hello", {}}};
            instances.push_back(inst);
        }
    }
    FoldPlan plan = make_fold_plan(instances, 5, 4, 123);
    plan.validate();
    CHECK(plan.folds.size() == 5);

    std::set<std::string> eval_union;
    for (const auto& fold : plan.folds) {
        CHECK(fold.tune_ids.size() == 4);
        CHECK(fold.eval_ids.size() == 8);
        CHECK(fold.train_ids.size() == 40 - 8 - 4);
        for (const auto& id : fold.eval_ids) eval_union.insert(id);

        // both perspectives of a dialogue resolve to the same role
        auto eval_insts = select_by_dialogues(instances, fold.eval_ids);
        CHECK(eval_insts.size() == 2 * fold.eval_ids.size());
        auto train_insts = select_by_dialogues(instances, fold.train_ids);
        std::set<std::string> train_dlgs;
        for (const auto& inst : train_insts) train_dlgs.insert(dialogue_id_of(inst.id));
        for (const auto& inst : eval_insts) CHECK(train_dlgs.count(dialogue_id_of(inst.id)) == 0);
    }
    CHECK(eval_union.size() == 40);

    // corrupting the plan trips validation
    FoldPlan broken = plan;
    broken.folds[0].train_ids.push_back(broken.folds[0].eval_ids[0]);
    CHECK_THROWS_AS(broken.validate(), ValidationError);
}

TEST_CASE("fold plan: single fold degenerates to one train/eval split") {
    std::vector<Instance> instances;
    for (int i = 0; i < 10; ++i) {
        Instance inst;
        inst.id = "d" + std::to_string(i);
        inst.label = PriorityOrder({0, 1, 2});
        inst.utterances = {{Author::Self, "hi", {}}, {Author::Opp, "hello", {}}};
        instances.push_back(inst);
    }
    FoldPlan plan = make_fold_plan(instances, 1, 2, 9);
    CHECK(plan.folds.size() == 1);
    CHECK(!plan.folds[0].eval_ids.empty());
    CHECK(!plan.folds[0].train_ids.empty());
}

TEST_CASE("field map overrides change lookup paths") {
    auto tmp = std::filesystem::temp_directory_path() / "opm_fieldmap.json";
    {
        std::ofstream out(tmp);
        out << R"({"utterance_text": "msg"})";
    }
    FieldMap fm = FieldMap::from_file(tmp.string());
    CHECK(fm.path("utterance_text") == "msg");
    CHECK(fm.path("chat_logs") == "chat_logs");
    std::filesystem::remove(tmp);

    {
        std::ofstream out(tmp);
        out << R"({"no_such_key": "x"})";
    }
    CHECK_THROWS_AS(FieldMap::from_file(tmp.string()), ValidationError);
    std::filesystem::remove(tmp);
}
