#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "opm/errors.hpp"
#include "opm/metrics.hpp"
#include "opm/ranker.hpp"
#include "opm/synthetic.hpp"

using namespace opm;

namespace {

RankerConfig small_config() {
    RankerConfig cfg;
    cfg.d = 32;
    cfg.level1_layers = 1;
    cfg.level2_layers = 1;
    cfg.heads = 2;
    cfg.head_hidden = 16;
    cfg.dropout = 0.0;
    return cfg;
}

RankerModel small_model(std::uint64_t seed = 7) {
    std::vector<std::string> texts{"we need water the most", "food is fine", "firewood matters least",
                                   "i take three food and two water", "hello there friend"};
    Vocab vocab = Vocab::build(texts, 1);
    Rng rng(seed);
    return RankerModel(small_config(), vocab, rng);
}

}  // namespace

TEST_CASE("tokenizer: lowercase, punctuation split, determinism") {
    CHECK(tokenize("I need Water!") == std::vector<std::string>{"i", "need", "water", "!"});
    CHECK(tokenize("don't stop") == std::vector<std::string>{"don", "'", "t", "stop"});
    CHECK(tokenize("  spaced   out  ") == std::vector<std::string>{"spaced", "out"});
    CHECK(tokenize("same text") == tokenize("same text"));
}

TEST_CASE("vocabulary: reserved ids, min frequency, unknown words") {
    Vocab v = Vocab::build({"water water food", "water food", "firewood"}, 2);
    CHECK(v.id_of("water") >= 4);
    CHECK(v.id_of("food") >= 4);
    CHECK(v.id_of("firewood") == Vocab::kUnk);  // frequency 1
    CHECK(v.id_of("never-seen") == Vocab::kUnk);
    CHECK(v.word_of(Vocab::kSelf) == "<self>");
    // frequency then lexicographic ordering is stable
    CHECK(v.id_of("water") < v.id_of("food"));
    CHECK(v.encode("water food water", 64) == std::vector<int>{v.id_of("water"), v.id_of("food"), v.id_of("water")});
    CHECK(v.encode("water food water", 2) == std::vector<int>{v.id_of("water"), v.id_of("food")});
}

TEST_CASE("utterance encoding depends on the author token") {
    RankerModel model = small_model();
    Utterance as_self{Author::Self, "we need water the most", {}};
    Utterance as_opp{Author::Opp, "we need water the most", {}};
    nn::Tape tape;
    Rng rng(0);
    auto a = model.encode_utterance(tape, as_self, false, rng);
    auto b = model.encode_utterance(tape, as_opp, false, rng);
    const nn::Tensor& ta = tape.val(a);
    const nn::Tensor& tb = tape.val(b);
    CHECK(ta.cols == model.config().d);
    CHECK(ta.rows == 1);
    bool differ = false;
    for (std::size_t i = 0; i < ta.v.size(); ++i)
        if (ta.v[i] != tb.v[i]) differ = true;
    CHECK(differ);
}

TEST_CASE("utterance encoding is word-order sensitive") {
    RankerModel model = small_model();
    nn::Tape tape;
    Rng rng(0);
    auto a = model.encode_utterance(tape, {Author::Opp, "water food", {}}, false, rng);
    auto b = model.encode_utterance(tape, {Author::Opp, "food water", {}}, false, rng);
    bool differ = false;
    for (std::size_t i = 0; i < tape.val(a).v.size(); ++i)
        if (tape.val(a).v[i] != tape.val(b).v[i]) differ = true;
    CHECK(differ);
}

TEST_CASE("utterance encoding output width is d regardless of length") {
    RankerModel model = small_model();
    for (const char* text : {"hi", "we need water", "i take three food and two water and all the firewood today"}) {
        nn::Tape tape;
        Rng rng(0);
        auto node = model.encode_utterance(tape, {Author::Opp, text, {}}, false, rng);
        CHECK(tape.val(node).rows == 1);
        CHECK(tape.val(node).cols == model.config().d);
    }
}

TEST_CASE("empty utterance text is rejected") {
    RankerModel model = small_model();
    nn::Tape tape;
    Rng rng(0);
    CHECK_THROWS_AS(model.encode_utterance(tape, {Author::Opp, "", {}}, false, rng), ValidationError);
}

TEST_CASE("score matrix: shape, range, zeroed head gives 0.5") {
    RankerModel model = small_model();
    SynthConfig sc;
    sc.count = 5;
    auto corpus = generate_synthetic(sc, 3);
    for (const auto& inst : corpus) {
        nn::Tensor scores = model.score_matrix(inst.utterances);
        CHECK(scores.rows == static_cast<int>(inst.utterances.size()));
        CHECK(scores.cols == 3);
        for (double v : scores.v) {
            CHECK(v > 0.0);
            CHECK(v < 1.0);
        }
    }

    // zero the head: logits vanish, scores sit exactly at 0.5
    RankerModel zeroed = small_model();
    for (nn::Param* p : zeroed.params())
        if (p->name.rfind("head.", 0) == 0) p->value.fill(0.0);
    nn::Tensor scores = zeroed.score_matrix(corpus[0].utterances);
    for (double v : scores.v) CHECK(v == 0.5);
}

TEST_CASE("predict_ranking fixtures and tie handling") {
    const IssueSet& is = IssueSet::standard();
    CHECK(predict_ranking({0.9, 0.5, 0.1}).to_names(is) == std::vector<std::string>{"food", "water", "firewood"});
    CHECK(predict_ranking({0.5, 0.5, 0.2}).to_names(is) == std::vector<std::string>{"food", "water", "firewood"});
    CHECK(predict_ranking({0.1, 0.2, 0.9}).to_names(is) == std::vector<std::string>{"firewood", "water", "food"});
    CHECK_THROWS_AS(predict_ranking({0.1, std::nan(""), 0.3}), NumericError);
}

TEST_CASE("prediction from a prefix equals the full forward row (bitwise)") {
    RankerModel model = small_model();
    SynthConfig sc;
    sc.count = 20;
    auto corpus = generate_synthetic(sc, 17);
    for (const auto& inst : corpus) {
        nn::Tensor full = model.score_matrix(inst.utterances);
        int n_opp = inst.opponent_utterance_count();
        for (int k = 1; k <= n_opp; ++k) {
            std::vector<double> from_prefix = model.score_row_at_k(inst, k);
            int row = inst.opponent_position(k);
            for (int q = 0; q < 3; ++q) CHECK(from_prefix[static_cast<std::size_t>(q)] == full.at(row, q));
        }
    }
}

TEST_CASE("predictions are invariant to everything after the k-th opponent utterance") {
    RankerModel model = small_model();
    SynthConfig sc;
    sc.count = 10;
    auto corpus = generate_synthetic(sc, 19);
    Rng scramble(5);
    for (const auto& inst : corpus) {
        int n_opp = inst.opponent_utterance_count();
        for (int k = 1; k < n_opp; ++k) {
            std::vector<double> before = model.score_row_at_k(inst, k);

            Instance tampered = inst;
            int cut = inst.opponent_position(k);
            for (std::size_t i = static_cast<std::size_t>(cut) + 1; i < tampered.utterances.size(); ++i)
                tampered.utterances[i].text = "totally different content " + std::to_string(scramble.next_u64() % 100);
            tampered.utterances.push_back(
                {tampered.utterances.back().author == Author::Self ? Author::Opp : Author::Self, "an extra turn", {}});

            std::vector<double> after = model.score_row_at_k(tampered, k);
            for (int q = 0; q < 3; ++q) CHECK(before[static_cast<std::size_t>(q)] == after[static_cast<std::size_t>(q)]);
        }
    }
}

TEST_CASE("clamped k predicts at the last opponent utterance") {
    RankerModel model = small_model();
    SynthConfig sc;
    sc.count = 5;
    auto corpus = generate_synthetic(sc, 23);
    for (const auto& inst : corpus) {
        int n_opp = inst.opponent_utterance_count();
        CHECK(model.predict_at_k(inst, 50) == model.predict_at_k(inst, n_opp));
    }
}

TEST_CASE("k=1 on an opponent-first dialogue reads row 0") {
    RankerModel model = small_model();
    Instance inst;
    inst.id = "of";
    inst.label = PriorityOrder({0, 1, 2});
    inst.utterances = {{Author::Opp, "we need water the most", {}},
                       {Author::Self, "hello there friend", {}},
                       {Author::Opp, "food is fine", {}}};
    PartialDialogue pv = partial_view(inst, 1);
    CHECK(pv.utterances.size() == 1);
    nn::Tensor full = model.score_matrix(inst.utterances);
    std::vector<double> row = model.score_row_at_k(inst, 1);
    for (int q = 0; q < 3; ++q) CHECK(row[static_cast<std::size_t>(q)] == full.at(0, q));
}

TEST_CASE("per-k batch predictions match per-k single predictions") {
    RankerModel model = small_model();
    SynthConfig sc;
    sc.count = 8;
    auto corpus = generate_synthetic(sc, 29);
    RankerPredictor pred(model);
    for (const auto& inst : corpus) {
        auto batch = pred.predict_per_k(inst, 5);
        for (int k = 1; k <= 5; ++k) CHECK(batch[static_cast<std::size_t>(k - 1)] == model.predict_at_k(inst, k));
    }
}

TEST_CASE("dialogue encoding via the embedding seam matches built-in level-one vectors") {
    RankerModel model = small_model();
    Instance inst;
    inst.id = "seam";
    inst.label = PriorityOrder({0, 1, 2});
    inst.utterances = {{Author::Self, "hello there friend", {}}, {Author::Opp, "we need water the most", {}}};

    // collect the built-in pooled vectors
    std::vector<std::vector<double>> vecs;
    for (const auto& u : inst.utterances) {
        nn::Tape tape;
        Rng rng(0);
        vecs.push_back(tape.val(model.encode_utterance(tape, u, false, rng)).v);
    }
    nn::Tensor via_seam = model.score_matrix_from_embeddings(vecs);
    nn::Tensor direct = model.score_matrix(inst.utterances);
    REQUIRE(via_seam.v.size() == direct.v.size());
    for (std::size_t i = 0; i < via_seam.v.size(); ++i) CHECK(via_seam.v[i] == direct.v[i]);

    CHECK_THROWS_AS(model.score_matrix_from_embeddings({{0.0, 1.0}}), ValidationError);
}

TEST_CASE("file embedding provider replays stored vectors") {
    auto tmp = std::filesystem::temp_directory_path() / "opm_embeddings.jsonl";
    {
        std::ofstream out(tmp);
        out << R"({"author":"opp","text":"we need water","embedding":[0.1,0.2,0.3]})" << "\n";
        out << R"({"author":"self","text":"hello","embedding":[0.4,0.5,0.6]})" << "\n";
    }
    FileEmbeddingProvider provider(tmp.string());
    CHECK(provider.dim() == 3);
    CHECK(provider.encode(Author::Opp, "we need water") == std::vector<double>{0.1, 0.2, 0.3});
    CHECK_THROWS_AS(provider.encode(Author::Self, "unknown line"), ValidationError);
    std::filesystem::remove(tmp);
}

TEST_CASE("attention capture: masses sum to one per query") {
    RankerModel model = small_model();
    SynthConfig sc;
    sc.count = 6;
    auto corpus = generate_synthetic(sc, 31);
    AttentionMassReport r = attention_mass_report(corpus, model);
    CHECK(r.max_row_sum_error < 1e-9);
    CHECK(r.preference + r.offer + r.other == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.queries > 0);
}

TEST_CASE("config validation rejects inconsistent shapes") {
    RankerConfig bad = small_config();
    bad.heads = 5;  // 32 % 5 != 0
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = small_config();
    bad.dropout = 1.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("dialogues longer than the position table are rejected with advice") {
    RankerConfig cfg = small_config();
    cfg.max_utterances = 4;
    std::vector<std::string> texts{"hi"};
    Rng rng(1);
    RankerModel model(cfg, Vocab::build(texts, 1), rng);
    Instance inst;
    inst.id = "long";
    inst.label = PriorityOrder({0, 1, 2});
    for (int i = 0; i < 6; ++i)
        inst.utterances.push_back({i % 2 ? Author::Opp : Author::Self, "hi", {}});
    CHECK_THROWS_WITH_AS(model.score_matrix(inst.utterances), doctest::Contains("max_utterances"), ValidationError);
}
