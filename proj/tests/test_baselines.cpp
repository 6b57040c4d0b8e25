#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "opm/baselines.hpp"
#include "opm/errors.hpp"
#include "opm/synthetic.hpp"

using namespace opm;

namespace {

Instance text_instance(std::vector<std::string> texts) {
    Instance inst;
    inst.id = "t";
    inst.label = PriorityOrder({0, 1, 2});
    for (std::size_t i = 0; i < texts.size(); ++i)
        inst.utterances.push_back({i % 2 == 0 ? Author::Self : Author::Opp, texts[i], {}});
    return inst;
}

}  // namespace

TEST_CASE("stopword list covers the usual function words") {
    const auto& sw = stopwords();
    CHECK(sw.size() > 150);
    for (const char* w : {"the", "and", "not", "i", "you", "of", "very"}) CHECK(sw.count(w) == 1);
    CHECK(sw.count("water") == 0);
}

TEST_CASE("bow vocabulary: frequency order, lexicographic ties, stopwords out") {
    std::vector<Instance> train{
        text_instance({"water water water food food banana", "zebra apple apple the the the"})};
    BowVocab v = BowVocab::build(train, 500);
    CHECK(v.index_of("the") == -1);
    CHECK(v.index_of("water") == 0);  // 3 occurrences
    // food and apple tie at 2: lexicographic order breaks the tie
    CHECK(v.index_of("apple") == 1);
    CHECK(v.index_of("food") == 2);
    // banana and zebra tie at 1
    CHECK(v.index_of("banana") == 3);
    CHECK(v.index_of("zebra") == 4);

    BowVocab capped = BowVocab::build(train, 3);
    CHECK(capped.size() == 3);
    CHECK(capped.index_of("banana") == -1);
}

TEST_CASE("bow vocabulary construction is deterministic") {
    SynthConfig sc;
    sc.count = 30;
    auto corpus = generate_synthetic(sc, 41);
    CHECK(BowVocab::build(corpus, 500).words() == BowVocab::build(corpus, 500).words());
}

TEST_CASE("bow features: hand counts, normalization, zero vectors") {
    std::vector<Instance> train{text_instance({"water water food firewood banana"})};
    BowVocab v = BowVocab::build(train, 500);

    std::vector<double> f = bow_features({{Author::Opp, "water water food", {}}}, v);
    CHECK(f[static_cast<std::size_t>(v.index_of("water"))] == doctest::Approx(2.0 / 3.0));
    CHECK(f[static_cast<std::size_t>(v.index_of("food"))] == doctest::Approx(1.0 / 3.0));
    double sum = 0.0;
    for (double x : f) sum += x;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

    // only stopwords / out-of-vocabulary words -> all zero, stays zero
    std::vector<double> zero = bow_features({{Author::Opp, "the of a zzz", {}}}, v);
    for (double x : zero) CHECK(x == 0.0);
}

TEST_CASE("bow features are monotone in content") {
    std::vector<Instance> train{text_instance({"water food firewood need take camp"})};
    BowVocab v = BowVocab::build(train, 500);
    std::vector<Utterance> base{{Author::Opp, "water food", {}}};
    std::vector<double> f1 = bow_features(base, v);
    base.push_back({Author::Self, "camp camp", {}});
    std::vector<double> f2 = bow_features(base, v);
    // unnormalized counts only grew for words of the added utterance
    CHECK(f2[static_cast<std::size_t>(v.index_of("camp"))] > 0.0);
    CHECK(f1[static_cast<std::size_t>(v.index_of("camp"))] == 0.0);
    // relative ratio of untouched words is preserved
    double r1 = f1[static_cast<std::size_t>(v.index_of("water"))] / f1[static_cast<std::size_t>(v.index_of("food"))];
    double r2 = f2[static_cast<std::size_t>(v.index_of("water"))] / f2[static_cast<std::size_t>(v.index_of("food"))];
    CHECK(r1 == doctest::Approx(r2).epsilon(1e-12));
}

TEST_CASE("bow model: score range and bias-only behavior on zero input") {
    std::vector<Instance> train{text_instance({"water food firewood need take camp one two three"})};
    BowVocab v = BowVocab::build(train, 500);
    Rng rng(3);
    BowModel model(BowConfig{}, v, rng);

    std::vector<double> zero(static_cast<std::size_t>(v.size()), 0.0);
    std::vector<double> base = model.forward(zero);
    for (double s : base) {
        CHECK(s > 0.0);
        CHECK(s < 1.0);
    }
    // with a zero input the first weight matrix is inert
    for (nn::Param* p : model.params())
        if (p->name == "bow.w1")
            for (auto& x : p->value.v) x += 0.37;
    CHECK(model.forward(zero) == base);

    CHECK_THROWS_AS(model.forward({0.0, 1.0}), ValidationError);
}

TEST_CASE("bow model predicts through partial views with clamping") {
    SynthConfig sc;
    sc.count = 10;
    auto corpus = generate_synthetic(sc, 43);
    BowVocab v = BowVocab::build(corpus, 500);
    Rng rng(4);
    BowModel model(BowConfig{}, v, rng);
    for (const auto& inst : corpus) {
        PriorityOrder clamped = model.predict_at_k(inst, 99);
        CHECK(clamped == model.predict_at_k(inst, inst.opponent_utterance_count()));
        for (int k = 1; k <= 5; ++k) {
            auto row = model.score_row_at_k(inst, k);
            CHECK(row.size() == 3);
            for (double s : row) {
                CHECK(s > 0.0);
                CHECK(s < 1.0);
            }
        }
    }
}

TEST_CASE("seeded random ranks replay exactly") {
    Rng a(5), b(5);
    for (int i = 0; i < 50; ++i) CHECK(random_rank(a, 3) == random_rank(b, 3));
}
