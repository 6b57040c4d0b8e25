#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "opm/baselines.hpp"
#include "opm/errors.hpp"
#include "opm/metrics.hpp"
#include "opm/synthetic.hpp"

using namespace opm;

namespace {

// Independent enumeration oracle: literal discounted-gain formula over all
// six orders of three issues, no shared code with the library path.
struct NdcgOracle {
    double relevance[3] = {5.0, 4.0, 3.0};

    double raw(const PriorityOrder& pred, const PriorityOrder& truth) const {
        double dcg = 0.0, idcg = 0.0;
        for (int pos = 0; pos < 3; ++pos) {
            int issue = pred.at(pos);
            int truth_rank = 0;
            while (truth.at(truth_rank) != issue) ++truth_rank;
            dcg += relevance[truth_rank] / std::log2(pos + 2.0);
            idcg += relevance[pos] / std::log2(pos + 2.0);
        }
        return dcg / idcg;
    }

    double worst(const PriorityOrder& truth) const {
        double w = 2.0;
        for (const auto& p : all_orders(3)) w = std::min(w, raw(p, truth));
        return w;
    }
};

}  // namespace

TEST_CASE("exact match and top-1 basics") {
    PriorityOrder truth({0, 1, 2});
    CHECK(ema(PriorityOrder({0, 1, 2}), truth) == 1.0);
    CHECK(ema(PriorityOrder({1, 0, 2}), truth) == 0.0);
    CHECK(top1(PriorityOrder({0, 2, 1}), truth) == 1.0);
    CHECK(top1(PriorityOrder({1, 0, 2}), truth) == 0.0);

    PriorityOrder bad({0, 1});
    CHECK_THROWS_AS(ema(bad, truth), ValidationError);
    CHECK_THROWS_AS(top1(bad, truth), ValidationError);
}

TEST_CASE("ema implies top1 instance-wise") {
    for (const auto& p : all_orders(3))
        for (const auto& t : all_orders(3))
            if (ema(p, t) == 1.0) CHECK(top1(p, t) == 1.0);
}

TEST_CASE("ndcg matches the enumeration oracle on all 36 pairs") {
    MetricConfig cfg;
    NdcgOracle oracle;
    for (const auto& truth : all_orders(3)) {
        for (const auto& pred : all_orders(3)) {
            CHECK(ndcg3(pred, truth, cfg) == doctest::Approx(oracle.raw(pred, truth)).epsilon(1e-12));
        }
    }
}

TEST_CASE("ndcg fixed points: perfect, reversed, permutation mean") {
    MetricConfig cfg;
    PriorityOrder truth({0, 1, 2});
    CHECK(ndcg3(truth, truth, cfg) == doctest::Approx(1.0).epsilon(1e-12));

    PriorityOrder reversed({2, 1, 0});
    double expected_reversed = (3.0 + 4.0 / std::log2(3.0) + 5.0 / 2.0) / (5.0 + 4.0 / std::log2(3.0) + 3.0 / 2.0);
    CHECK(ndcg3(reversed, truth, cfg) == doctest::Approx(expected_reversed).epsilon(1e-12));
    CHECK(expected_reversed == doctest::Approx(0.8892).epsilon(1e-4));

    double mean = 0.0;
    for (const auto& p : all_orders(3)) mean += ndcg3(p, truth, cfg);
    mean /= 6.0;
    CHECK(mean == doctest::Approx(0.9446).epsilon(1e-4));
}

TEST_CASE("scaled ndcg: 100 at best, 0 at worst, exact mean 50") {
    MetricConfig cfg;
    NdcgOracle oracle;
    PriorityOrder truth({1, 2, 0});
    CHECK(ndcg3_scaled(truth, truth, cfg) == doctest::Approx(100.0).epsilon(1e-12));
    PriorityOrder reversed({0, 2, 1});
    CHECK(ndcg3_scaled(reversed, truth, cfg) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(ndcg_min(cfg) == doctest::Approx(oracle.worst(truth)).epsilon(1e-12));

    double mean = 0.0;
    for (const auto& p : all_orders(3)) mean += ndcg3_scaled(p, truth, cfg);
    mean /= 6.0;
    CHECK(std::fabs(mean - 50.0) < 1e-9);
}

TEST_CASE("metrics are invariant under consistent issue relabeling") {
    MetricConfig cfg;
    auto relabel = [](const PriorityOrder& p, const std::vector<int>& perm) {
        std::vector<int> out;
        for (int v : p.order) out.push_back(perm[static_cast<std::size_t>(v)]);
        return PriorityOrder(out);
    };
    std::vector<int> perm{2, 0, 1};
    for (const auto& truth : all_orders(3)) {
        for (const auto& pred : all_orders(3)) {
            CHECK(ndcg3(pred, truth, cfg) ==
                  doctest::Approx(ndcg3(relabel(pred, perm), relabel(truth, perm), cfg)).epsilon(1e-12));
            CHECK(ema(pred, truth) == ema(relabel(pred, perm), relabel(truth, perm)));
            CHECK(top1(pred, truth) == top1(relabel(pred, perm), relabel(truth, perm)));
        }
    }
}

TEST_CASE("rankings are invariant under strictly monotone score transforms") {
    Rng rng(5);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> row{rng.uniform01(), rng.uniform01(), rng.uniform01()};
        auto mono = row;
        for (auto& v : mono) v = 2.0 * std::atan(3.0 * v) + 1.0;
        CHECK(predict_ranking(row) == predict_ranking(mono));
    }
}

TEST_CASE("k-penalty weights: linear, decreasing, normalized") {
    MetricConfig cfg;  // k_max 5
    CHECK(k_penalty({7.5, 7.5, 7.5, 7.5, 7.5}, cfg) == doctest::Approx(7.5).epsilon(1e-12));
    CHECK(k_penalty({1, 0, 0, 0, 0}, cfg) == doctest::Approx(5.0 / 15.0).epsilon(1e-12));
    CHECK(k_penalty({0, 0, 0, 0, 1}, cfg) == doctest::Approx(1.0 / 15.0).epsilon(1e-12));
    CHECK_THROWS_AS(k_penalty({1, 2, 3}, cfg), ValidationError);

    double prev = 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 5; ++k) {
        std::vector<double> basis(5, 0.0);
        basis[static_cast<std::size_t>(k - 1)] = 1.0;
        double w = k_penalty(basis, cfg);
        CHECK(w > 0.0);
        CHECK(w < prev);
        prev = w;
        sum += w;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("evaluate: ground-truth predictor scores 100 everywhere") {
    SynthConfig sc;
    sc.count = 30;
    sc.noise = 0.0;
    auto corpus = generate_synthetic(sc, 21);
    LabelPredictor truth;
    MetricConfig cfg;
    MetricReport r = evaluate(corpus, truth, cfg);
    CHECK(r.instances == 30);
    for (const auto& pk : r.per_k) {
        CHECK(pk.ema == doctest::Approx(100.0));
        CHECK(pk.top1 == doctest::Approx(100.0));
        CHECK(pk.ndcg_scaled == doctest::Approx(100.0));
        CHECK(pk.ndcg_raw == doctest::Approx(1.0));
    }
    CHECK(r.kp_ema == doctest::Approx(100.0));
}

TEST_CASE("evaluate: template reader is perfect at full view on a noise-free corpus") {
    SynthConfig sc;
    sc.count = 60;
    sc.noise = 0.0;
    auto corpus = generate_synthetic(sc, 22);
    TemplateOraclePredictor oracle;
    MetricConfig cfg;
    MetricReport r = evaluate(corpus, oracle, cfg);
    CHECK(r.at_k(5).ema == doctest::Approx(100.0));  // every dialogue ends on a full statement
}

TEST_CASE("evaluate: random predictor sits near the closed-form chance rates") {
    SynthConfig sc;
    sc.count = 400;
    auto corpus = generate_synthetic(sc, 23);
    RandomPredictor rnd(3, 99);
    MetricConfig cfg;
    MetricReport r = evaluate(corpus, rnd, cfg);
    // 400 instances x 5 ks = 2000 draws per metric
    CHECK(r.at_k(5).ema == doctest::Approx(100.0 / 6.0).epsilon(0.25));
    CHECK(r.at_k(5).top1 == doctest::Approx(100.0 / 3.0).epsilon(0.15));
    CHECK(r.at_k(5).ndcg_scaled == doctest::Approx(50.0).epsilon(0.15));
}

TEST_CASE("evaluate: pair-masked instances are excluded and counted") {
    SynthConfig sc;
    sc.count = 10;
    auto corpus = generate_synthetic(sc, 24);
    corpus[2].pair_mask = std::vector<std::pair<int, int>>{
        {corpus[2].label.at(0), corpus[2].label.at(2)}};
    LabelPredictor truth;
    MetricConfig cfg;
    MetricReport r = evaluate(corpus, truth, cfg);
    CHECK(r.instances == 9);
    CHECK(r.skipped_masked == 1);

    CHECK_THROWS_AS(evaluate({}, truth, cfg), ValidationError);
}

TEST_CASE("metric report json round-trip") {
    SynthConfig sc;
    sc.count = 12;
    auto corpus = generate_synthetic(sc, 25);
    RandomPredictor rnd(3, 4);
    MetricConfig cfg;
    MetricReport r = evaluate(corpus, rnd, cfg);
    MetricReport back = MetricReport::from_json(r.to_json());
    CHECK(back.to_json().dump() == r.to_json().dump());
}

TEST_CASE("fold aggregation: mean equals the hand average") {
    SynthConfig sc;
    sc.count = 40;
    auto corpus = generate_synthetic(sc, 26);
    MetricConfig cfg;
    RandomPredictor r1(3, 1), r2(3, 2);
    std::vector<MetricReport> folds{evaluate(corpus, r1, cfg), evaluate(corpus, r2, cfg)};
    CrossValReport cv = CrossValReport::aggregate(folds);
    CHECK(cv.mean.at_k(5).ema ==
          doctest::Approx((folds[0].at_k(5).ema + folds[1].at_k(5).ema) / 2.0).epsilon(1e-12));
    CHECK(cv.mean.kp_top1 == doctest::Approx((folds[0].kp_top1 + folds[1].kp_top1) / 2.0).epsilon(1e-12));
    CHECK(cv.stddev.at_k(5).ema >= 0.0);
}

TEST_CASE("argument accuracy: perfect, tied, and malformed inputs") {
    SynthConfig sc;
    sc.count = 8;
    auto corpus = generate_synthetic(sc, 27);
    std::vector<Instance> ca;
    for (auto inst : corpus) {
        inst.pair_mask = std::vector<std::pair<int, int>>{{inst.label.at(0), inst.label.at(2)}};
        inst.source = Source::CA;
        ca.push_back(inst);
    }

    auto perfect = [](const Instance& inst, int) {
        std::vector<double> row(3, 0.0);
        for (int pos = 0; pos < 3; ++pos) row[static_cast<std::size_t>(inst.label.at(pos))] = 1.0 - 0.2 * pos;
        return row;
    };
    CHECK(ca_argument_accuracy(ca, perfect) == doctest::Approx(100.0));

    auto tied = [](const Instance&, int) { return std::vector<double>{0.5, 0.5, 0.5}; };
    CHECK(ca_argument_accuracy(ca, tied) == doctest::Approx(0.0));  // ties count as incorrect

    std::vector<Instance> bad = ca;
    bad[0].pair_mask.reset();
    CHECK_THROWS_AS(ca_argument_accuracy(bad, perfect), ValidationError);
}

TEST_CASE("integrative potential split by order alignment") {
    auto make = [](std::vector<int> self_order, std::vector<int> opp_order) {
        Instance inst;
        inst.id = "x";
        inst.label = PriorityOrder(opp_order);
        inst.scenario = Scenario{PriorityOrder(self_order), PriorityOrder(opp_order)};
        inst.utterances = {{Author::Self, "hi", {}}, {Author::Opp, "hello", {}}};
        return inst;
    };
    IntegrativeSplit split = split_by_integrative_potential({
        make({0, 1, 2}, {0, 1, 2}),  // identical -> distance 0 -> low
        make({0, 1, 2}, {1, 0, 2}),  // adjacent swap -> distance 1 -> low
        make({0, 1, 2}, {2, 1, 0}),  // reversed -> distance 3 -> high
        make({0, 1, 2}, {1, 2, 0}),  // distance 2 -> high
    });
    CHECK(split.low.size() == 2);
    CHECK(split.high.size() == 2);
    CHECK(split.skipped == 0);

    Instance no_scenario = make({0, 1, 2}, {0, 1, 2});
    no_scenario.scenario.reset();
    split = split_by_integrative_potential({no_scenario});
    CHECK(split.skipped == 1);
}

TEST_CASE("random_rank is uniform over the 6 orders") {
    Rng rng(31);
    std::map<std::vector<int>, int> freq;
    const int draws = 60000;
    for (int i = 0; i < draws; ++i) ++freq[random_rank(rng, 3).order];
    CHECK(freq.size() == 6);
    for (const auto& [o, n] : freq)
        CHECK(std::fabs(static_cast<double>(n) / draws - 1.0 / 6.0) < 0.01);
}

TEST_CASE("metric config validation") {
    MetricConfig cfg;
    cfg.relevance = {5.0, 5.0, 3.0};
    CHECK_THROWS_AS(cfg.validate(3), ValidationError);
    cfg = MetricConfig{};
    CHECK_THROWS_AS(cfg.validate(4), ValidationError);  // wrong length for m=4
}
