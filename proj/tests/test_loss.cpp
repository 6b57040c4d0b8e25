#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "opm/errors.hpp"
#include "opm/loss.hpp"

using namespace opm;

namespace {

Instance cd_instance(int n_opp) {
    Instance inst;
    inst.id = "cd";
    inst.source = Source::CD;
    inst.label = PriorityOrder({0, 1, 2});
    for (int k = 0; k < n_opp; ++k) {
        inst.utterances.push_back({Author::Self, "s", {}});
        inst.utterances.push_back({Author::Opp, "o", {}});
    }
    return inst;
}

Instance ca_instance() {
    Instance inst;
    inst.id = "ca";
    inst.source = Source::CA;
    inst.label = PriorityOrder({0, 2, 1});  // food > firewood known, water placed last
    inst.pair_mask = std::vector<std::pair<int, int>>{{0, 2}};
    inst.utterances = {{Author::Self, "hello!", {}},
                       {Author::Opp, "arg one", {}},
                       {Author::Self, "i see. what else?", {}},
                       {Author::Opp, "arg two", {}}};
    return inst;
}

nn::Tensor scores_fill(int rows, std::vector<double> row) {
    nn::Tensor t(rows, static_cast<int>(row.size()));
    for (int r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < row.size(); ++c) t.at(r, static_cast<int>(c)) = row[c];
    return t;
}

}  // namespace

TEST_CASE("pair loss fixtures") {
    CHECK(pair_loss(1.0, 0.0, +1, 0.3) == 0.0);
    CHECK(pair_loss(0.5, 0.5, +1, 0.3) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(pair_loss(0.2, 0.6, +1, 0.3) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(pair_loss(0.2, 0.6, -1, 0.3) == 0.0);  // reversed truth, now separated
}

TEST_CASE("hinge antisymmetry: flipping y flips which side pays") {
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        double o1 = rng.uniform01(), o2 = rng.uniform01(), c = 0.3;
        if (std::fabs(o1 - o2) <= c) continue;
        bool zero_pos = pair_loss(o1, o2, +1, c) == 0.0;
        bool zero_neg = pair_loss(o1, o2, -1, c) == 0.0;
        CHECK(zero_pos != zero_neg);
        if (zero_pos) CHECK(pair_loss(o1, o2, -1, c) >= c);
    }
}

TEST_CASE("monotonicity: raising the correctly ranked score never hurts") {
    Rng rng(4);
    for (int i = 0; i < 500; ++i) {
        double o1 = rng.uniform01(), o2 = rng.uniform01(), c = rng.uniform(0.0, 0.5);
        double up = o1 + rng.uniform(0.0, 1.0 - o1);
        CHECK(pair_loss(up, o2, +1, c) <= pair_loss(o1, o2, +1, c) + 1e-15);
    }
}

TEST_CASE("loss_at_k sums only the supplied pairs") {
    std::vector<PairTruth> all = {{0, 1, +1}, {0, 2, +1}, {1, 2, +1}};
    CHECK(loss_at_k({0.9, 0.5, 0.1}, all, 0.3) == 0.0);

    // one known pair: food > firewood with scores (0.4, 0.9, 0.5)
    std::vector<PairTruth> masked = {{0, 2, +1}};
    CHECK(loss_at_k({0.4, 0.9, 0.5}, masked, 0.3) == doctest::Approx(0.4).epsilon(1e-15));
    // water's score is irrelevant
    CHECK(loss_at_k({0.4, 0.0, 0.5}, masked, 0.3) == doctest::Approx(0.4).epsilon(1e-15));

    CHECK_THROWS_AS(loss_at_k({0.4, 0.9, 0.5}, {}, 0.3), ValidationError);
}

TEST_CASE("total loss: single k and mean over k without dropout") {
    LossConfig cfg;
    cfg.loss_dropout = 0.0;

    Instance one = cd_instance(1);
    Rng rng(0);
    nn::Tensor s = scores_fill(2, {0.5, 0.5, 0.5});  // every pair pays the margin
    double expected_k = 3 * 0.3;
    CHECK(total_loss(s, one, cfg, rng) == doctest::Approx(expected_k).epsilon(1e-12));

    Instance three = cd_instance(3);
    nn::Tensor s3 = scores_fill(6, {0.5, 0.5, 0.5});
    CHECK(total_loss(s3, three, cfg, rng) == doctest::Approx(expected_k).epsilon(1e-12));  // mean of equal terms

    // hand-built rows with different per-k losses average cleanly
    nn::Tensor mixed(6, 3);
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 3; ++c) mixed.at(r, c) = 0.5;
    // k=1 reads row 1, k=2 row 3, k=3 row 5
    mixed.at(1, 0) = 0.9;
    mixed.at(1, 2) = 0.1;  // k=1: pairs (0,1): 0 ; (0,2): 0 ; (1,2): max(0,-(0.5-0.1)+0.3)=0 -> 0
    double l1 = 0.0;
    double l2 = 3 * 0.3;
    double l3 = 3 * 0.3;
    CHECK(total_loss(mixed, three, cfg, rng) == doctest::Approx((l1 + l2 + l3) / 3.0).epsilon(1e-12));
}

TEST_CASE("total loss is zero iff every supervised pair is separated by the margin") {
    LossConfig cfg;
    cfg.loss_dropout = 0.0;
    Instance inst = cd_instance(2);
    Rng rng(0);
    CHECK(total_loss(scores_fill(4, {0.9, 0.55, 0.2}), inst, cfg, rng) == 0.0);
    CHECK(total_loss(scores_fill(4, {0.9, 0.65, 0.2}), inst, cfg, rng) > 0.0);  // gap 0.25 < 0.3
}

TEST_CASE("CA instances are supervised only at k=2") {
    LossConfig cfg;
    cfg.loss_dropout = 0.0;
    Instance ca = ca_instance();
    Rng rng(0);

    nn::Tensor s = scores_fill(4, {0.4, 0.9, 0.5});
    double base = total_loss(s, ca, cfg, rng);
    CHECK(base == doctest::Approx(0.4).epsilon(1e-12));  // only the masked pair at row 3

    // perturbing any row except the k=2 readout row leaves the loss unchanged
    for (int row : {0, 1, 2}) {
        nn::Tensor p = s;
        for (int c = 0; c < 3; ++c) p.at(row, c) = 0.99;
        CHECK(total_loss(p, ca, cfg, rng) == base);
    }
    // perturbing the masked issue's score at the readout row changes nothing
    nn::Tensor pm = s;
    pm.at(3, 1) = 0.01;
    CHECK(total_loss(pm, ca, cfg, rng) == base);
}

TEST_CASE("masked scores have exactly zero finite-difference gradient") {
    LossConfig cfg;
    cfg.loss_dropout = 0.0;
    Instance ca = ca_instance();
    Rng rng(0);
    nn::Tensor s = scores_fill(4, {0.4, 0.9, 0.5});
    for (double eps : {1e-3, 1e-6}) {
        nn::Tensor up = s, down = s;
        up.at(3, 1) += eps;
        down.at(3, 1) -= eps;
        double fd = (total_loss(up, ca, cfg, rng) - total_loss(down, ca, cfg, rng)) / (2 * eps);
        CHECK(fd == 0.0);
    }
}

TEST_CASE("tape gradient of the masked issue column is exactly zero") {
    LossConfig cfg;
    cfg.loss_dropout = 0.0;
    Instance ca = ca_instance();
    Rng rng(0);

    nn::Param scores("scores", 4, 3);
    for (int r = 0; r < 4; ++r) {
        scores.value.at(r, 0) = 0.4;
        scores.value.at(r, 1) = 0.9;
        scores.value.at(r, 2) = 0.5;
    }
    nn::Tape tape;
    auto node = tape.param(scores);
    auto loss = build_total_loss(tape, node, ca, cfg, rng);
    scores.zero_grad();
    tape.backward(loss);
    for (int r = 0; r < 4; ++r) CHECK(scores.grad.at(r, 1) == 0.0);  // water column untouched
    CHECK(scores.grad.at(3, 0) != 0.0);
    CHECK(scores.grad.at(3, 2) != 0.0);
}

TEST_CASE("supervised k selection: dropout keeps the expected count") {
    LossConfig cfg;  // loss_dropout 0.15, k_max 5
    Instance inst = cd_instance(5);
    Rng rng(12345);
    long total = 0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) total += static_cast<long>(supervised_ks(inst, cfg, rng).size());
    double mean = static_cast<double>(total) / trials;
    double expected = 5.0 * (1.0 - cfg.loss_dropout);
    CHECK(mean > expected * 0.98);
    CHECK(mean < expected * 1.02);
}

TEST_CASE("supervised k selection: never empty, honors k_max and CA rule") {
    LossConfig cfg;
    cfg.loss_dropout = 0.9;
    Instance inst = cd_instance(3);
    Rng rng(7);
    for (int t = 0; t < 500; ++t) {
        auto ks = supervised_ks(inst, cfg, rng);
        CHECK(!ks.empty());
        for (int k : ks) CHECK(k <= 3);
    }
    Instance ca = ca_instance();
    CHECK(supervised_ks(ca, cfg, rng) == std::vector<int>{2});

    Instance no_opp;
    no_opp.id = "x";
    no_opp.label = PriorityOrder({0, 1, 2});
    no_opp.utterances = {{Author::Self, "hi", {}}};
    CHECK_THROWS_AS(supervised_ks(no_opp, cfg, rng), ValidationError);
}

TEST_CASE("loss config validation") {
    LossConfig bad;
    bad.margin = -0.1;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = LossConfig{};
    bad.loss_dropout = 1.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}
