#include "opm/loss.hpp"

#include <algorithm>

#include "opm/errors.hpp"

namespace opm {

void LossConfig::validate() const {
    if (margin < 0.0) throw ValidationError("loss config: margin must be >= 0");
    if (loss_dropout < 0.0 || loss_dropout >= 1.0) throw ValidationError("loss config: loss_dropout must be in [0,1)");
    if (k_max < 1) throw ValidationError("loss config: k_max must be >= 1");
}

std::vector<PairTruth> pair_truths(const Instance& inst, int m) {
    std::vector<PairTruth> out;
    if (inst.pair_mask) {
        for (const auto& [hi, lo] : *inst.pair_mask) out.push_back({hi, lo, +1});
        return out;
    }
    for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b)
            out.push_back({a, b, inst.label.rank_of(a) < inst.label.rank_of(b) ? +1 : -1});
    return out;
}

double pair_loss(double o1, double o2, int y, double margin) {
    double v = -static_cast<double>(y) * (o1 - o2) + margin;
    return v > 0.0 ? v : 0.0;
}

double loss_at_k(const std::vector<double>& score_row, const std::vector<PairTruth>& truths, double margin) {
    if (truths.empty()) throw ValidationError("loss_at_k: empty pair set");
    double total = 0.0;
    for (const auto& t : truths)
        total += pair_loss(score_row[static_cast<std::size_t>(t.first)],
                           score_row[static_cast<std::size_t>(t.second)], t.y, margin);
    return total;
}

std::vector<int> supervised_ks(const Instance& inst, const LossConfig& cfg, Rng& rng) {
    int n_opp = inst.opponent_utterance_count();
    if (n_opp == 0) throw ValidationError("instance " + inst.id + ": no opponent utterance to supervise");

    if (inst.source == Source::CA) {
        // template dialogues carry one meaningful readout point
        if (n_opp < 2) throw ValidationError("CA instance " + inst.id + ": needs 2 opponent utterances");
        return {2};
    }

    int k_hi = std::min(n_opp, cfg.k_max);
    std::vector<int> kept;
    while (kept.empty()) {
        for (int k = 1; k <= k_hi; ++k)
            if (!rng.bernoulli(cfg.loss_dropout)) kept.push_back(k);
    }
    return kept;
}

nn::Tape::NodeId build_total_loss(nn::Tape& tape, nn::Tape::NodeId scores, const Instance& inst,
                                  const LossConfig& cfg, Rng& rng) {
    cfg.validate();
    int m = tape.val(scores).cols;
    std::vector<PairTruth> truths = pair_truths(inst, m);
    if (truths.empty()) throw ValidationError("instance " + inst.id + ": no supervision pairs");

    std::vector<int> ks = supervised_ks(inst, cfg, rng);
    auto margin_node = tape.constant(cfg.margin);

    std::vector<nn::Tape::NodeId> per_k;
    per_k.reserve(ks.size());
    for (int k : ks) {
        int row = inst.opponent_position(k);
        if (row < 0) throw ValidationError("instance " + inst.id + ": missing opponent utterance " + std::to_string(k));
        std::vector<nn::Tape::NodeId> hinges;
        hinges.reserve(truths.size());
        for (const auto& t : truths) {
            auto o1 = tape.select(scores, row, t.first);
            auto o2 = tape.select(scores, row, t.second);
            auto diff = tape.scale(tape.sub(o1, o2), -static_cast<double>(t.y));
            hinges.push_back(tape.relu(tape.add(diff, margin_node)));
        }
        per_k.push_back(hinges.size() == 1 ? hinges[0] : tape.sum_all(tape.stack_rows(hinges)));
    }
    return per_k.size() == 1 ? per_k[0] : tape.mean_rows(tape.stack_rows(per_k));
}

double total_loss(const nn::Tensor& scores, const Instance& inst, const LossConfig& cfg, Rng& rng) {
    nn::Tape tape;
    auto node = tape.input(scores);
    return tape.val(build_total_loss(tape, node, inst, cfg, rng)).scalar();
}

}  // namespace opm
