#pragma once

#include <vector>

#include "opm/dialogue.hpp"
#include "opm/rng.hpp"
#include "opm/tape.hpp"

namespace opm {

// Known relative order between two issues: y = +1 when `first` outranks
// `second` in the ground truth, -1 otherwise.
struct PairTruth {
    int first = 0;
    int second = 0;
    int y = +1;
};

struct LossConfig {
    double margin = 0.3;
    double loss_dropout = 0.15;
    int k_max = 5;

    void validate() const;
};

// all pairs for a fully labeled instance, or only the masked-in pairs
std::vector<PairTruth> pair_truths(const Instance& inst, int m);

// hinge on one score pair: max(0, -y*(o1-o2) + c)
double pair_loss(double o1, double o2, int y, double margin);

// sum of pair_loss over the given pairs for one score row
double loss_at_k(const std::vector<double>& score_row, const std::vector<PairTruth>& truths, double margin);

// Indices (1-based k) kept after loss dropout: each k is dropped
// independently with probability cfg.loss_dropout, resampling if everything
// drops. k runs over 1..min(#opponent utterances, k_max); CA instances are
// always exactly {2}.
std::vector<int> supervised_ks(const Instance& inst, const LossConfig& cfg, Rng& rng);

// Margin ranking loss node over an N x m score-matrix node: mean over the
// supervised ks of the per-k pair losses, read out at each k-th opponent
// utterance row. Masked pairs never touch the graph, so their scores get
// exactly zero gradient.
nn::Tape::NodeId build_total_loss(nn::Tape& tape, nn::Tape::NodeId scores, const Instance& inst,
                                  const LossConfig& cfg, Rng& rng);

// value-only convenience over a concrete score matrix
double total_loss(const nn::Tensor& scores, const Instance& inst, const LossConfig& cfg, Rng& rng);

}  // namespace opm
