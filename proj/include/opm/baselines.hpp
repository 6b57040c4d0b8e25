#pragma once

#include <string>
#include <unordered_set>
#include <vector>

#include "opm/dialogue.hpp"
#include "opm/loss.hpp"
#include "opm/metrics.hpp"
#include "opm/tape.hpp"

namespace opm {

// fixed English stopword list (~180 words) vendored into the binary
const std::unordered_set<std::string>& stopwords();

// uniform draw over all m! orders
PriorityOrder random_rank(Rng& rng, int m = 3);

// The most frequent non-stopword words of the training split, capped at
// `max_words`; frequency ties break lexicographically.
class BowVocab {
public:
    static BowVocab build(const std::vector<Instance>& training, int max_words = 500);
    static BowVocab from_words(std::vector<std::string> words);

    int size() const { return static_cast<int>(words_.size()); }
    const std::vector<std::string>& words() const { return words_; }
    int index_of(const std::string& word) const;  // -1 when absent

private:
    std::vector<std::string> words_;
    std::unordered_map<std::string, int> index_;
};

// L1-normalized vocab-word counts over every utterance of the prefix;
// all-zero counts stay zero
std::vector<double> bow_features(const std::vector<Utterance>& utterances, const BowVocab& vocab);

struct BowConfig {
    int hidden1 = 256;
    int hidden2 = 64;
    int m = 3;
};

// feed-forward scorer over bag-of-words features, sigmoid outputs in (0,1)
class BowModel {
public:
    BowModel() = default;
    BowModel(BowConfig cfg, BowVocab vocab, Rng& init_rng);

    const BowConfig& config() const { return cfg_; }
    const BowVocab& bow_vocab() const { return vocab_; }
    std::vector<nn::Param*> params();

    nn::Tape::NodeId build_scores(nn::Tape& tape, const std::vector<double>& features);
    std::vector<double> forward(const std::vector<double>& features);

    std::vector<double> score_row_at_k(const Instance& inst, int k);
    PriorityOrder predict_at_k(const Instance& inst, int k);

private:
    BowConfig cfg_;
    BowVocab vocab_;
    nn::Param w1_, b1_, w2_, b2_, w3_, b3_;
};

class BowPredictor : public RankPredictor {
public:
    explicit BowPredictor(BowModel& model) : model_(model) {}
    PriorityOrder predict_at_k(const Instance& inst, int k) override { return model_.predict_at_k(inst, k); }
    std::string name() const override { return "bow"; }

private:
    BowModel& model_;
};

}  // namespace opm
