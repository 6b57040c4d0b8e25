#include "opm/baselines.hpp"

#include <algorithm>
#include <map>

#include "opm/errors.hpp"
#include "opm/transformer.hpp"
#include "opm/vocab.hpp"

namespace opm {

PriorityOrder random_rank(Rng& rng, int m) {
    std::vector<int> order(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) order[static_cast<std::size_t>(i)] = i;
    rng.shuffle(order);
    return PriorityOrder(std::move(order));
}

BowVocab BowVocab::build(const std::vector<Instance>& training, int max_words) {
    std::map<std::string, long> counts;
    for (const auto& inst : training)
        for (const auto& u : inst.utterances)
            for (const auto& w : tokenize(u.text))
                if (!stopwords().count(w)) ++counts[w];

    std::vector<std::pair<std::string, long>> items(counts.begin(), counts.end());
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    if (static_cast<int>(items.size()) > max_words) items.resize(static_cast<std::size_t>(max_words));

    std::vector<std::string> words;
    words.reserve(items.size());
    for (const auto& [w, c] : items) words.push_back(w);
    return from_words(std::move(words));
}

BowVocab BowVocab::from_words(std::vector<std::string> words) {
    BowVocab v;
    v.words_ = std::move(words);
    for (std::size_t i = 0; i < v.words_.size(); ++i) v.index_[v.words_[i]] = static_cast<int>(i);
    return v;
}

int BowVocab::index_of(const std::string& word) const {
    auto it = index_.find(word);
    return it == index_.end() ? -1 : it->second;
}

std::vector<double> bow_features(const std::vector<Utterance>& utterances, const BowVocab& vocab) {
    std::vector<double> feats(static_cast<std::size_t>(vocab.size()), 0.0);
    double total = 0.0;
    for (const auto& u : utterances) {
        for (const auto& w : tokenize(u.text)) {
            int idx = vocab.index_of(w);
            if (idx >= 0) {
                feats[static_cast<std::size_t>(idx)] += 1.0;
                total += 1.0;
            }
        }
    }
    if (total > 0.0)
        for (auto& f : feats) f /= total;
    return feats;
}

BowModel::BowModel(BowConfig cfg, BowVocab vocab, Rng& init_rng) : cfg_(cfg), vocab_(std::move(vocab)) {
    if (vocab_.size() < 1) throw ValidationError("bow model: empty vocabulary");
    w1_ = nn::Param("bow.w1", vocab_.size(), cfg_.hidden1);
    b1_ = nn::Param("bow.b1", 1, cfg_.hidden1);
    w2_ = nn::Param("bow.w2", cfg_.hidden1, cfg_.hidden2);
    b2_ = nn::Param("bow.b2", 1, cfg_.hidden2);
    w3_ = nn::Param("bow.w3", cfg_.hidden2, cfg_.m);
    b3_ = nn::Param("bow.b3", 1, cfg_.m);
    nn::init_linear(w1_, b1_, init_rng);
    nn::init_linear(w2_, b2_, init_rng);
    nn::init_linear(w3_, b3_, init_rng);
}

std::vector<nn::Param*> BowModel::params() { return {&w1_, &b1_, &w2_, &b2_, &w3_, &b3_}; }

nn::Tape::NodeId BowModel::build_scores(nn::Tape& tape, const std::vector<double>& features) {
    if (static_cast<int>(features.size()) != vocab_.size())
        throw ValidationError("bow model: feature length " + std::to_string(features.size()) +
                              " != vocabulary size " + std::to_string(vocab_.size()));
    nn::Tensor x(1, vocab_.size());
    x.v = features;
    auto h1 = tape.gelu(tape.add_rowvec(tape.matmul(tape.input(std::move(x)), tape.param(w1_)), tape.param(b1_)));
    auto h2 = tape.gelu(tape.add_rowvec(tape.matmul(h1, tape.param(w2_)), tape.param(b2_)));
    return tape.sigmoid(tape.add_rowvec(tape.matmul(h2, tape.param(w3_)), tape.param(b3_)));
}

std::vector<double> BowModel::forward(const std::vector<double>& features) {
    nn::Tape tape;
    const nn::Tensor& out = tape.val(build_scores(tape, features));
    return out.v;
}

std::vector<double> BowModel::score_row_at_k(const Instance& inst, int k) {
    PartialDialogue pv = partial_view(inst, k);
    return forward(bow_features(pv.utterances, vocab_));
}

PriorityOrder BowModel::predict_at_k(const Instance& inst, int k) {
    return predict_ranking(score_row_at_k(inst, k));
}

}  // namespace opm
