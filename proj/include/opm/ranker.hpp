#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "opm/dialogue.hpp"
#include "opm/transformer.hpp"
#include "opm/vocab.hpp"

namespace opm {

struct RankerConfig {
    int d = 128;
    int level1_layers = 2;
    int level2_layers = 1;
    int heads = 4;
    int ffn_mult = 4;
    int head_hidden = 128;
    int max_tokens = 64;       // per utterance, author token included
    int max_utterances = 64;
    double dropout = 0.1;
    bool pre_norm = true;
    int m = 3;
    int vocab_min_freq = 2;

    void validate() const;
};

// Anything that can map one utterance to a d-vector can stand in for the
// built-in utterance encoder (e.g. embeddings exported by a pretrained
// model and replayed from a file).
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual int dim() const = 0;
    virtual std::vector<double> encode(Author author, const std::string& text) = 0;
};

// Replays embeddings from a JSON-lines file of
// {"author":"self"|"opp","text":...,"embedding":[...]} records.
class FileEmbeddingProvider : public EmbeddingProvider {
public:
    explicit FileEmbeddingProvider(const std::string& path);
    int dim() const override { return dim_; }
    std::vector<double> encode(Author author, const std::string& text) override;

private:
    int dim_ = 0;
    std::unordered_map<std::string, std::vector<double>> table_;
};

// Hierarchical ranker: per-utterance encoder with an author token and full
// self-attention, a causally masked dialogue encoder over the pooled
// utterance vectors, and a two-layer scoring head with a sigmoid that emits
// one score per issue per utterance position.
class RankerModel {
public:
    RankerModel() = default;
    RankerModel(RankerConfig cfg, Vocab vocab, Rng& init_rng);

    const RankerConfig& config() const { return cfg_; }
    const Vocab& vocab() const { return vocab_; }
    std::vector<nn::Param*> params();

    // token ids with the author token prepended and truncation applied
    std::vector<int> utterance_token_ids(const Utterance& u) const;

    // pooled d-vector for one utterance (1 x d node)
    nn::Tape::NodeId encode_utterance(nn::Tape& tape, const Utterance& u, bool train, Rng& rng);

    // causally masked dialogue encoding of stacked utterance vectors (N x d)
    nn::Tape::NodeId encode_dialogue(nn::Tape& tape, const std::vector<nn::Tape::NodeId>& utt_vecs, bool train,
                                     Rng& rng, nn::AttentionCapture* probe = nullptr);

    // scoring head: N x m, entries in (0,1)
    nn::Tape::NodeId score_issues(nn::Tape& tape, nn::Tape::NodeId dialogue_enc);

    // full forward; returns the N x m score node on the caller's tape
    nn::Tape::NodeId build_scores(nn::Tape& tape, std::span<const Utterance> utterances, bool train, Rng& rng,
                                  nn::AttentionCapture* probe = nullptr);

    // eval-mode score matrix (no dropout, deterministic)
    nn::Tensor score_matrix(std::span<const Utterance> utterances, nn::AttentionCapture* probe = nullptr);

    // dialogue-level forward over externally provided utterance vectors
    nn::Tensor score_matrix_from_embeddings(const std::vector<std::vector<double>>& utterance_vectors);

    // scores at the position of the k-th opponent utterance (clamped)
    std::vector<double> score_row_at_k(const Instance& inst, int k);
    PriorityOrder predict_at_k(const Instance& inst, int k);

private:
    RankerConfig cfg_;
    Vocab vocab_;

    nn::Param tok_emb_;   // |V| x d
    nn::Param pos_tok_;   // max_tokens x d
    nn::Param pos_utt_;   // max_utterances x d
    std::vector<nn::TransformerLayerParams> level1_;
    std::vector<nn::TransformerLayerParams> level2_;
    nn::Param l1_final_g_, l1_final_b_;
    nn::Param l2_final_g_, l2_final_b_;
    nn::Param head_w1_, head_b1_, head_w2_, head_b2_;
};

// Issues sorted by a score row, ties to the lower canonical index.
PriorityOrder predict_ranking(const std::vector<double>& score_row);

}  // namespace opm
