#include "opm/ranker.hpp"

#include <fstream>

#include "json.hpp"
#include "opm/errors.hpp"

namespace opm {

void RankerConfig::validate() const {
    if (d < 2) throw ValidationError("ranker config: d must be >= 2");
    if (heads < 1 || d % heads != 0) throw ValidationError("ranker config: d must be divisible by heads");
    if (level1_layers < 1 || level2_layers < 1) throw ValidationError("ranker config: layer counts must be >= 1");
    if (m < 2) throw ValidationError("ranker config: m must be >= 2");
    if (max_tokens < 2) throw ValidationError("ranker config: max_tokens must be >= 2");
    if (dropout < 0.0 || dropout >= 1.0) throw ValidationError("ranker config: dropout must be in [0,1)");
}

FileEmbeddingProvider::FileEmbeddingProvider(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("embedding file not readable: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("embedding file " + path + " line " + std::to_string(lineno) + ": " + e.what());
        }
        std::string key = j.at("author").get<std::string>() + "\x1f" + j.at("text").get<std::string>();
        std::vector<double> vec = j.at("embedding").get<std::vector<double>>();
        if (dim_ == 0) dim_ = static_cast<int>(vec.size());
        if (static_cast<int>(vec.size()) != dim_)
            throw ValidationError("embedding file " + path + " line " + std::to_string(lineno) + ": dimension mismatch");
        table_[key] = std::move(vec);
    }
}

std::vector<double> FileEmbeddingProvider::encode(Author author, const std::string& text) {
    auto it = table_.find(to_string(author) + "\x1f" + text);
    if (it == table_.end()) throw ValidationError("no embedding recorded for utterance: '" + text + "'");
    return it->second;
}

RankerModel::RankerModel(RankerConfig cfg, Vocab vocab, Rng& init_rng) : cfg_(cfg), vocab_(std::move(vocab)) {
    cfg_.validate();
    int d = cfg_.d;
    tok_emb_ = nn::Param("tok_emb", vocab_.size(), d);
    pos_tok_ = nn::Param("pos_tok", cfg_.max_tokens, d);
    pos_utt_ = nn::Param("pos_utt", cfg_.max_utterances, d);
    nn::init_table(tok_emb_, init_rng);
    nn::init_table(pos_tok_, init_rng);
    nn::init_table(pos_utt_, init_rng);

    for (int l = 0; l < cfg_.level1_layers; ++l) {
        level1_.emplace_back("l1." + std::to_string(l), d, d * cfg_.ffn_mult);
        level1_.back().init(init_rng);
    }
    for (int l = 0; l < cfg_.level2_layers; ++l) {
        level2_.emplace_back("l2." + std::to_string(l), d, d * cfg_.ffn_mult);
        level2_.back().init(init_rng);
    }
    l1_final_g_ = nn::Param("l1.final_g", 1, d);
    l1_final_b_ = nn::Param("l1.final_b", 1, d);
    l2_final_g_ = nn::Param("l2.final_g", 1, d);
    l2_final_b_ = nn::Param("l2.final_b", 1, d);
    l1_final_g_.value.fill(1.0);
    l2_final_g_.value.fill(1.0);

    head_w1_ = nn::Param("head.w1", d, cfg_.head_hidden);
    head_b1_ = nn::Param("head.b1", 1, cfg_.head_hidden);
    head_w2_ = nn::Param("head.w2", cfg_.head_hidden, cfg_.m);
    head_b2_ = nn::Param("head.b2", 1, cfg_.m);
    nn::init_linear(head_w1_, head_b1_, init_rng);
    nn::init_linear(head_w2_, head_b2_, init_rng);
}

std::vector<nn::Param*> RankerModel::params() {
    std::vector<nn::Param*> out;
    out.push_back(&tok_emb_);
    out.push_back(&pos_tok_);
    out.push_back(&pos_utt_);
    for (auto& l : level1_) l.collect(out);
    if (cfg_.pre_norm) {
        out.push_back(&l1_final_g_);
        out.push_back(&l1_final_b_);
    }
    for (auto& l : level2_) l.collect(out);
    if (cfg_.pre_norm) {
        out.push_back(&l2_final_g_);
        out.push_back(&l2_final_b_);
    }
    out.push_back(&head_w1_);
    out.push_back(&head_b1_);
    out.push_back(&head_w2_);
    out.push_back(&head_b2_);
    return out;
}

std::vector<int> RankerModel::utterance_token_ids(const Utterance& u) const {
    std::vector<int> text_ids = vocab_.encode(u.text, cfg_.max_tokens - 1);
    if (text_ids.empty()) throw ValidationError("utterance produced no tokens: '" + u.text + "'");
    std::vector<int> ids;
    ids.reserve(text_ids.size() + 1);
    ids.push_back(u.author == Author::Self ? Vocab::kSelf : Vocab::kOpp);
    ids.insert(ids.end(), text_ids.begin(), text_ids.end());
    return ids;
}

nn::Tape::NodeId RankerModel::encode_utterance(nn::Tape& tape, const Utterance& u, bool train, Rng& rng) {
    std::vector<int> ids = utterance_token_ids(u);
    int len = static_cast<int>(ids.size());
    auto x = tape.embedding(tape.param(tok_emb_), ids);
    x = tape.add(x, tape.slice_rows(tape.param(pos_tok_), 0, len));
    x = tape.dropout(x, cfg_.dropout, rng, train);
    nn::AttentionMask mask = nn::AttentionMask::full(len);
    nn::TransformerLayerConfig lcfg{cfg_.heads, cfg_.pre_norm, cfg_.dropout};
    for (auto& layer : level1_) x = nn::transformer_layer_forward(tape, x, mask, layer, lcfg, rng, train);
    if (cfg_.pre_norm) x = tape.layer_norm(x, tape.param(l1_final_g_), tape.param(l1_final_b_));
    return tape.mean_rows(x);
}

nn::Tape::NodeId RankerModel::encode_dialogue(nn::Tape& tape, const std::vector<nn::Tape::NodeId>& utt_vecs,
                                              bool train, Rng& rng, nn::AttentionCapture* probe) {
    if (utt_vecs.empty()) throw ValidationError("encode_dialogue: empty dialogue");
    int n = static_cast<int>(utt_vecs.size());
    if (n > cfg_.max_utterances)
        throw ValidationError("encode_dialogue: " + std::to_string(n) + " utterances exceeds max_utterances " +
                              std::to_string(cfg_.max_utterances) + " (raise it in the config)");
    auto u = tape.stack_rows(utt_vecs);
    u = tape.add(u, tape.slice_rows(tape.param(pos_utt_), 0, n));
    u = tape.dropout(u, cfg_.dropout, rng, train);
    nn::AttentionMask mask = nn::AttentionMask::causal(n);
    nn::TransformerLayerConfig lcfg{cfg_.heads, cfg_.pre_norm, cfg_.dropout};
    for (auto& layer : level2_) u = nn::transformer_layer_forward(tape, u, mask, layer, lcfg, rng, train, probe);
    if (cfg_.pre_norm) u = tape.layer_norm(u, tape.param(l2_final_g_), tape.param(l2_final_b_));
    return u;
}

nn::Tape::NodeId RankerModel::score_issues(nn::Tape& tape, nn::Tape::NodeId dialogue_enc) {
    auto h = tape.gelu(tape.add_rowvec(tape.matmul(dialogue_enc, tape.param(head_w1_)), tape.param(head_b1_)));
    auto logits = tape.add_rowvec(tape.matmul(h, tape.param(head_w2_)), tape.param(head_b2_));
    return tape.sigmoid(logits);
}

nn::Tape::NodeId RankerModel::build_scores(nn::Tape& tape, std::span<const Utterance> utterances, bool train,
                                           Rng& rng, nn::AttentionCapture* probe) {
    if (utterances.empty()) throw ValidationError("build_scores: empty dialogue");
    std::vector<nn::Tape::NodeId> vecs;
    vecs.reserve(utterances.size());
    for (const auto& u : utterances) vecs.push_back(encode_utterance(tape, u, train, rng));
    auto enc = encode_dialogue(tape, vecs, train, rng, probe);
    return score_issues(tape, enc);
}

nn::Tensor RankerModel::score_matrix(std::span<const Utterance> utterances, nn::AttentionCapture* probe) {
    nn::Tape tape;
    Rng rng(0);  // unused: dropout is off in eval mode
    auto scores = build_scores(tape, utterances, /*train=*/false, rng, probe);
    return tape.val(scores);
}

nn::Tensor RankerModel::score_matrix_from_embeddings(const std::vector<std::vector<double>>& utterance_vectors) {
    nn::Tape tape;
    Rng rng(0);
    std::vector<nn::Tape::NodeId> vecs;
    vecs.reserve(utterance_vectors.size());
    for (const auto& v : utterance_vectors) {
        if (static_cast<int>(v.size()) != cfg_.d)
            throw ValidationError("provided embedding has dimension " + std::to_string(v.size()) +
                                  ", model expects " + std::to_string(cfg_.d));
        nn::Tensor t(1, cfg_.d);
        t.v = v;
        vecs.push_back(tape.input(std::move(t)));
    }
    auto enc = encode_dialogue(tape, vecs, /*train=*/false, rng, nullptr);
    return tape.val(score_issues(tape, enc));
}

std::vector<double> RankerModel::score_row_at_k(const Instance& inst, int k) {
    PartialDialogue pv = partial_view(inst, k);
    nn::Tensor scores = score_matrix(pv.utterances);
    int row = pv.last_position();
    std::vector<double> out(static_cast<std::size_t>(cfg_.m));
    for (int q = 0; q < cfg_.m; ++q) out[static_cast<std::size_t>(q)] = scores.at(row, q);
    return out;
}

PriorityOrder RankerModel::predict_at_k(const Instance& inst, int k) {
    return predict_ranking(score_row_at_k(inst, k));
}

PriorityOrder predict_ranking(const std::vector<double>& score_row) {
    return order_from_scores(score_row);
}

}  // namespace opm
