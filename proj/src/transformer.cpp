#include "opm/transformer.hpp"

#include <cmath>

#include "opm/errors.hpp"

namespace opm::nn {

TransformerLayerParams::TransformerLayerParams(const std::string& prefix, int d, int ffn_hidden)
    : wq(prefix + ".wq", d, d),
      bq(prefix + ".bq", 1, d),
      wk(prefix + ".wk", d, d),
      wv(prefix + ".wv", d, d),
      bv(prefix + ".bv", 1, d),
      wo(prefix + ".wo", d, d),
      bo(prefix + ".bo", 1, d),
      ln1_g(prefix + ".ln1_g", 1, d),
      ln1_b(prefix + ".ln1_b", 1, d),
      w1(prefix + ".w1", d, ffn_hidden),
      b1(prefix + ".b1", 1, ffn_hidden),
      w2(prefix + ".w2", ffn_hidden, d),
      b2(prefix + ".b2", 1, d),
      ln2_g(prefix + ".ln2_g", 1, d),
      ln2_b(prefix + ".ln2_b", 1, d) {}

void TransformerLayerParams::collect(std::vector<Param*>& out) {
    for (Param* p : {&wq, &bq, &wk, &wv, &bv, &wo, &bo, &ln1_g, &ln1_b, &w1, &b1, &w2, &b2, &ln2_g, &ln2_b})
        out.push_back(p);
}

void init_weight(Param& w, Rng& rng) {
    double bound = 1.0 / std::sqrt(static_cast<double>(w.value.rows));
    for (auto& x : w.value.v) x = rng.uniform(-bound, bound);
}

void init_linear(Param& w, Param& b, Rng& rng) {
    init_weight(w, rng);
    b.value.fill(0.0);
}

void init_table(Param& table, Rng& rng) {
    double bound = 1.0 / std::sqrt(static_cast<double>(table.value.cols));
    for (auto& x : table.value.v) x = rng.uniform(-bound, bound);
}

void TransformerLayerParams::init(Rng& rng) {
    init_linear(wq, bq, rng);
    init_weight(wk, rng);
    init_linear(wv, bv, rng);
    init_linear(wo, bo, rng);
    init_linear(w1, b1, rng);
    init_linear(w2, b2, rng);
    ln1_g.value.fill(1.0);
    ln1_b.value.fill(0.0);
    ln2_g.value.fill(1.0);
    ln2_b.value.fill(0.0);
}

namespace {

Tape::NodeId attention(Tape& tape,
                       Tape::NodeId x,
                       const AttentionMask& mask,
                       TransformerLayerParams& p,
                       int heads,
                       AttentionCapture* probe) {
    int d = tape.val(x).cols;
    if (heads < 1 || d % heads != 0)
        throw ValidationError("attention: model width " + std::to_string(d) + " not divisible by " +
                              std::to_string(heads) + " heads");
    int dh = d / heads;
    double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    auto q = tape.add_rowvec(tape.matmul(x, tape.param(p.wq)), tape.param(p.bq));
    // no key bias: a per-row constant shift of the scores cannot move the softmax
    auto k = tape.matmul(x, tape.param(p.wk));
    auto v = tape.add_rowvec(tape.matmul(x, tape.param(p.wv)), tape.param(p.bv));

    Tensor mean_attn;
    std::vector<Tape::NodeId> head_out;
    head_out.reserve(static_cast<std::size_t>(heads));
    for (int h = 0; h < heads; ++h) {
        auto qh = tape.slice_cols(q, h * dh, dh);
        auto kh = tape.slice_cols(k, h * dh, dh);
        auto vh = tape.slice_cols(v, h * dh, dh);
        auto scores = tape.scale(tape.matmul_nt(qh, kh), scale);
        auto probs = tape.masked_softmax_rows(scores, mask);
        if (probe) {
            const Tensor& pt = tape.val(probs);
            if (h == 0) mean_attn = Tensor(pt.rows, pt.cols);
            for (std::size_t i = 0; i < pt.v.size(); ++i) mean_attn.v[i] += pt.v[i] / heads;
        }
        head_out.push_back(tape.matmul(probs, vh));
    }
    if (probe) probe->layer_attention.push_back(std::move(mean_attn));

    auto concat = tape.concat_cols(head_out);
    return tape.add_rowvec(tape.matmul(concat, tape.param(p.wo)), tape.param(p.bo));
}

Tape::NodeId ffn(Tape& tape, Tape::NodeId x, TransformerLayerParams& p) {
    auto h = tape.gelu(tape.add_rowvec(tape.matmul(x, tape.param(p.w1)), tape.param(p.b1)));
    return tape.add_rowvec(tape.matmul(h, tape.param(p.w2)), tape.param(p.b2));
}

}  // namespace

Tape::NodeId transformer_layer_forward(Tape& tape,
                                       Tape::NodeId x,
                                       const AttentionMask& mask,
                                       TransformerLayerParams& p,
                                       const TransformerLayerConfig& cfg,
                                       Rng& rng,
                                       bool train,
                                       AttentionCapture* probe) {
    if (tape.val(x).rows != mask.queries)
        throw ValidationError("transformer_layer_forward: input rows " + std::to_string(tape.val(x).rows) +
                              " != mask queries " + std::to_string(mask.queries));
    if (cfg.pre_norm) {
        auto a = attention(tape, tape.layer_norm(x, tape.param(p.ln1_g), tape.param(p.ln1_b)), mask, p, cfg.heads, probe);
        a = tape.dropout(a, cfg.dropout, rng, train);
        auto x1 = tape.add(x, a);
        auto f = ffn(tape, tape.layer_norm(x1, tape.param(p.ln2_g), tape.param(p.ln2_b)), p);
        f = tape.dropout(f, cfg.dropout, rng, train);
        return tape.add(x1, f);
    }
    auto a = attention(tape, x, mask, p, cfg.heads, probe);
    a = tape.dropout(a, cfg.dropout, rng, train);
    auto x1 = tape.layer_norm(tape.add(x, a), tape.param(p.ln1_g), tape.param(p.ln1_b));
    auto f = ffn(tape, x1, p);
    f = tape.dropout(f, cfg.dropout, rng, train);
    return tape.layer_norm(tape.add(x1, f), tape.param(p.ln2_g), tape.param(p.ln2_b));
}

}  // namespace opm::nn
