#pragma once

#include <string>
#include <vector>

#include "opm/tape.hpp"

namespace opm::nn {

// One encoder block: multi-head self-attention with an arbitrary permission
// mask, then a position-wise feed-forward, with residual connections. The
// norm placement is a config choice: pre_norm applies layer norm before each
// sublayer, post_norm after the residual add.
struct TransformerLayerParams {
    Param wq, bq, wk, wv, bv, wo, bo;
    Param ln1_g, ln1_b;
    Param w1, b1, w2, b2;
    Param ln2_g, ln2_b;

    TransformerLayerParams() = default;
    TransformerLayerParams(const std::string& prefix, int d, int ffn_hidden);

    void collect(std::vector<Param*>& out);
    void init(Rng& rng);
};

struct TransformerLayerConfig {
    int heads = 4;
    bool pre_norm = true;
    double dropout = 0.0;
};

// Per-head attention probabilities averaged into one queries x keys matrix,
// captured when a probe is supplied.
struct AttentionCapture {
    std::vector<Tensor> layer_attention;  // one per captured layer
};

Tape::NodeId transformer_layer_forward(Tape& tape,
                                       Tape::NodeId x,
                                       const AttentionMask& mask,
                                       TransformerLayerParams& params,
                                       const TransformerLayerConfig& cfg,
                                       Rng& rng,
                                       bool train,
                                       AttentionCapture* probe = nullptr);

// uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) for weights; zeros for biases
void init_weight(Param& w, Rng& rng);
void init_linear(Param& w, Param& b, Rng& rng);
void init_table(Param& table, Rng& rng);

}  // namespace opm::nn
