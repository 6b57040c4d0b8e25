#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "opm/rng.hpp"
#include "opm/tensor.hpp"

namespace opm::nn {

// Trainable weight. Gradients accumulate across tapes until the optimizer
// consumes them, so batches are plain gradient accumulation.
struct Param {
    std::string name;
    Tensor value;
    Tensor grad;

    Param() = default;
    Param(std::string n, int rows, int cols) : name(std::move(n)), value(rows, cols), grad(rows, cols) {}

    void zero_grad() { grad.fill(0.0); }
};

// query x key permission matrix
struct AttentionMask {
    int queries = 0;
    int keys = 0;
    std::vector<std::uint8_t> allowed;

    static AttentionMask full(int n);
    static AttentionMask causal(int n);
    bool is_allowed(int q, int k) const { return allowed[static_cast<std::size_t>(q) * keys + k] != 0; }
    void validate() const;  // every query needs at least one allowed key
};

// Reverse-mode tape over Tensor ops. Forward values are computed eagerly at
// node creation; backward() replays the recorded closures in reverse. One
// tape per forward pass; Params outlive tapes.
class Tape {
public:
    using NodeId = int;

    NodeId input(Tensor t);                  // constant leaf
    NodeId constant(double value);           // 1x1 leaf
    NodeId param(Param& p);                  // trainable leaf, cached per tape

    const Tensor& val(NodeId id) const { return node(id).val; }
    const Tensor& grad_of(NodeId id) const { return node(id).grad; }

    NodeId matmul(NodeId a, NodeId b);
    NodeId matmul_nt(NodeId a, NodeId b);    // a * b^T
    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId add_rowvec(NodeId x, NodeId bias);  // bias 1xC broadcast over rows
    NodeId mul(NodeId a, NodeId b);            // elementwise
    NodeId scale(NodeId a, double s);
    NodeId relu(NodeId a);
    NodeId gelu(NodeId a);
    NodeId sigmoid(NodeId a);
    NodeId masked_softmax_rows(NodeId scores, AttentionMask mask);
    NodeId layer_norm(NodeId x, NodeId gain, NodeId bias, double eps = 1e-5);
    NodeId mean_rows(NodeId x);              // 1xC mean over rows
    NodeId stack_rows(const std::vector<NodeId>& rows);
    NodeId slice_rows(NodeId x, int r0, int n);
    NodeId slice_cols(NodeId x, int c0, int n);
    NodeId concat_cols(const std::vector<NodeId>& xs);
    NodeId select(NodeId x, int r, int c);   // 1x1
    NodeId sum_all(NodeId x);
    NodeId embedding(NodeId table, std::vector<int> ids);
    NodeId dropout(NodeId x, double rate, Rng& rng, bool train);

    // Accumulates d(loss)/d(param) into every reachable Param's grad.
    // seed_grad scales the whole gradient (1/batch for averaged batches).
    void backward(NodeId loss, double seed_grad = 1.0);

    int node_count() const { return static_cast<int>(nodes_.size()); }

private:
    struct Node {
        Tensor val;
        Tensor grad;
        bool needs_grad = false;
        std::function<void(Tape&, NodeId)> back;  // empty for constants
    };

    Node& node(NodeId id) { return nodes_[static_cast<std::size_t>(id)]; }
    const Node& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }
    NodeId push(Tensor val, bool needs_grad, std::function<void(Tape&, NodeId)> back);
    Tensor& grad(NodeId id) { return node(id).grad; }
    bool needs(NodeId id) const { return node(id).needs_grad; }

    std::vector<Node> nodes_;
    std::unordered_map<const Param*, NodeId> param_cache_;
};

}  // namespace opm::nn
