#include "opm/tape.hpp"

#include <cmath>

#include "opm/errors.hpp"

namespace opm::nn {

AttentionMask AttentionMask::full(int n) {
    AttentionMask m;
    m.queries = m.keys = n;
    m.allowed.assign(static_cast<std::size_t>(n) * n, 1);
    return m;
}

AttentionMask AttentionMask::causal(int n) {
    AttentionMask m;
    m.queries = m.keys = n;
    m.allowed.assign(static_cast<std::size_t>(n) * n, 0);
    for (int q = 0; q < n; ++q)
        for (int k = 0; k <= q; ++k) m.allowed[static_cast<std::size_t>(q) * n + k] = 1;
    return m;
}

void AttentionMask::validate() const {
    for (int q = 0; q < queries; ++q) {
        bool any = false;
        for (int k = 0; k < keys; ++k)
            if (is_allowed(q, k)) { any = true; break; }
        if (!any) throw ValidationError("attention mask: query " + std::to_string(q) + " has no allowed key");
    }
}

Tape::NodeId Tape::push(Tensor val, bool needs_grad, std::function<void(Tape&, NodeId)> back) {
    Node n;
    n.val = std::move(val);
    n.needs_grad = needs_grad;
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

Tape::NodeId Tape::input(Tensor t) { return push(std::move(t), false, {}); }

Tape::NodeId Tape::constant(double value) {
    Tensor t(1, 1);
    t.v[0] = value;
    return input(std::move(t));
}

Tape::NodeId Tape::param(Param& p) {
    auto it = param_cache_.find(&p);
    if (it != param_cache_.end()) return it->second;
    Param* pp = &p;
    NodeId id = push(p.value, true, [pp](Tape& t, NodeId self) {
        add_inplace(pp->grad, t.grad(self));
    });
    param_cache_.emplace(pp, id);
    return id;
}

Tape::NodeId Tape::matmul(NodeId a, NodeId b) {
    Tensor c = nn::matmul(val(a), val(b));
    bool ng = needs(a) || needs(b);
    return push(std::move(c), ng, [a, b](Tape& t, NodeId self) {
        const Tensor& g = t.grad(self);
        if (t.needs(a)) matmul_nt_acc(t.grad(a), g, t.val(b));
        if (t.needs(b)) matmul_tn_acc(t.grad(b), t.val(a), g);
    });
}

Tape::NodeId Tape::matmul_nt(NodeId a, NodeId b) {
    Tensor c = nn::matmul_nt(val(a), val(b));
    bool ng = needs(a) || needs(b);
    return push(std::move(c), ng, [a, b](Tape& t, NodeId self) {
        const Tensor& g = t.grad(self);
        if (t.needs(a)) matmul_acc(t.grad(a), g, t.val(b));
        if (t.needs(b)) matmul_tn_acc(t.grad(b), g, t.val(a));
    });
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
    const Tensor& ta = val(a);
    const Tensor& tb = val(b);
    if (!ta.same_shape(tb)) throw ValidationError("add: shape mismatch " + ta.shape_str() + " vs " + tb.shape_str());
    Tensor c = ta;
    add_inplace(c, tb);
    bool ng = needs(a) || needs(b);
    return push(std::move(c), ng, [a, b](Tape& t, NodeId self) {
        const Tensor& g = t.grad(self);
        if (t.needs(a)) add_inplace(t.grad(a), g);
        if (t.needs(b)) add_inplace(t.grad(b), g);
    });
}

Tape::NodeId Tape::sub(NodeId a, NodeId b) {
    const Tensor& ta = val(a);
    const Tensor& tb = val(b);
    if (!ta.same_shape(tb)) throw ValidationError("sub: shape mismatch " + ta.shape_str() + " vs " + tb.shape_str());
    Tensor c = ta;
    for (std::size_t i = 0; i < c.v.size(); ++i) c.v[i] -= tb.v[i];
    bool ng = needs(a) || needs(b);
    return push(std::move(c), ng, [a, b](Tape& t, NodeId self) {
        const Tensor& g = t.grad(self);
        if (t.needs(a)) add_inplace(t.grad(a), g);
        if (t.needs(b)) {
            Tensor& gb = t.grad(b);
            for (std::size_t i = 0; i < gb.v.size(); ++i) gb.v[i] -= g.v[i];
        }
    });
}

Tape::NodeId Tape::add_rowvec(NodeId x, NodeId bias) {
    const Tensor& tx = val(x);
    const Tensor& tb = val(bias);
    if (tb.rows != 1 || tb.cols != tx.cols)
        throw ValidationError("add_rowvec: bias shape " + tb.shape_str() + " does not broadcast over " + tx.shape_str());
    Tensor c = tx;
    for (int i = 0; i < c.rows; ++i) {
        double* crow = c.row_ptr(i);
        for (int j = 0; j < c.cols; ++j) crow[j] += tb.v[static_cast<std::size_t>(j)];
    }
    bool ng = needs(x) || needs(bias);
    return push(std::move(c), ng, [x, bias](Tape& t, NodeId self) {
        const Tensor& g = t.grad(self);
        if (t.needs(x)) add_inplace(t.grad(x), g);
        if (t.needs(bias)) {
            Tensor& gb = t.grad(bias);
            for (int i = 0; i < g.rows; ++i) {
                const double* grow = g.row_ptr(i);
                for (int j = 0; j < g.cols; ++j) gb.v[static_cast<std::size_t>(j)] += grow[j];
            }
        }
    });
}

Tape::NodeId Tape::mul(NodeId a, NodeId b) {
    const Tensor& ta = val(a);
    const Tensor& tb = val(b);
    if (!ta.same_shape(tb)) throw ValidationError("mul: shape mismatch");
    Tensor c = ta;
    for (std::size_t i = 0; i < c.v.size(); ++i) c.v[i] *= tb.v[i];
    bool ng = needs(a) || needs(b);
    return push(std::move(c), ng, [a, b](Tape& t, NodeId self) {
        const Tensor& g = t.grad(self);
        if (t.needs(a)) {
            Tensor& ga = t.grad(a);
            const Tensor& vb = t.val(b);
            for (std::size_t i = 0; i < ga.v.size(); ++i) ga.v[i] += g.v[i] * vb.v[i];
        }
        if (t.needs(b)) {
            Tensor& gb = t.grad(b);
            const Tensor& va = t.val(a);
            for (std::size_t i = 0; i < gb.v.size(); ++i) gb.v[i] += g.v[i] * va.v[i];
        }
    });
}

Tape::NodeId Tape::scale(NodeId a, double s) {
    Tensor c = val(a);
    for (auto& x : c.v) x *= s;
    return push(std::move(c), needs(a), [a, s](Tape& t, NodeId self) {
        if (!t.needs(a)) return;
        const Tensor& g = t.grad(self);
        Tensor& ga = t.grad(a);
        for (std::size_t i = 0; i < ga.v.size(); ++i) ga.v[i] += s * g.v[i];
    });
}

Tape::NodeId Tape::relu(NodeId a) {
    Tensor c = val(a);
    for (auto& x : c.v) x = x > 0.0 ? x : 0.0;
    return push(std::move(c), needs(a), [a](Tape& t, NodeId self) {
        if (!t.needs(a)) return;
        const Tensor& g = t.grad(self);
        const Tensor& va = t.val(a);
        Tensor& ga = t.grad(a);
        for (std::size_t i = 0; i < ga.v.size(); ++i)
            if (va.v[i] > 0.0) ga.v[i] += g.v[i];
    });
}

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
}

Tape::NodeId Tape::gelu(NodeId a) {
    Tensor c = val(a);
    for (auto& x : c.v) {
        double t = std::tanh(kGeluC * (x + 0.044715 * x * x * x));
        x = 0.5 * x * (1.0 + t);
    }
    return push(std::move(c), needs(a), [a](Tape& t, NodeId self) {
        if (!t.needs(a)) return;
        const Tensor& g = t.grad(self);
        const Tensor& va = t.val(a);
        Tensor& ga = t.grad(a);
        for (std::size_t i = 0; i < ga.v.size(); ++i) {
            double x = va.v[i];
            double u = kGeluC * (x + 0.044715 * x * x * x);
            double th = std::tanh(u);
            double du = kGeluC * (1.0 + 3.0 * 0.044715 * x * x);
            double d = 0.5 * (1.0 + th) + 0.5 * x * (1.0 - th * th) * du;
            ga.v[i] += g.v[i] * d;
        }
    });
}

Tape::NodeId Tape::sigmoid(NodeId a) {
    Tensor c = val(a);
    for (auto& x : c.v) x = 1.0 / (1.0 + std::exp(-x));
    return push(std::move(c), needs(a), [a](Tape& t, NodeId self) {
        if (!t.needs(a)) return;
        const Tensor& g = t.grad(self);
        const Tensor& y = t.val(self);
        Tensor& ga = t.grad(a);
        for (std::size_t i = 0; i < ga.v.size(); ++i) ga.v[i] += g.v[i] * y.v[i] * (1.0 - y.v[i]);
    });
}

// Disallowed keys get probability exactly 0; each row's softmax only ever
// touches its own allowed keys, so permitted rows are untouched by changes
// behind the mask.
Tape::NodeId Tape::masked_softmax_rows(NodeId scores, AttentionMask mask) {
    const Tensor& s = val(scores);
    if (s.rows != mask.queries || s.cols != mask.keys)
        throw ValidationError("masked_softmax_rows: mask shape mismatch");
    mask.validate();
    Tensor p(s.rows, s.cols);
    for (int q = 0; q < s.rows; ++q) {
        double mx = -1e300;
        for (int k = 0; k < s.cols; ++k)
            if (mask.is_allowed(q, k) && s.at(q, k) > mx) mx = s.at(q, k);
        double z = 0.0;
        for (int k = 0; k < s.cols; ++k) {
            if (mask.is_allowed(q, k)) {
                double e = std::exp(s.at(q, k) - mx);
                p.at(q, k) = e;
                z += e;
            }
        }
        for (int k = 0; k < s.cols; ++k)
            if (mask.is_allowed(q, k)) p.at(q, k) /= z;
    }
    return push(std::move(p), needs(scores), [scores, mask = std::move(mask)](Tape& t, NodeId self) {
        if (!t.needs(scores)) return;
        const Tensor& g = t.grad(self);
        const Tensor& p = t.val(self);
        Tensor& gs = t.grad(scores);
        for (int q = 0; q < p.rows; ++q) {
            double dot = 0.0;
            for (int k = 0; k < p.cols; ++k)
                if (mask.is_allowed(q, k)) dot += p.at(q, k) * g.at(q, k);
            for (int k = 0; k < p.cols; ++k)
                if (mask.is_allowed(q, k)) gs.at(q, k) += p.at(q, k) * (g.at(q, k) - dot);
        }
    });
}

Tape::NodeId Tape::layer_norm(NodeId x, NodeId gain, NodeId bias, double eps) {
    const Tensor& tx = val(x);
    const Tensor& tg = val(gain);
    const Tensor& tb = val(bias);
    if (tg.rows != 1 || tg.cols != tx.cols || tb.rows != 1 || tb.cols != tx.cols)
        throw ValidationError("layer_norm: gain/bias must be 1x" + std::to_string(tx.cols));
    int C = tx.cols;
    Tensor y(tx.rows, C);
    for (int i = 0; i < tx.rows; ++i) {
        const double* xr = tx.row_ptr(i);
        double mu = 0.0;
        for (int j = 0; j < C; ++j) mu += xr[j];
        mu /= C;
        double var = 0.0;
        for (int j = 0; j < C; ++j) var += (xr[j] - mu) * (xr[j] - mu);
        var /= C;
        double inv = 1.0 / std::sqrt(var + eps);
        double* yr = y.row_ptr(i);
        for (int j = 0; j < C; ++j) yr[j] = (xr[j] - mu) * inv * tg.v[static_cast<std::size_t>(j)] + tb.v[static_cast<std::size_t>(j)];
    }
    bool ng = needs(x) || needs(gain) || needs(bias);
    return push(std::move(y), ng, [x, gain, bias, eps](Tape& t, NodeId self) {
        const Tensor& g = t.grad(self);
        const Tensor& tx = t.val(x);
        const Tensor& tg = t.val(gain);
        int C = tx.cols;
        for (int i = 0; i < tx.rows; ++i) {
            const double* xr = tx.row_ptr(i);
            const double* gr = g.row_ptr(i);
            double mu = 0.0;
            for (int j = 0; j < C; ++j) mu += xr[j];
            mu /= C;
            double var = 0.0;
            for (int j = 0; j < C; ++j) var += (xr[j] - mu) * (xr[j] - mu);
            var /= C;
            double inv = 1.0 / std::sqrt(var + eps);
            if (t.needs(gain) || t.needs(bias)) {
                Tensor& gg = t.grad(gain);
                Tensor& gb = t.grad(bias);
                for (int j = 0; j < C; ++j) {
                    double xhat = (xr[j] - mu) * inv;
                    if (t.needs(gain)) gg.v[static_cast<std::size_t>(j)] += gr[j] * xhat;
                    if (t.needs(bias)) gb.v[static_cast<std::size_t>(j)] += gr[j];
                }
            }
            if (t.needs(x)) {
                Tensor& gx = t.grad(x);
                double* gxr = gx.row_ptr(i);
                double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
                for (int j = 0; j < C; ++j) {
                    double dxhat = gr[j] * tg.v[static_cast<std::size_t>(j)];
                    double xhat = (xr[j] - mu) * inv;
                    sum_dxhat += dxhat;
                    sum_dxhat_xhat += dxhat * xhat;
                }
                for (int j = 0; j < C; ++j) {
                    double dxhat = gr[j] * tg.v[static_cast<std::size_t>(j)];
                    double xhat = (xr[j] - mu) * inv;
                    gxr[j] += inv * (dxhat - sum_dxhat / C - xhat * sum_dxhat_xhat / C);
                }
            }
        }
    });
}

Tape::NodeId Tape::mean_rows(NodeId x) {
    const Tensor& tx = val(x);
    if (tx.rows < 1) throw ValidationError("mean_rows: empty input");
    Tensor y(1, tx.cols);
    for (int i = 0; i < tx.rows; ++i) {
        const double* xr = tx.row_ptr(i);
        for (int j = 0; j < tx.cols; ++j) y.v[static_cast<std::size_t>(j)] += xr[j];
    }
    for (auto& v : y.v) v /= tx.rows;
    return push(std::move(y), needs(x), [x](Tape& t, NodeId self) {
        if (!t.needs(x)) return;
        const Tensor& g = t.grad(self);
        Tensor& gx = t.grad(x);
        double inv = 1.0 / gx.rows;
        for (int i = 0; i < gx.rows; ++i) {
            double* gr = gx.row_ptr(i);
            for (int j = 0; j < gx.cols; ++j) gr[j] += g.v[static_cast<std::size_t>(j)] * inv;
        }
    });
}

Tape::NodeId Tape::stack_rows(const std::vector<NodeId>& rows) {
    if (rows.empty()) throw ValidationError("stack_rows: empty list");
    int C = val(rows[0]).cols;
    Tensor y(static_cast<int>(rows.size()), C);
    bool ng = false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Tensor& r = val(rows[i]);
        if (r.rows != 1 || r.cols != C) throw ValidationError("stack_rows: rows must all be 1x" + std::to_string(C));
        for (int j = 0; j < C; ++j) y.at(static_cast<int>(i), j) = r.v[static_cast<std::size_t>(j)];
        ng = ng || needs(rows[i]);
    }
    return push(std::move(y), ng, [rows](Tape& t, NodeId self) {
        const Tensor& g = t.grad(self);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (!t.needs(rows[i])) continue;
            Tensor& gr = t.grad(rows[i]);
            const double* src = g.row_ptr(static_cast<int>(i));
            for (int j = 0; j < g.cols; ++j) gr.v[static_cast<std::size_t>(j)] += src[j];
        }
    });
}

Tape::NodeId Tape::slice_rows(NodeId x, int r0, int n) {
    const Tensor& tx = val(x);
    if (r0 < 0 || n < 1 || r0 + n > tx.rows) throw ValidationError("slice_rows: range out of bounds");
    Tensor y(n, tx.cols);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < tx.cols; ++j) y.at(i, j) = tx.at(r0 + i, j);
    return push(std::move(y), needs(x), [x, r0](Tape& t, NodeId self) {
        if (!t.needs(x)) return;
        const Tensor& g = t.grad(self);
        Tensor& gx = t.grad(x);
        for (int i = 0; i < g.rows; ++i)
            for (int j = 0; j < g.cols; ++j) gx.at(r0 + i, j) += g.at(i, j);
    });
}

Tape::NodeId Tape::slice_cols(NodeId x, int c0, int n) {
    const Tensor& tx = val(x);
    if (c0 < 0 || n < 1 || c0 + n > tx.cols) throw ValidationError("slice_cols: range out of bounds");
    Tensor y(tx.rows, n);
    for (int i = 0; i < tx.rows; ++i)
        for (int j = 0; j < n; ++j) y.at(i, j) = tx.at(i, c0 + j);
    return push(std::move(y), needs(x), [x, c0](Tape& t, NodeId self) {
        if (!t.needs(x)) return;
        const Tensor& g = t.grad(self);
        Tensor& gx = t.grad(x);
        for (int i = 0; i < g.rows; ++i)
            for (int j = 0; j < g.cols; ++j) gx.at(i, c0 + j) += g.at(i, j);
    });
}

Tape::NodeId Tape::concat_cols(const std::vector<NodeId>& xs) {
    if (xs.empty()) throw ValidationError("concat_cols: empty list");
    int R = val(xs[0]).rows;
    int C = 0;
    bool ng = false;
    for (NodeId id : xs) {
        if (val(id).rows != R) throw ValidationError("concat_cols: row counts differ");
        C += val(id).cols;
        ng = ng || needs(id);
    }
    Tensor y(R, C);
    int off = 0;
    for (NodeId id : xs) {
        const Tensor& tx = val(id);
        for (int i = 0; i < R; ++i)
            for (int j = 0; j < tx.cols; ++j) y.at(i, off + j) = tx.at(i, j);
        off += tx.cols;
    }
    return push(std::move(y), ng, [xs](Tape& t, NodeId self) {
        const Tensor& g = t.grad(self);
        int off = 0;
        for (NodeId id : xs) {
            const Tensor& tx = t.val(id);
            if (t.needs(id)) {
                Tensor& gx = t.grad(id);
                for (int i = 0; i < g.rows; ++i)
                    for (int j = 0; j < tx.cols; ++j) gx.at(i, j) += g.at(i, off + j);
            }
            off += tx.cols;
        }
    });
}

Tape::NodeId Tape::select(NodeId x, int r, int c) {
    const Tensor& tx = val(x);
    if (r < 0 || r >= tx.rows || c < 0 || c >= tx.cols) throw ValidationError("select: index out of bounds");
    Tensor y(1, 1);
    y.v[0] = tx.at(r, c);
    return push(std::move(y), needs(x), [x, r, c](Tape& t, NodeId self) {
        if (!t.needs(x)) return;
        t.grad(x).at(r, c) += t.grad(self).v[0];
    });
}

Tape::NodeId Tape::sum_all(NodeId x) {
    const Tensor& tx = val(x);
    Tensor y(1, 1);
    for (double v : tx.v) y.v[0] += v;
    return push(std::move(y), needs(x), [x](Tape& t, NodeId self) {
        if (!t.needs(x)) return;
        double g = t.grad(self).v[0];
        Tensor& gx = t.grad(x);
        for (auto& v : gx.v) v += g;
    });
}

Tape::NodeId Tape::embedding(NodeId table, std::vector<int> ids) {
    const Tensor& tt = val(table);
    Tensor y(static_cast<int>(ids.size()), tt.cols);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        int id = ids[i];
        if (id < 0 || id >= tt.rows) throw ValidationError("embedding: id out of range");
        const double* src = tt.row_ptr(id);
        double* dst = y.row_ptr(static_cast<int>(i));
        for (int j = 0; j < tt.cols; ++j) dst[j] = src[j];
    }
    return push(std::move(y), needs(table), [table, ids = std::move(ids)](Tape& t, NodeId self) {
        if (!t.needs(table)) return;
        const Tensor& g = t.grad(self);
        Tensor& gt = t.grad(table);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            const double* src = g.row_ptr(static_cast<int>(i));
            double* dst = gt.row_ptr(ids[i]);
            for (int j = 0; j < g.cols; ++j) dst[j] += src[j];
        }
    });
}

Tape::NodeId Tape::dropout(NodeId x, double rate, Rng& rng, bool train) {
    if (!train || rate <= 0.0) return x;
    if (rate >= 1.0) throw ValidationError("dropout: rate must be < 1");
    const Tensor& tx = val(x);
    Tensor mask(tx.rows, tx.cols);
    double keep = 1.0 - rate;
    for (auto& m : mask.v) m = rng.bernoulli(rate) ? 0.0 : 1.0 / keep;
    Tensor y = tx;
    for (std::size_t i = 0; i < y.v.size(); ++i) y.v[i] *= mask.v[i];
    return push(std::move(y), needs(x), [x, mask = std::move(mask)](Tape& t, NodeId self) {
        if (!t.needs(x)) return;
        const Tensor& g = t.grad(self);
        Tensor& gx = t.grad(x);
        for (std::size_t i = 0; i < gx.v.size(); ++i) gx.v[i] += g.v[i] * mask.v[i];
    });
}

void Tape::backward(NodeId loss, double seed_grad) {
    if (loss < 0 || loss >= static_cast<NodeId>(nodes_.size()))
        throw ValidationError("backward: invalid node id (no forward pass recorded)");
    if (!node(loss).val.all_finite()) throw NumericError("backward: loss is not finite");
    for (auto& n : nodes_) {
        n.grad = Tensor(n.val.rows, n.val.cols);
    }
    Node& ln = node(loss);
    for (auto& g : ln.grad.v) g = seed_grad;
    for (NodeId id = loss; id >= 0; --id) {
        Node& n = node(id);
        if (n.needs_grad && n.back) n.back(*this, id);
    }
}

}  // namespace opm::nn
