#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace opm::nn {

// Dense row-major 2-D array of doubles. All model math runs in double; the
// single-thread loops below keep every output element's arithmetic local to
// its own row, which the causality contracts rely on.
struct Tensor {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0) {}

    static Tensor full(int r, int c, double value);

    std::size_t size() const { return v.size(); }
    double* data() { return v.data(); }
    const double* data() const { return v.data(); }
    double* row_ptr(int r) { return v.data() + static_cast<std::size_t>(r) * cols; }
    const double* row_ptr(int r) const { return v.data() + static_cast<std::size_t>(r) * cols; }

    double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }

    double scalar() const;  // value of a 1x1 tensor
    void fill(double value);
    bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
    bool all_finite() const;
    std::string shape_str() const;
};

// C = A * B
Tensor matmul(const Tensor& a, const Tensor& b);
// C = A * B^T
Tensor matmul_nt(const Tensor& a, const Tensor& b);
// C = A^T * B
Tensor matmul_tn(const Tensor& a, const Tensor& b);
// C += A * B and friends (used by backward accumulation)
void matmul_acc(Tensor& c, const Tensor& a, const Tensor& b);
void matmul_nt_acc(Tensor& c, const Tensor& a, const Tensor& b);
void matmul_tn_acc(Tensor& c, const Tensor& a, const Tensor& b);

Tensor transpose(const Tensor& a);
void add_inplace(Tensor& dst, const Tensor& src);  // dst += src

}  // namespace opm::nn
