#include "opm/tensor.hpp"

#include <cmath>

#include "opm/errors.hpp"

namespace opm::nn {

Tensor Tensor::full(int r, int c, double value) {
    Tensor t(r, c);
    t.fill(value);
    return t;
}

double Tensor::scalar() const {
    if (rows != 1 || cols != 1) throw ValidationError("scalar() on tensor of shape " + shape_str());
    return v[0];
}

void Tensor::fill(double value) {
    for (auto& x : v) x = value;
}

bool Tensor::all_finite() const {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

std::string Tensor::shape_str() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

namespace {

void check_mm(int ak, int bk, const char* what) {
    if (ak != bk) throw ValidationError(std::string(what) + ": inner dimensions differ");
}

}  // namespace

// ikj order: the j loop writes contiguous C and reads contiguous B, which the
// compiler vectorizes without reassociating any per-element sum.
void matmul_acc(Tensor& c, const Tensor& a, const Tensor& b) {
    check_mm(a.cols, b.rows, "matmul");
    for (int i = 0; i < a.rows; ++i) {
        const double* arow = a.row_ptr(i);
        double* crow = c.row_ptr(i);
        for (int k = 0; k < a.cols; ++k) {
            double av = arow[k];
            const double* brow = b.row_ptr(k);
            for (int j = 0; j < b.cols; ++j) crow[j] += av * brow[j];
        }
    }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    Tensor c(a.rows, b.cols);
    matmul_acc(c, a, b);
    return c;
}

void matmul_nt_acc(Tensor& c, const Tensor& a, const Tensor& b) {
    check_mm(a.cols, b.cols, "matmul_nt");
    Tensor bt = transpose(b);
    matmul_acc(c, a, bt);
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
    Tensor c(a.rows, b.rows);
    matmul_nt_acc(c, a, b);
    return c;
}

void matmul_tn_acc(Tensor& c, const Tensor& a, const Tensor& b) {
    check_mm(a.rows, b.rows, "matmul_tn");
    for (int i = 0; i < a.rows; ++i) {
        const double* arow = a.row_ptr(i);
        const double* brow = b.row_ptr(i);
        for (int k = 0; k < a.cols; ++k) {
            double av = arow[k];
            double* crow = c.row_ptr(k);
            for (int j = 0; j < b.cols; ++j) crow[j] += av * brow[j];
        }
    }
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
    Tensor c(a.cols, b.cols);
    matmul_tn_acc(c, a, b);
    return c;
}

Tensor transpose(const Tensor& a) {
    Tensor t(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) t.at(j, i) = a.at(i, j);
    return t;
}

void add_inplace(Tensor& dst, const Tensor& src) {
    if (!dst.same_shape(src))
        throw ValidationError("add_inplace: shape mismatch " + dst.shape_str() + " vs " + src.shape_str());
    for (std::size_t i = 0; i < dst.v.size(); ++i) dst.v[i] += src.v[i];
}

}  // namespace opm::nn
