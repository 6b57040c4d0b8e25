#include "opm/adam.hpp"

#include <cmath>

#include "opm/errors.hpp"

namespace opm::nn {

Adam::Adam(std::vector<Param*> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (Param* p : params_) {
        m_.emplace_back(p->value.rows, p->value.cols);
        v_.emplace_back(p->value.rows, p->value.cols);
    }
}

void Adam::step() {
    ++step_;
    double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (std::size_t pi = 0; pi < params_.size(); ++pi) {
        Param& p = *params_[pi];
        if (!p.grad.all_finite()) throw NumericError("adam: non-finite gradient in parameter '" + p.name + "'");
        Tensor& m = m_[pi];
        Tensor& v = v_[pi];
        for (std::size_t i = 0; i < p.value.v.size(); ++i) {
            double g = p.grad.v[i];
            m.v[i] = cfg_.beta1 * m.v[i] + (1.0 - cfg_.beta1) * g;
            v.v[i] = cfg_.beta2 * v.v[i] + (1.0 - cfg_.beta2) * g * g;
            double mhat = m.v[i] / bc1;
            double vhat = v.v[i] / bc2;
            p.value.v[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

void Adam::zero_grad() {
    for (Param* p : params_) p->zero_grad();
}

}  // namespace opm::nn
