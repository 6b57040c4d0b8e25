#pragma once

#include <cstdint>
#include <vector>

#include "opm/tape.hpp"

namespace opm::nn {

struct AdamConfig {
    double lr = 2e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Per-parameter moment accumulators plus the shared step counter.
class Adam {
public:
    Adam(std::vector<Param*> params, AdamConfig cfg);

    // One update with bias correction. Throws NumericError (naming the
    // parameter) when a gradient is not finite. Gradients are not cleared.
    void step();

    void zero_grad();
    std::int64_t step_count() const { return step_; }
    const AdamConfig& config() const { return cfg_; }
    void set_lr(double lr) { cfg_.lr = lr; }

private:
    std::vector<Param*> params_;
    AdamConfig cfg_;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
    std::int64_t step_ = 0;
};

}  // namespace opm::nn
