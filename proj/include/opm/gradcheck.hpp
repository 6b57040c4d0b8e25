#pragma once

#include <functional>
#include <vector>

#include "opm/rng.hpp"
#include "opm/tape.hpp"

namespace opm::nn {

struct GradCheckResult {
    double max_relative_error = 0.0;
    int coordinates_checked = 0;
};

// Central-difference audit of analytic gradients. `loss_fn` must rebuild the
// forward pass from the current parameter values and be deterministic
// (dropout off). Samples up to `max_coords` coordinates across all
// parameters; relative error is |analytic - numeric| / max(|analytic|,
// |numeric|, 1e-8).
GradCheckResult grad_check(const std::function<double()>& loss_fn,
                           const std::function<void()>& compute_grads,
                           const std::vector<Param*>& params,
                           double epsilon = 1e-5,
                           int max_coords = 200,
                           Rng* rng = nullptr);

}  // namespace opm::nn
