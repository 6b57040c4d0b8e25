#include "opm/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "opm/errors.hpp"

namespace opm::nn {

GradCheckResult grad_check(const std::function<double()>& loss_fn,
                           const std::function<void()>& compute_grads,
                           const std::vector<Param*>& params,
                           double epsilon,
                           int max_coords,
                           Rng* rng) {
    if (epsilon <= 0.0) throw ValidationError("grad_check: epsilon must be > 0");
    if (params.empty()) throw ValidationError("grad_check: no parameters");

    for (Param* p : params) p->zero_grad();
    compute_grads();

    struct Coord {
        Param* p;
        std::size_t idx;
    };
    std::vector<Coord> coords;
    for (Param* p : params)
        for (std::size_t i = 0; i < p->value.v.size(); ++i) coords.push_back({p, i});

    if (rng && static_cast<int>(coords.size()) > max_coords) rng->shuffle(coords);
    std::size_t n = std::min<std::size_t>(coords.size(), static_cast<std::size_t>(max_coords));

    GradCheckResult res;
    for (std::size_t c = 0; c < n; ++c) {
        Param* p = coords[c].p;
        std::size_t i = coords[c].idx;
        double saved = p->value.v[i];
        p->value.v[i] = saved + epsilon;
        double fp = loss_fn();
        p->value.v[i] = saved - epsilon;
        double fm = loss_fn();
        p->value.v[i] = saved;
        double numeric = (fp - fm) / (2.0 * epsilon);
        double analytic = p->grad.v[i];
        double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
        double rel = std::fabs(analytic - numeric) / denom;
        res.max_relative_error = std::max(res.max_relative_error, rel);
        ++res.coordinates_checked;
    }
    return res;
}

}  // namespace opm::nn
