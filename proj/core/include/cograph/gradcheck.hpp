#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cograph/tape.hpp"

namespace cograph {

/// Builds a scalar loss on the given tape. Must be deterministic: two calls
/// with the same parameter values have to produce the same loss.
using LossBuilder = std::function<Tape::Id(Tape&)>;

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::size_t n_coords = 0;
    std::string worst_param;
    std::size_t worst_index = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;

    bool passed(double tol) const { return n_coords > 0 && max_rel_err < tol; }
};

/// Compares reverse-mode gradients against central finite differences on
/// n_coords randomly sampled parameter coordinates. Relative error is
/// |analytic − numeric| / max(1, |analytic|, |numeric|).
GradCheckReport finite_diff_check(const LossBuilder& build, const std::vector<Parameter*>& params,
                                  std::size_t n_coords, double h, Rng rng);

}  // namespace cograph
