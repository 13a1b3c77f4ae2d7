#include "cograph/gradcheck.hpp"

#include <cmath>

namespace cograph {

static double eval_loss(const LossBuilder& build) {
    Tape tape;
    Tape::Id loss = build(tape);
    return tape.val(loss).scalar_value();
}

GradCheckReport finite_diff_check(const LossBuilder& build, const std::vector<Parameter*>& params,
                                  std::size_t n_coords, double h, Rng rng) {
    detail::require(!params.empty(), "finite_diff_check: no parameters given");
    detail::require(n_coords > 0 && h > 0, "finite_diff_check: bad n_coords or step");

    // analytic pass
    for (Parameter* p : params) p->zero_grad();
    Tape tape;
    Tape::Id loss = build(tape);
    const double base = tape.val(loss).scalar_value();
    tape.backward(loss);

    // determinism contract: re-evaluating at the base point must reproduce it
    const double replay = eval_loss(build);
    detail::require(replay == base,
                    "finite_diff_check: loss builder is not deterministic under a fixed seed");

    std::size_t total = 0;
    for (const Parameter* p : params) total += p->size();
    detail::require(total > 0, "finite_diff_check: parameters are empty");

    GradCheckReport rep;
    rep.n_coords = n_coords;
    for (std::size_t c = 0; c < n_coords; ++c) {
        // sample a coordinate uniformly over all parameter entries
        std::size_t flat = static_cast<std::size_t>(rng.integer(total));
        Parameter* p = nullptr;
        for (Parameter* cand : params) {
            if (flat < cand->size()) {
                p = cand;
                break;
            }
            flat -= cand->size();
        }
        const Real saved = p->value[flat];
        p->value[flat] = static_cast<Real>(saved + h);
        const double lp = eval_loss(build);
        p->value[flat] = static_cast<Real>(saved - h);
        const double lm = eval_loss(build);
        p->value[flat] = saved;

        const double numeric = (lp - lm) / (2.0 * h);
        const double analytic = p->grad[flat];
        const double denom = std::max({1.0, std::fabs(analytic), std::fabs(numeric)});
        const double rel = std::fabs(analytic - numeric) / denom;
        if (rel > rep.max_rel_err) {
            rep.max_rel_err = rel;
            rep.worst_param = p->name;
            rep.worst_index = flat;
            rep.worst_analytic = analytic;
            rep.worst_numeric = numeric;
        }
    }
    return rep;
}

}  // namespace cograph
