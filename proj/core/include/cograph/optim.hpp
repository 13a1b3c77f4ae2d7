#pragma once

#include <cstdint>
#include <vector>

#include "cograph/tape.hpp"

namespace cograph {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam over a fixed parameter group. The group is bound at construction;
/// parameters marked non-trainable are rejected up front so a frozen tensor
/// can never sneak into an update.
class Adam {
public:
    Adam(std::vector<Parameter*> params, AdamConfig cfg = {});

    void step();
    void zero_grad();

    long step_count() const { return step_; }
    const std::vector<Parameter*>& params() const { return params_; }
    AdamConfig& config() { return cfg_; }

private:
    std::vector<Parameter*> params_;
    AdamConfig cfg_;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
    long step_ = 0;
};

/// Process-wide count of Adam steps, used to assert that inference paths
/// perform zero optimizer updates.
std::uint64_t adam_total_steps();

/// Scales gradients so their joint L2 norm is at most max_norm.
double clip_global_norm(const std::vector<Parameter*>& params, double max_norm);

}  // namespace cograph
