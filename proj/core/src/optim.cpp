#include "cograph/optim.hpp"

#include <atomic>
#include <cmath>

namespace cograph {

static std::atomic<std::uint64_t> g_adam_steps{0};

std::uint64_t adam_total_steps() { return g_adam_steps.load(); }

Adam::Adam(std::vector<Parameter*> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (Parameter* p : params_) {
        detail::require(p != nullptr, "Adam: null parameter");
        detail::require(p->trainable, "Adam: frozen parameter '" + p->name + "' in update group");
        m_.push_back(Tensor::zeros(p->value.shape()));
        v_.push_back(Tensor::zeros(p->value.shape()));
    }
}

void Adam::step() {
    ++step_;
    g_adam_steps.fetch_add(1);
    const double b1t = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double b2t = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
        Parameter& p = *params_[k];
        detail::require(p.grad.same_shape(p.value), "Adam: gradient shape mismatch for '" + p.name + "'");
        Tensor& m = m_[k];
        Tensor& v = v_[k];
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const double g = p.grad[i];
            m[i] = static_cast<Real>(cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g);
            v[i] = static_cast<Real>(cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g);
            const double mhat = m[i] / b1t;
            const double vhat = v[i] / b2t;
            p.value[i] -= static_cast<Real>(cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps));
        }
    }
}

void Adam::zero_grad() {
    for (Parameter* p : params_) p->zero_grad();
}

double clip_global_norm(const std::vector<Parameter*>& params, double max_norm) {
    double sq = 0;
    for (const Parameter* p : params)
        for (Real g : p->grad.data()) sq += static_cast<double>(g) * static_cast<double>(g);
    const double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0) {
        const Real s = static_cast<Real>(max_norm / norm);
        for (Parameter* p : params)
            for (Real& g : p->grad.data()) g *= s;
    }
    return norm;
}

}  // namespace cograph
