#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cograph/rng.hpp"
#include "cograph/tensor.hpp"

namespace cograph {

/// A trainable tensor with its accumulated gradient.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;
    bool trainable = true;

    Parameter() = default;
    Parameter(std::string n, Tensor v, bool train = true)
        : name(std::move(n)), value(std::move(v)), grad(Tensor::zeros(value.shape())), trainable(train) {}

    void zero_grad() { grad.fill(Real(0)); }
    std::size_t size() const { return value.size(); }
};

/// Reverse-mode tape. One tape records one forward pass; backward() walks the
/// recorded nodes in reverse creation order and accumulates into every
/// reachable Parameter's gradient. Values are written once at recording time
/// and never mutated afterwards.
class Tape {
public:
    using Id = std::int32_t;

    Tape() { nodes_.reserve(1024); }

    /// Constant leaf: gradients never flow into it.
    Id input(Tensor v);
    /// Parameter leaf: backward() accumulates into p.grad when p.trainable.
    Id param(Parameter& p);
    /// Parameter treated as a constant (frozen weights).
    Id frozen(const Parameter& p) { return input(p.value); }

    const Tensor& val(Id id) const { return nodes_[check_id(id)].value; }
    std::size_t n_nodes() const { return nodes_.size(); }

    // ---- recorded operations ----
    Id matmul(Id a, Id b);
    Id transpose(Id a);
    Id add(Id a, Id b);
    Id sub(Id a, Id b);
    Id hadamard(Id a, Id b);
    Id square(Id a) { return hadamard(a, a); }
    /// Broadcast-add a [1×c] row vector to every row of m.
    Id add_rowvec(Id m, Id row);
    Id scale(Id a, double c);
    /// Multiply by a [1×1] node (learnable scalar).
    Id mul_scalar(Id a, Id s);
    Id relu(Id a);
    Id softmax_rows(Id a);
    /// Per-row layer norm with learnable [1×c] gain and shift.
    Id layer_norm_rows(Id a, Id gain, Id shift, double eps = 1e-5);
    Id reshape(Id a, Shape shape);
    Id flatten(Id a) { return reshape(a, {1, node_size(a)}); }
    Id concat_cols(Id a, Id b);
    Id concat_rows(std::span<const Id> parts);
    Id slice_row(Id a, std::size_t row);
    Id repeat_rows(Id row, std::size_t n);
    Id mean_rows(Id a);
    Id sum_all(Id a);
    Id mean_all(Id a);
    Id sum_sq(Id a) { return sum_all(square(a)); }
    /// input [Cin,H,W] · kernel [Cout,Cin,kh,kw] + bias [1×Cout], zero padding.
    Id conv2d(Id in, Id kernel, Id bias, std::size_t stride, std::size_t pad);
    /// Adaptive average pooling to [out_h, out_w]; accepts [H,W] or [C,H,W].
    Id adaptive_avg_pool2d(Id a, std::size_t out_h, std::size_t out_w);
    /// Inverted-dropout by a fixed seed-driven mask; identity when !training.
    Id dropout(Id a, double rate, Rng& rng, bool training);

    /// Backpropagates from a scalar loss into every reachable Parameter.
    void backward(Id loss);

    /// When set, every recorded value is checked for NaN/Inf (test builds).
    void set_check_finite(bool on) { check_finite_ = on; }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool needs_grad = false;
        bool grad_alloc = false;
        Parameter* bound = nullptr;
        std::function<void(Tape&, Id)> back;
    };

    std::vector<Node> nodes_;
    bool check_finite_ = false;

    Id check_id(Id id) const;
    std::size_t node_size(Id id) const { return nodes_[check_id(id)].value.size(); }
    Id emit(Tensor value, bool needs_grad, std::function<void(Tape&, Id)> back);
    Tensor& grad_of(Id id);
    bool needs(Id id) const { return nodes_[id].needs_grad; }

    friend struct TapeTestAccess;
};

}  // namespace cograph
