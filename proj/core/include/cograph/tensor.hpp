#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace cograph {

#ifdef COGRAPH_FLOAT32
using Real = float;
#else
using Real = double;
#endif

using Shape = std::vector<std::size_t>;

namespace detail {
[[noreturn]] void fail(const std::string& msg);
inline void require(bool ok, const std::string& msg) {
    if (!ok) fail(msg);
}
std::string shape_str(const Shape& s);
}  // namespace detail

/// Dense row-major tensor. Most of the artifact uses rank-2 matrices;
/// convolution paths use rank-3 [C,H,W] and rank-4 [Cout,Cin,kh,kw].
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape);
    Tensor(Shape shape, std::vector<Real> data);
    Tensor(std::initializer_list<std::initializer_list<Real>> rows);

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
    static Tensor full(Shape shape, Real v);
    static Tensor ones(Shape shape) { return full(std::move(shape), Real(1)); }
    static Tensor identity(std::size_t n);
    static Tensor scalar(Real v) { return Tensor({1, 1}, {v}); }

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }

    // rank-2 accessors
    std::size_t rows() const;
    std::size_t cols() const;
    Real& at(std::size_t r, std::size_t c);
    Real at(std::size_t r, std::size_t c) const;

    Real& operator[](std::size_t i) { return data_[i]; }
    Real operator[](std::size_t i) const { return data_[i]; }

    std::vector<Real>& data() { return data_; }
    const std::vector<Real>& data() const { return data_; }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
    bool all_finite() const;
    void fill(Real v);

    /// Reinterprets the buffer under a new shape of the same total size.
    Tensor reshaped(Shape shape) const;

    double scalar_value() const;

private:
    Shape shape_;
    std::vector<Real> data_;
};

// ---- raw kernels (no autodiff; the tape and oracles both build on these) ----

/// C += A·B
void mm_acc_nn(const Tensor& a, const Tensor& b, Tensor& c);
/// C += A·Bᵀ
void mm_acc_nt(const Tensor& a, const Tensor& b, Tensor& c);
/// C += Aᵀ·B
void mm_acc_tn(const Tensor& a, const Tensor& b, Tensor& c);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor operator*(Real s, const Tensor& a);

double frobenius_sq(const Tensor& a);
double l2_distance(const Tensor& a, const Tensor& b);

/// Per-row softmax with max subtraction.
Tensor softmax_rows(const Tensor& a);

/// Sinusoidal table: row t holds the width-d encoding of position t.
Tensor sinusoidal_table(std::size_t n_positions, std::size_t width);

}  // namespace cograph
