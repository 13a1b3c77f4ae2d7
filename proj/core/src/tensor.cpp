#include "cograph/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace cograph {

namespace detail {

void fail(const std::string& msg) { throw std::invalid_argument(msg); }

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << "x";
        os << s[i];
    }
    os << "]";
    return os.str();
}

}  // namespace detail

static std::size_t shape_size(const Shape& s) {
    std::size_t n = 1;
    for (auto d : s) n *= d;
    return s.empty() ? 0 : n;
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), data_(shape_size(shape_), Real(0)) {}

Tensor::Tensor(Shape shape, std::vector<Real> data) : shape_(std::move(shape)), data_(std::move(data)) {
    detail::require(data_.size() == shape_size(shape_),
                    "tensor data length " + std::to_string(data_.size()) +
                        " does not match shape " + detail::shape_str(shape_));
}

Tensor::Tensor(std::initializer_list<std::initializer_list<Real>> rows) {
    std::size_t r = rows.size();
    std::size_t c = r ? rows.begin()->size() : 0;
    shape_ = {r, c};
    data_.reserve(r * c);
    for (const auto& row : rows) {
        detail::require(row.size() == c, "ragged initializer list");
        data_.insert(data_.end(), row.begin(), row.end());
    }
}

Tensor Tensor::full(Shape shape, Real v) {
    Tensor t(std::move(shape));
    t.fill(v);
    return t;
}

Tensor Tensor::identity(std::size_t n) {
    Tensor t({n, n});
    for (std::size_t i = 0; i < n; ++i) t.at(i, i) = Real(1);
    return t;
}

std::size_t Tensor::rows() const {
    detail::require(rank() == 2, "rows(): tensor is not rank-2, shape " + detail::shape_str(shape_));
    return shape_[0];
}

std::size_t Tensor::cols() const {
    detail::require(rank() == 2, "cols(): tensor is not rank-2, shape " + detail::shape_str(shape_));
    return shape_[1];
}

Real& Tensor::at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
Real Tensor::at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

bool Tensor::all_finite() const {
    for (Real v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

void Tensor::fill(Real v) { std::fill(data_.begin(), data_.end(), v); }

Tensor Tensor::reshaped(Shape shape) const {
    detail::require(shape_size(shape) == size(),
                    "reshape " + detail::shape_str(shape_) + " -> " + detail::shape_str(shape) +
                        " changes element count");
    return Tensor(std::move(shape), data_);
}

double Tensor::scalar_value() const {
    detail::require(size() == 1, "scalar_value(): tensor has " + std::to_string(size()) + " elements");
    return static_cast<double>(data_[0]);
}

static void check_mm(const Tensor& a, const Tensor& b, std::size_t ak, std::size_t bk,
                     const char* what) {
    detail::require(a.rank() == 2 && b.rank() == 2,
                    std::string(what) + ": operands must be rank-2, got " +
                        detail::shape_str(a.shape()) + " and " + detail::shape_str(b.shape()));
    detail::require(ak == bk, std::string(what) + ": inner dimensions disagree, " +
                                  detail::shape_str(a.shape()) + " vs " + detail::shape_str(b.shape()));
}

void mm_acc_nn(const Tensor& a, const Tensor& b, Tensor& c) {
    check_mm(a, b, a.cols(), b.rows(), "matmul");
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    detail::require(c.rows() == m && c.cols() == n, "matmul: bad output shape");
    const Real* A = a.data().data();
    const Real* B = b.data().data();
    Real* C = c.data().data();
    for (std::size_t i = 0; i < m; ++i) {
        const Real* Ai = A + i * k;
        Real* Ci = C + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const Real av = Ai[p];
            if (av == Real(0)) continue;
            const Real* Bp = B + p * n;
            for (std::size_t j = 0; j < n; ++j) Ci[j] += av * Bp[j];
        }
    }
}

void mm_acc_nt(const Tensor& a, const Tensor& b, Tensor& c) {
    // C[m×n] += A[m×k] · (B[n×k])ᵀ
    check_mm(a, b, a.cols(), b.cols(), "matmul_nt");
    const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
    detail::require(c.rows() == m && c.cols() == n, "matmul_nt: bad output shape");
    const Real* A = a.data().data();
    const Real* B = b.data().data();
    Real* C = c.data().data();
    for (std::size_t i = 0; i < m; ++i) {
        const Real* Ai = A + i * k;
        Real* Ci = C + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const Real* Bj = B + j * k;
            Real acc = 0;
            for (std::size_t p = 0; p < k; ++p) acc += Ai[p] * Bj[p];
            Ci[j] += acc;
        }
    }
}

void mm_acc_tn(const Tensor& a, const Tensor& b, Tensor& c) {
    // C[m×n] += (A[k×m])ᵀ · B[k×n]
    check_mm(a, b, a.rows(), b.rows(), "matmul_tn");
    const std::size_t k = a.rows(), m = a.cols(), n = b.cols();
    detail::require(c.rows() == m && c.cols() == n, "matmul_tn: bad output shape");
    const Real* A = a.data().data();
    const Real* B = b.data().data();
    Real* C = c.data().data();
    for (std::size_t p = 0; p < k; ++p) {
        const Real* Ap = A + p * m;
        const Real* Bp = B + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            const Real av = Ap[i];
            if (av == Real(0)) continue;
            Real* Ci = C + i * n;
            for (std::size_t j = 0; j < n; ++j) Ci[j] += av * Bp[j];
        }
    }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    check_mm(a, b, a.cols(), b.rows(), "matmul");
    Tensor c({a.rows(), b.cols()});
    mm_acc_nn(a, b, c);
    return c;
}

Tensor transpose(const Tensor& a) {
    detail::require(a.rank() == 2, "transpose: rank-2 required");
    Tensor t({a.cols(), a.rows()});
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t.at(j, i) = a.at(i, j);
    return t;
}

static void check_same(const Tensor& a, const Tensor& b, const char* what) {
    detail::require(a.same_shape(b), std::string(what) + ": shape mismatch, " +
                                         detail::shape_str(a.shape()) + " vs " +
                                         detail::shape_str(b.shape()));
}

Tensor operator+(const Tensor& a, const Tensor& b) {
    check_same(a, b, "add");
    Tensor c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += b[i];
    return c;
}

Tensor operator-(const Tensor& a, const Tensor& b) {
    check_same(a, b, "sub");
    Tensor c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] -= b[i];
    return c;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
    check_same(a, b, "hadamard");
    Tensor c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= b[i];
    return c;
}

Tensor operator*(Real s, const Tensor& a) {
    Tensor c = a;
    for (auto& v : c.data()) v *= s;
    return c;
}

double frobenius_sq(const Tensor& a) {
    double acc = 0;
    for (Real v : a.data()) acc += static_cast<double>(v) * static_cast<double>(v);
    return acc;
}

double l2_distance(const Tensor& a, const Tensor& b) {
    check_same(a, b, "l2_distance");
    double acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += d * d;
    }
    return std::sqrt(acc);
}

Tensor softmax_rows(const Tensor& a) {
    detail::require(a.rank() == 2, "softmax_rows: rank-2 required");
    Tensor y = a;
    const std::size_t r = a.rows(), c = a.cols();
    detail::require(c > 0, "softmax_rows: empty rows");
    for (std::size_t i = 0; i < r; ++i) {
        Real mx = y.at(i, 0);
        for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, y.at(i, j));
        Real sum = 0;
        for (std::size_t j = 0; j < c; ++j) {
            Real e = std::exp(y.at(i, j) - mx);
            y.at(i, j) = e;
            sum += e;
        }
        for (std::size_t j = 0; j < c; ++j) y.at(i, j) /= sum;
    }
    return y;
}

Tensor sinusoidal_table(std::size_t n_positions, std::size_t width) {
    Tensor t({n_positions, width});
    for (std::size_t pos = 0; pos < n_positions; ++pos) {
        for (std::size_t i = 0; i < width; ++i) {
            const double exponent = static_cast<double>(2 * (i / 2)) / static_cast<double>(width);
            const double omega = std::pow(10000.0, -exponent);
            const double angle = static_cast<double>(pos) * omega;
            t.at(pos, i) = static_cast<Real>((i % 2 == 0) ? std::sin(angle) : std::cos(angle));
        }
    }
    return t;
}

}  // namespace cograph
