#include "cograph/rng.hpp"

#include <cmath>

namespace cograph {

static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

Rng::Rng(std::uint64_t seed) : seed_(seed), gen_(splitmix64(seed)) {}

Rng Rng::child(std::string_view label) const { return Rng(splitmix64(seed_ ^ fnv1a(label))); }

Rng Rng::child(std::string_view label, std::uint64_t index) const {
    return Rng(splitmix64(splitmix64(seed_ ^ fnv1a(label)) + index));
}

std::uint64_t Rng::next_u64() { return gen_(); }

double Rng::unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

double Rng::normal() {
    // Box-Muller; u clamped away from 0 so log stays finite.
    double u = unit();
    if (u < 1e-300) u = 1e-300;
    const double v = unit();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * 3.14159265358979323846 * v);
}

double Rng::normal(double mu, double sigma) { return mu + sigma * normal(); }

std::uint64_t Rng::integer(std::uint64_t n) {
    detail::require(n > 0, "Rng::integer: n must be positive");
    // modulo bias is negligible for the small n used here
    return next_u64() % n;
}

Tensor Rng::normal_tensor(Shape shape, double sigma) {
    Tensor t(std::move(shape));
    for (auto& v : t.data()) v = static_cast<Real>(normal(0.0, sigma));
    return t;
}

Tensor Rng::uniform_tensor(Shape shape, double lo, double hi) {
    Tensor t(std::move(shape));
    for (auto& v : t.data()) v = static_cast<Real>(uniform(lo, hi));
    return t;
}

Tensor Rng::xavier(std::size_t fan_in, std::size_t fan_out) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    return uniform_tensor({fan_in, fan_out}, -bound, bound);
}

}  // namespace cograph
