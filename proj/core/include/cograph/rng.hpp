#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "cograph/tensor.hpp"

namespace cograph {

/// Seeded generator with a derivation hierarchy: every stochastic choice in a
/// run descends from one root seed via child("label") / child("label", i).
/// Distributions are generated from raw 64-bit draws so sequences are stable
/// across standard-library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }

    Rng child(std::string_view label) const;
    Rng child(std::string_view label, std::uint64_t index) const;

    std::uint64_t next_u64();
    /// Uniform in [0, 1).
    double unit();
    double uniform(double lo, double hi);
    /// Standard normal via Box-Muller (no cached second draw).
    double normal();
    double normal(double mu, double sigma);
    /// Uniform integer in [0, n).
    std::uint64_t integer(std::uint64_t n);

    Tensor normal_tensor(Shape shape, double sigma = 1.0);
    Tensor uniform_tensor(Shape shape, double lo, double hi);
    /// Glorot-style init for a [fan_in × fan_out] linear map.
    Tensor xavier(std::size_t fan_in, std::size_t fan_out);

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

}  // namespace cograph
