#ifndef MICSEL_RNG_HPP
#define MICSEL_RNG_HPP

// Labeled random streams. Every stream is a mt19937_64 seeded from
// (run seed, label) through SplitMix64, so adding a stream never shifts the
// draws of another. Distributions come from Boost.Random, whose algorithms
// are fixed across platforms (unlike the <random> distributions).

#include "micsel/linalg.hpp"

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace micsel
{

std::uint64_t splitmix64(std::uint64_t& state);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view text);

/// Seed of the stream `label` under run seed `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

class Stream
{
public:
    Stream(std::uint64_t seed, std::string_view label);

    double normal(double mean = 0.0, double sd = 1.0);
    double uniform();
    /// Uniform integer in [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
    std::int64_t poisson(double rate);
    bool bernoulli(double p);

    /// rows x cols of iid N(0, sd^2), filled row by row.
    Matrix normal_matrix(Index rows, Index cols, double sd = 1.0);

    /// `count` distinct values from [lo, hi], in draw order (partial Fisher-Yates).
    std::vector<std::int64_t> sample_without_replacement(std::int64_t lo, std::int64_t hi, std::int64_t count);

    /// Random permutation of 0..n-1.
    std::vector<Index> permutation(Index n);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

} // namespace micsel

#endif // MICSEL_RNG_HPP
