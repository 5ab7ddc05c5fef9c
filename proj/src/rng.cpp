#include "micsel/rng.hpp"

#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include <numeric>

namespace micsel
{

std::uint64_t splitmix64(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view text)
{
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text)
    {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label)
{
    std::uint64_t state = seed ^ fnv1a(label);
    splitmix64(state);
    return splitmix64(state);
}

Stream::Stream(std::uint64_t seed, std::string_view label) : engine_(derive_seed(seed, label))
{
}

double Stream::normal(double mean, double sd)
{
    boost::random::normal_distribution<double> dist(mean, sd);
    return dist(engine_);
}

double Stream::uniform()
{
    boost::random::uniform_01<double> dist;
    return dist(engine_);
}

std::int64_t Stream::uniform_int(std::int64_t lo, std::int64_t hi)
{
    if (hi < lo)
    {
        throw DomainError("empty integer range");
    }
    boost::random::uniform_int_distribution<std::int64_t> dist(lo, hi);
    return dist(engine_);
}

std::int64_t Stream::poisson(double rate)
{
    if (!(rate > 0.0))
    {
        throw DomainError("Poisson rate must be positive");
    }
    boost::random::poisson_distribution<std::int64_t, double> dist(rate);
    return dist(engine_);
}

bool Stream::bernoulli(double p)
{
    boost::random::bernoulli_distribution<double> dist(p);
    return dist(engine_);
}

Matrix Stream::normal_matrix(Index rows, Index cols, double sd)
{
    Matrix out(rows, cols);
    boost::random::normal_distribution<double> dist(0.0, sd);
    for (Index i = 0; i < rows; ++i)
    {
        for (Index j = 0; j < cols; ++j)
        {
            out(i, j) = dist(engine_);
        }
    }
    return out;
}

std::vector<std::int64_t> Stream::sample_without_replacement(std::int64_t lo, std::int64_t hi, std::int64_t count)
{
    const std::int64_t size = hi - lo + 1;
    if (count < 0 || count > size)
    {
        throw DomainError("cannot draw " + std::to_string(count) + " distinct values from a range of " +
                          std::to_string(size));
    }
    std::vector<std::int64_t> pool(static_cast<std::size_t>(size));
    std::iota(pool.begin(), pool.end(), lo);
    for (std::int64_t i = 0; i < count; ++i)
    {
        const std::int64_t pick = uniform_int(i, size - 1);
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick)]);
    }
    pool.resize(static_cast<std::size_t>(count));
    return pool;
}

std::vector<Index> Stream::permutation(Index n)
{
    std::vector<Index> out;
    for (std::int64_t v : sample_without_replacement(0, n - 1, n))
    {
        out.push_back(static_cast<Index>(v));
    }
    return out;
}

} // namespace micsel
