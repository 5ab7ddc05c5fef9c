#ifndef MICSEL_TESTS_ORACLE_HPP
#define MICSEL_TESTS_ORACLE_HPP

// Brute-force description-length search for tiny problems. With a fixed
// diagonal noise covariance the residual code splits by response, so every
// response's cost is tabulated over all 2^m feature subsets and the joint
// optimum is found by enumerating one subset per response.

#include "micsel/coding.hpp"
#include "micsel/regression.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

namespace oracle
{

using micsel::Index;
using micsel::Matrix;
using micsel::Vector;

// Residual sum of squares of y on {intercept} + the features in `bits`, by normal equations.
inline double subset_rss(const Matrix& x, const Vector& y, std::uint32_t bits)
{
    std::vector<Index> cols{0};
    for (Index j = 1; j < x.cols(); ++j)
        if (bits & (1u << (j - 1)))
            cols.push_back(j);
    Matrix d(x.rows(), Index(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c)
        d.col(Index(c)) = x.col(cols[c]);
    const Vector b = (d.transpose() * d).ldlt().solve(d.transpose() * y);
    return (y - d * b).squaredNorm();
}

// Model cost written from the coding rules, independent of feature_model_cost.
inline double model_bits(micsel::SchemeKind kind, double bpc, Index m, Index h, Index k)
{
    if (k == 0)
        return 0.0;
    const double lg_m = std::log2(double(m));
    switch (kind)
    {
    case micsel::SchemeKind::ric:
        return double(k) * (lg_m + bpc);
    case micsel::SchemeKind::full_mic:
        return k == h ? lg_m + bpc * double(h) : std::numeric_limits<double>::infinity();
    case micsel::SchemeKind::partial_mic:
    {
        double lgs = 0.0;
        for (double t = std::log2(double(k)); t > 0.0; t = std::log2(t))
            lgs += t;
        double mass = 0.0;
        for (Index i = 1; i <= h; ++i)
        {
            double l = 0.0;
            for (double t = std::log2(double(i)); t > 0.0; t = std::log2(t))
                l += t;
            mass += std::exp2(-l);
        }
        const double choose = std::lgamma(double(h) + 1) - std::lgamma(double(k) + 1) - std::lgamma(double(h - k) + 1);
        return lg_m + lgs + std::log2(mass) + choose / std::numbers::ln2 + bpc * double(k);
    }
    }
    return 0.0;
}

struct Problem
{
    Index m = 0;
    Index h = 0;
    micsel::SchemeKind kind{};
    double bpc = 2.0;
    // cost[r][bits]: residual bits of response r on subset `bits`
    std::vector<std::vector<double>> cost;
    // model[k]: bits for a feature used by k responses
    std::vector<double> model;

    Problem(const Matrix& x, const Matrix& y, const Vector& variances, micsel::SchemeKind kind_, double bpc_)
        : m(x.cols() - 1), h(y.cols()), kind(kind_), bpc(bpc_)
    {
        const double n = double(x.rows());
        const std::uint32_t subsets = 1u << m;
        cost.assign(std::size_t(h), std::vector<double>(subsets));
        for (Index r = 0; r < h; ++r)
        {
            const double v = variances(r);
            for (std::uint32_t b = 0; b < subsets; ++b)
                cost[std::size_t(r)][b] =
                    (n * std::log(2 * std::numbers::pi * v) + subset_rss(x, y.col(r), b) / v) / (2 * std::numbers::ln2);
        }
        for (Index k = 0; k <= h; ++k)
            model.push_back(model_bits(kind, bpc, m, h, k));
    }

    // Total bits of one support given as a subset mask per response.
    double bits(const std::vector<std::uint32_t>& support) const
    {
        double total = 0.0;
        for (Index r = 0; r < h; ++r)
            total += cost[std::size_t(r)][support[std::size_t(r)]];
        for (Index j = 0; j < m; ++j)
        {
            Index k = 0;
            for (Index r = 0; r < h; ++r)
                k += (support[std::size_t(r)] >> j) & 1u;
            total += model[std::size_t(k)];
        }
        return total;
    }

    double optimum() const
    {
        std::vector<std::uint32_t> s(std::size_t(h), 0);
        double best = bits(s);
        const std::uint32_t subsets = 1u << m;
        while (true)
        {
            Index r = 0;
            while (r < h && ++s[std::size_t(r)] == subsets)
                s[std::size_t(r++)] = 0;
            if (r == h)
                break;
            best = std::min(best, bits(s));
        }
        return best;
    }

    // Largest drop in bits from adding one feature to some set of responses
    // that do not use it yet (positive means the support is not locally optimal).
    double best_single_move(const std::vector<std::uint32_t>& support) const
    {
        const double here = bits(support);
        double best = 0.0;
        for (Index j = 0; j < m; ++j)
        {
            std::uint32_t free = 0;
            for (Index r = 0; r < h; ++r)
                if (!((support[std::size_t(r)] >> j) & 1u))
                    free |= 1u << r;
            for (std::uint32_t t = free; t; t = (t - 1) & free)
            {
                std::vector<std::uint32_t> next = support;
                for (Index r = 0; r < h; ++r)
                    if ((t >> r) & 1u)
                        next[std::size_t(r)] |= 1u << j;
                best = std::max(best, here - bits(next));
            }
        }
        return best;
    }
};

inline std::vector<std::uint32_t> masks_of(const micsel::CoefficientMatrix& beta)
{
    std::vector<std::uint32_t> out(std::size_t(beta.responses()), 0);
    for (const auto& e : beta.support())
        out[std::size_t(e.response)] |= 1u << (e.feature - 1);
    return out;
}

// Diagonal of the residual covariance of the support, the estimate the search stops under.
inline Vector final_variances(const Matrix& x, const Matrix& y, const std::vector<std::uint32_t>& support)
{
    Vector v(y.cols());
    for (Index r = 0; r < y.cols(); ++r)
        v(r) = subset_rss(x, y.col(r), support[std::size_t(r)]) / double(x.rows());
    return v;
}

} // namespace oracle

#endif
