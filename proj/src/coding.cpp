#include "micsel/coding.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <unordered_map>

namespace micsel
{

namespace
{

const double ln2 = std::numbers::ln2;

} // namespace

double lg_star(std::int64_t i)
{
    if (i <= 0)
    {
        throw DomainError("lg* is defined for positive integers only");
    }
    double sum = 0.0;
    double term = std::log2(static_cast<double>(i));
    while (term > 0.0)
    {
        sum += term;
        term = std::log2(term);
    }
    return sum;
}

double compute_c_Z(std::int64_t Z)
{
    if (Z < 1)
    {
        throw DomainError("truncation cap Z must be positive");
    }
    static std::mutex mutex;
    static std::unordered_map<std::int64_t, double> cache;
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(Z); it != cache.end())
        {
            return it->second;
        }
    }
    double mass = 0.0;
    for (std::int64_t i = 1; i <= Z; ++i)
    {
        mass += std::exp2(-lg_star(i));
    }
    const double c = std::log2(mass);
    std::lock_guard lock(mutex);
    cache.emplace(Z, c);
    return c;
}

double universal_code_constant()
{
    return std::log2(2.865);
}

double lg_binomial(std::int64_t n, std::int64_t k)
{
    if (k < 0 || k > n)
    {
        throw DomainError("binomial coefficient needs 0 <= k <= n");
    }
    if (k == 0 || k == n)
    {
        return 0.0;
    }
    const double nn = static_cast<double>(n);
    const double kk = static_cast<double>(k);
    return (std::lgamma(nn + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(nn - kk + 1.0)) / ln2;
}

UniversalCodeTable::UniversalCodeTable() : cap_(std::nullopt), constant_(universal_code_constant())
{
}

UniversalCodeTable::UniversalCodeTable(std::int64_t cap) : cap_(cap), constant_(compute_c_Z(cap))
{
}

double UniversalCodeTable::cost(std::int64_t i) const
{
    if (i < 1)
    {
        throw DomainError("universal code covers positive integers only");
    }
    if (cap_ && i > *cap_)
    {
        throw DomainError("integer " + std::to_string(i) + " exceeds code cap " + std::to_string(*cap_));
    }
    return lg_star(i) + constant_;
}

double universal_cost(std::int64_t i, const UniversalCodeTable& table)
{
    return table.cost(i);
}

std::string to_string(SchemeKind kind)
{
    switch (kind)
    {
    case SchemeKind::ric:
        return "ric";
    case SchemeKind::full_mic:
        return "full-mic";
    case SchemeKind::partial_mic:
        return "partial-mic";
    }
    return "?";
}

SchemeKind scheme_from_string(const std::string& name)
{
    if (name == "ric")
        return SchemeKind::ric;
    if (name == "full-mic" || name == "full")
        return SchemeKind::full_mic;
    if (name == "partial-mic" || name == "partial")
        return SchemeKind::partial_mic;
    throw DomainError("unknown coding scheme '" + name + "' (expected ric, full-mic or partial-mic)");
}

void CodingScheme::validate() const
{
    if (!(bits_per_coefficient >= 0.0) || !std::isfinite(bits_per_coefficient))
    {
        throw DomainError("bits_per_coefficient must be a finite nonnegative number");
    }
    if (m < 1)
    {
        throw DomainError("coding scheme needs m >= 1");
    }
    if (h < 1)
    {
        throw DomainError("coding scheme needs h >= 1");
    }
}

double feature_model_cost(const CodingScheme& scheme, std::int64_t k)
{
    scheme.validate();
    if (k < 0 || k > scheme.h)
    {
        throw DomainError("response count k=" + std::to_string(k) + " outside [0, h=" + std::to_string(scheme.h) +
                          "]");
    }
    if (k == 0)
    {
        return 0.0;
    }
    const double lg_m = std::log2(static_cast<double>(scheme.m));
    const double bpc = scheme.bits_per_coefficient;
    switch (scheme.kind)
    {
    case SchemeKind::ric:
        return static_cast<double>(k) * (lg_m + bpc);
    case SchemeKind::full_mic:
        return lg_m + bpc * static_cast<double>(scheme.h);
    case SchemeKind::partial_mic:
        return lg_m + lg_star(k) + compute_c_Z(scheme.h) + lg_binomial(scheme.h, k) +
               bpc * static_cast<double>(k);
    }
    return 0.0;
}

double residual_cost_single(double rss_prev, double rss_new, std::int64_t n)
{
    if (n < 2)
    {
        throw DomainError("residual cost needs n >= 2");
    }
    if (!(rss_prev > 0.0))
    {
        throw DegenerateInputError("previous model fits perfectly (rss_prev = 0); the Gaussian code degenerates");
    }
    if (rss_new < 0.0)
    {
        throw DomainError("rss_new must be nonnegative");
    }
    const double nn = static_cast<double>(n);
    return nn / (2.0 * ln2) * (std::log(2.0 * std::numbers::pi * rss_prev / nn) + rss_new / rss_prev);
}

std::string to_string(CovSpec spec)
{
    switch (spec.mode)
    {
    case CovMode::diagonal:
        return "diagonal";
    case CovMode::full:
        return "full";
    case CovMode::shrunken:
        return "shrunken(" + std::to_string(spec.lambda) + ")";
    }
    return "?";
}

CovSpec cov_from_string(const std::string& name, double lambda)
{
    if (name == "diagonal" || name == "diag")
        return {CovMode::diagonal, 1.0};
    if (name == "full")
        return {CovMode::full, 0.0};
    if (name == "shrunken")
    {
        if (!(lambda >= 0.0 && lambda <= 1.0))
        {
            throw DomainError("shrinkage lambda must lie in [0, 1]");
        }
        return {CovMode::shrunken, lambda};
    }
    throw DomainError("unknown covariance mode '" + name + "' (expected diagonal, full or shrunken)");
}

NoiseCovEstimate estimate_noise_cov(const Matrix& residuals_prev, CovSpec spec)
{
    const Index n = residuals_prev.rows();
    if (n < 1)
    {
        throw DomainError("no residual rows");
    }
    if (spec.mode == CovMode::shrunken && !(spec.lambda >= 0.0 && spec.lambda <= 1.0))
    {
        throw DomainError("shrinkage lambda must lie in [0, 1]");
    }
    Matrix full = residuals_prev.transpose() * residuals_prev / static_cast<double>(n);
    for (Index r = 0; r < full.rows(); ++r)
    {
        if (!(full(r, r) > 0.0))
        {
            throw DegenerateInputError("response " + std::to_string(r) + " has zero residual variance");
        }
    }
    NoiseCovEstimate est{spec, {}};
    switch (spec.mode)
    {
    case CovMode::diagonal:
        est.matrix = full.diagonal().asDiagonal();
        break;
    case CovMode::full:
        est.matrix = std::move(full);
        break;
    case CovMode::shrunken:
    {
        const Matrix diag = full.diagonal().asDiagonal();
        est.matrix = spec.lambda * diag + (1.0 - spec.lambda) * full;
        break;
    }
    }
    return est;
}

double residual_cost_multi(const Matrix& residuals, const NoiseCovEstimate& cov)
{
    const Index n = residuals.rows();
    const Index h = residuals.cols();
    if (cov.matrix.rows() != h || cov.matrix.cols() != h)
    {
        throw DomainError("covariance dimension does not match residual columns");
    }
    const double two_pi = 2.0 * std::numbers::pi;
    if (cov.spec.mode == CovMode::diagonal)
    {
        double total = 0.0;
        for (Index r = 0; r < h; ++r)
        {
            const double var = cov.matrix(r, r);
            if (!(var > 0.0))
            {
                throw SingularDesignError("noise covariance is singular; shrink toward the diagonal");
            }
            total += static_cast<double>(n) * std::log(two_pi * var) + residuals.col(r).squaredNorm() / var;
        }
        return total / (2.0 * ln2);
    }
    Eigen::LLT<Matrix> llt(cov.matrix);
    if (llt.info() != Eigen::Success)
    {
        throw SingularDesignError("noise covariance is not positive definite; shrink toward the diagonal");
    }
    const auto& l = llt.matrixL();
    double log_det = 0.0;
    for (Index r = 0; r < h; ++r)
    {
        log_det += 2.0 * std::log(llt.matrixLLT()(r, r));
    }
    // sum_i r_i' S^-1 r_i = || L^-1 R' ||_F^2
    const Matrix whitened = l.solve(residuals.transpose());
    const double quad = whitened.squaredNorm();
    const double nn = static_cast<double>(n);
    return (nn * (static_cast<double>(h) * std::log(two_pi) + log_det) + quad) / (2.0 * ln2);
}

} // namespace micsel
