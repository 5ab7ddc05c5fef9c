#ifndef MICSEL_CODING_HPP
#define MICSEL_CODING_HPP

// Idealized code lengths, in bits, for MDL model selection.
//
// Nothing here produces a bitstream: every function returns the length an
// ideal prefix code would spend, with ceilings dropped.

#include "micsel/linalg.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace micsel
{

/// lg* i = lg i + lg lg i + ... summed while the terms stay positive. lg*(1) = 0.
double lg_star(std::int64_t i);

/// Normalizer of the universal code truncated at Z:
/// sum_{i=1..Z} 2^-(lg* i + c_Z) = 1, i.e. c_Z = lg sum_{i<=Z} 2^-lg* i.
/// Values are cached per Z; safe to call concurrently.
double compute_c_Z(std::int64_t Z);

/// Constant of the untruncated universal code, lg 2.865.
double universal_code_constant();

/// lg C(n, k) through log-gamma; exactly 0 for k = 0 and k = n.
double lg_binomial(std::int64_t n, std::int64_t k);

/// Universal integer code, either untruncated or capped at Z.
class UniversalCodeTable
{
public:
    /// Untruncated code (Z = infinity), constant lg 2.865.
    UniversalCodeTable();
    explicit UniversalCodeTable(std::int64_t cap);

    std::optional<std::int64_t> cap() const { return cap_; }
    double constant() const { return constant_; }

    /// lg* i + constant; i must lie in [1, Z].
    double cost(std::int64_t i) const;

private:
    std::optional<std::int64_t> cap_;
    double constant_;
};

double universal_cost(std::int64_t i, const UniversalCodeTable& table);

enum class SchemeKind
{
    ric,
    full_mic,
    partial_mic
};

std::string to_string(SchemeKind kind);
SchemeKind scheme_from_string(const std::string& name);

struct CodingScheme
{
    SchemeKind kind = SchemeKind::partial_mic;
    double bits_per_coefficient = 2.0;
    /// Number of selectable features; lg m is the cost of naming one.
    std::int64_t m = 1;
    /// Number of responses.
    std::int64_t h = 1;

    void validate() const;
};

/// Bits to code one feature that is nonzero in k responses.
///   partial: lg m + lg* k + c_h + lg C(h,k) + bpc k
///   full:    lg m + bpc h
///   ric:     k (lg m + bpc)
/// k = 0 costs nothing under every scheme.
double feature_model_cost(const CodingScheme& scheme, std::int64_t k);

/// Single-response residual code with the variance taken from the previous model:
/// n / (2 ln 2) [ ln(2 pi rss_prev / n) + rss_new / rss_prev ].
double residual_cost_single(double rss_prev, double rss_new, std::int64_t n);

enum class CovMode
{
    diagonal,
    full,
    shrunken
};

struct CovSpec
{
    CovMode mode = CovMode::diagonal;
    /// Weight on the diagonal part, used by shrunken mode only.
    double lambda = 1.0;
};

std::string to_string(CovSpec spec);
CovSpec cov_from_string(const std::string& name, double lambda);

/// h x h residual covariance estimate.
struct NoiseCovEstimate
{
    CovSpec spec;
    Matrix matrix;
};

/// Maximum-likelihood covariance (divide by n) of residuals from the model
/// WITHOUT the candidate feature, then reduced per spec. A zero variance
/// column raises DegenerateInputError.
NoiseCovEstimate estimate_noise_cov(const Matrix& residuals_prev, CovSpec spec);

/// 1/(2 ln 2) [ n ln((2 pi)^h |S|) + sum_i r_i' S^-1 r_i ] for candidate residual rows r_i.
/// A covariance that is not positive definite raises SingularDesignError.
double residual_cost_multi(const Matrix& residuals, const NoiseCovEstimate& cov);

} // namespace micsel

#endif // MICSEL_CODING_HPP
