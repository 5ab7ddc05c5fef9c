#ifndef MICSEL_SYNTHGEN_HPP
#define MICSEL_SYNTHGEN_HPP

// Seeded synthetic data: the shared/partially shared/independent sparse
// scenarios and a simulator driven by summary statistics of a real beta.

#include "micsel/linalg.hpp"
#include "micsel/regression.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace micsel
{

enum class ScenarioKind
{
    partial,
    full,
    independent
};

std::string to_string(ScenarioKind kind);
ScenarioKind scenario_from_string(const std::string& name);

struct ScenarioSpec
{
    ScenarioKind kind = ScenarioKind::partial;
    Index m = 2000;
    Index h = 20;
    Index n = 100;
    Index n_test = 10000;
    Index k_per_response = 4;
    /// Variance (not standard deviation) of the noise.
    double noise_var = 0.1;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Train and test data with the intercept in column 0 of both X matrices.
struct SyntheticInstance
{
    Matrix x_train;
    Matrix y_train;
    Matrix x_test;
    Matrix y_test;
    CoefficientMatrix beta_true;
    bool binarized = false;
    /// Columns that were constant when binarized.
    std::vector<Index> constant_columns;
};

/// X and nonzero coefficients iid N(0,1), noise iid N(0, noise_var).
///   full:        features 1..k in every response
///   partial:     features 1-4 in the first h, ceil(3h/4), ceil(h/2), ceil(h/4)
///                responses, the rest of each response's k drawn from 5..m
///   independent: k features per response drawn from 1..m
SyntheticInstance gen_scenario(const ScenarioSpec& spec);

enum class CovVariant
{
    diag,
    half,
    full,
    original_x
};

std::string to_string(CovVariant v);
CovVariant cov_variant_from_string(const std::string& name);

struct YeastSimSpec
{
    Index m = 526;
    Index h = 20;
    Index n = 100;
    Index n_test = 10000;
    double f = 0.05;
    double a = 1.3;
    double mu_beta = -0.12;
    double sigma_beta = 0.20;
    CovVariant cov_variant = CovVariant::diag;
    Index target_nonzeros = 33;
    /// Noise variance used for every response when no Y source is given.
    double noise_var = 4e-4;
    int max_attempts = 1000;
    std::uint64_t seed = 1;

    void validate() const;
};

struct YeastSources
{
    /// Raw features, no intercept column.
    std::optional<Matrix> x;
    std::optional<Matrix> cov;
    /// Responses; their intercept-only residual variances set the noise.
    std::optional<Matrix> y;
};

/// Row-walk beta (coin with probability f per row, Poisson(a) nonzeros capped
/// at h, values N(mu, sigma^2)), redrawn until the count is within 25% of the
/// target; X from a shrunken covariance of the source or the source rows.
SyntheticInstance gen_yeast_sim(const YeastSimSpec& spec, const YeastSources& sources);

struct Binarized
{
    Matrix values;
    std::vector<Index> constant_columns;
};

/// Per column: 1 where the value is at least the column mean, else 0.
/// Constant columns come out all ones and are reported.
Binarized binarize(const Matrix& y);

/// Binarizes train and test responses at the column mean of both sets pooled.
SyntheticInstance binarize_instance(const SyntheticInstance& inst);

} // namespace micsel

#endif // MICSEL_SYNTHGEN_HPP
