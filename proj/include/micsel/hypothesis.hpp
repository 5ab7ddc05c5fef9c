#ifndef MICSEL_HYPOTHESIS_HPP
#define MICSEL_HYPOTHESIS_HPP

// Multiple-testing selection: classical p-value thresholds and the
// description-length tests that charge for feature indices and response subsets.
//
// Feature indices follow the design convention used everywhere else: column 0
// of X is the intercept, features are 1..m. Row j-1 of a p-value matrix
// belongs to feature j.

#include "micsel/coding.hpp"
#include "micsel/linalg.hpp"
#include "micsel/regression.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace micsel
{

struct PValueMatrix
{
    /// m x h, entries in [0, 1].
    Matrix p;
    /// Features (1-based) whose column is constant; their row is all ones.
    std::vector<Index> constant_features;

    Index features() const { return p.rows(); }
    Index responses() const { return p.cols(); }
};

struct HypothesisResult
{
    std::string procedure;
    /// Selected (feature, response) pairs, ordered by feature then response.
    std::vector<std::pair<Index, Index>> support;
    /// Bits saved per feature (index j-1), where the procedure defines them.
    std::vector<double> scores;
    std::optional<double> alpha;
    std::optional<SchemeKind> scheme;
    /// Number of features kept by the second phase of bh_mic.
    std::optional<Index> q_star;

    /// p x h mask with row 0 (intercept) false.
    SupportMask mask(Index m, Index h) const;
    std::vector<Index> selected_features() const;
};

/// Slope p-value of every (feature, response) pair, each from its own
/// regression on that feature and an intercept. X carries the intercept in column 0.
PValueMatrix pvalue_matrix(const Matrix& x, const Matrix& y, bool parallel = true);

/// Per response: p <= alpha / m. The matrix variant uses alpha / (m h) over all cells.
HypothesisResult bonferroni_select(const PValueMatrix& p, double alpha);
HypothesisResult bonferroni_matrix_select(const PValueMatrix& p, double alpha);

/// Benjamini-Hochberg step-up, per response over m values or, in matrix
/// mode, once over all m h values.
HypothesisResult bh_select(const PValueMatrix& p, double alpha, bool matrix_mode);

/// One description-length decision per feature against the intercept-only
/// model, charging lg m for the index. Diagonal noise only.
HypothesisResult bonferroni_mic(const Matrix& x, const Matrix& y, const CodingScheme& scheme,
                                CovSpec cov = {});

/// Per-feature bits saved without the index cost, then one more code for how
/// many and which features survive.
HypothesisResult bh_mic(const Matrix& x, const Matrix& y, const CodingScheme& scheme, CovSpec cov = {});

/// Per feature and response, bits saved by a single-feature fit against the
/// intercept-only model with variance TSS/n: n r^2 / (2 ln 2) in the diagonal case.
Matrix feature_gains(const Matrix& x, const Matrix& y);

/// chi-square(dof) upper tail at (2 ln 2) delta_c.
double implied_alpha(double delta_c, int dof);

/// chi-square(dof) upper tail at (2 ln 2) neg_lg_lambda.
double lambda_to_pvalue(double neg_lg_lambda, int dof);

} // namespace micsel

#endif // MICSEL_HYPOTHESIS_HPP
