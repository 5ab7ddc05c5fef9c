#ifndef MICSEL_REGRESSION_HPP
#define MICSEL_REGRESSION_HPP

// Stepwise MDL feature selection over several responses at once.

#include "micsel/coding.hpp"
#include "micsel/linalg.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace micsel
{

using SupportMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// p x h coefficients (row 0 is the intercept) plus the support of the
/// non-intercept rows. Values are per-response OLS refits on the support.
class CoefficientMatrix
{
public:
    CoefficientMatrix() = default;
    CoefficientMatrix(Index p, Index h);

    /// OLS refit of every response on {intercept} and its features in `support`.
    /// Row 0 of the mask is ignored.
    static CoefficientMatrix refit(const Matrix& x, const Matrix& y, const SupportMask& support);

    Index rows() const { return values_.rows(); }
    Index responses() const { return values_.cols(); }
    const Matrix& values() const { return values_; }
    const SupportMask& support_mask() const { return mask_; }

    bool nonzero(Index feature, Index response) const { return feature > 0 && mask_(feature, response); }
    double value(Index feature, Index response) const { return values_(feature, response); }
    double intercept(Index response) const { return values_(0, response); }

    /// Number of responses in which `feature` is nonzero.
    std::int64_t response_count(Index feature) const;
    /// Selected features of one response, ascending, intercept excluded.
    std::vector<Index> features_for(Index response) const;
    /// Features nonzero in at least one response, ascending.
    std::vector<Index> selected_features() const;

    struct Entry
    {
        Index feature;
        Index response;
        double value;
    };
    /// Nonzero (feature, response) pairs ordered by feature, then response.
    std::vector<Entry> support() const;
    std::size_t support_size() const { return static_cast<std::size_t>(mask_.count()); }

    /// X * beta.
    Matrix predict(const Matrix& x) const;

    /// Sets one coefficient; a non-intercept entry joins the support.
    void set(Index feature, Index response, double value);

private:
    Matrix values_;
    SupportMask mask_;
};

struct LedgerStep
{
    Index feature = 0;
    std::vector<Index> responses;
    double dl_before = 0.0;
    double dl_after = 0.0;
    double residual_before = 0.0;
    double residual_after = 0.0;
    double model_before = 0.0;
    double model_after = 0.0;
};

struct SearchStats
{
    /// Candidate (feature, subset) description lengths computed.
    std::int64_t evaluations = 0;
    /// Subset sizes skipped because the lower bound could not beat the best so far.
    std::int64_t bound_skips = 0;
    /// Candidate features dropped by the top-t prefilter, summed over steps.
    std::int64_t prefiltered = 0;
};

struct SelectionLedger
{
    std::vector<LedgerStep> steps;
    /// Collinear candidates, frozen responses and similar events.
    std::vector<std::string> notes;
    SearchStats stats;
    /// Description length of the final model under the last covariance estimate.
    double final_dl = 0.0;
};

struct SearchConfig
{
    CodingScheme scheme;
    CovSpec cov;
    /// Features kept for the response-subset search (partial MIC only).
    Index top_t = 75;
    /// Cap on the number of features in any single response's model.
    /// Unset means min(n / 2, m).
    std::optional<Index> max_steps;
    bool prefilter = true;
    bool short_circuit = true;
    /// Lets a partial-MIC feature already in the model extend its response subset.
    bool allow_extension = true;
    /// Use the OpenMP candidate kernel; false runs the serial reference.
    bool parallel = true;

    void validate() const;
};

struct Selection
{
    CoefficientMatrix beta;
    SelectionLedger ledger;
};

/// Residual code of Y - X beta under `cov` plus the model cost of beta's support.
double description_length(const Matrix& x, const Matrix& y, const CoefficientMatrix& beta,
                          const NoiseCovEstimate& cov, const CodingScheme& scheme);

/// Sum over features of feature_model_cost(scheme, k_j).
double model_cost(const CoefficientMatrix& beta, const CodingScheme& scheme);

/// Residual code of Y - X beta under `cov`.
double residual_cost_multi(const Matrix& x, const Matrix& y, const CoefficientMatrix& beta,
                           const NoiseCovEstimate& cov);

struct SubsetChoice
{
    /// Ascending response indices; empty when no subset lowers the description length.
    std::vector<Index> responses;
    /// Total description length of the model with the chosen subset added.
    double bits = 0.0;
};

/// Greedy response-subset search for one partial-MIC candidate feature, walked
/// all the way to k = h; returns the best prefix.
SubsetChoice best_response_subset(const Matrix& x, const Matrix& y, const CoefficientMatrix& beta_current,
                                  Index candidate_feature, const NoiseCovEstimate& cov,
                                  const CodingScheme& scheme);

/// Greedy forward selection: add the feature (with its response subset) that
/// most lowers the total description length until none does.
Selection stepwise_select(const Matrix& x, const Matrix& y, const SearchConfig& config);

struct ResponseClassifier
{
    std::vector<Index> features;
    /// Logistic coefficients over {intercept} and `features`.
    Vector coefficients;
    /// Single-class training labels: predict the majority label.
    bool majority_only = false;
    double majority_label = 0.0;
    bool separated = false;
};

struct ClassifierSet
{
    Selection selection;
    std::vector<ResponseClassifier> models;

    /// 0/1 predictions, threshold 0.5 on the fitted probability.
    Matrix predict(const Matrix& x) const;
};

/// Stepwise selection on 0/1 responses followed by a logistic refit per response.
ClassifierSet classify_pipeline(const Matrix& x, const Matrix& y_binary, const SearchConfig& config);

} // namespace micsel

#endif // MICSEL_REGRESSION_HPP
