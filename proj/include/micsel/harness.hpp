#ifndef MICSEL_HARNESS_HPP
#define MICSEL_HARNESS_HPP

// Experiments: run selection methods on generated instances and aggregate
// precision, recall and test error over replicates.

#include "micsel/hypothesis.hpp"
#include "micsel/regression.hpp"
#include "micsel/synthgen.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace micsel
{

struct MetricReport
{
    /// Per response; root mean squared error for regression, 0/1 error rate for classification.
    std::vector<double> test_error;
    std::vector<double> train_error;

    /// Pooled over all responses; absent when nothing is selected.
    std::optional<double> coeff_precision;
    double coeff_recall = 0.0;
    std::optional<double> feat_precision;
    double feat_recall = 0.0;
    Index n_coeff_selected = 0;
    Index n_feat_selected = 0;

    /// Per response coefficient precision and recall (absent when undefined).
    std::vector<std::optional<double>> response_precision;
    std::vector<std::optional<double>> response_recall;

    std::vector<std::string> notes;
};

/// Coefficient- and feature-level precision and recall of a selected support
/// against the true one. Both masks are p x h with row 0 the intercept.
MetricReport score_selection(const SupportMask& selected, const SupportMask& truth);
MetricReport score_selection(const CoefficientMatrix& beta_hat, const CoefficientMatrix& beta_true);

/// OLS refit per response on the training data over {intercept} and its
/// selected features; returns sqrt(SSE / n) on the evaluation data. Features
/// that make the refit rank deficient are dropped and noted.
std::vector<double> regression_test_error(const Matrix& x_eval, const Matrix& y_eval, const Matrix& x_train,
                                          const Matrix& y_train, const SupportMask& support,
                                          std::vector<std::string>* notes = nullptr);

/// Fraction of misclassified entries per response.
std::vector<double> classification_test_error(const ClassifierSet& models, const Matrix& x_test,
                                              const Matrix& y_test_binary);

/// Logistic refit per response on a fixed support.
ClassifierSet fit_classifiers(const Matrix& x, const Matrix& y_binary, const SupportMask& support);

enum class MethodKind
{
    truth,
    partial_mic,
    full_mic,
    ric,
    bonf_mic,
    bh_mic,
    bonferroni,
    bonferroni_matrix,
    bh,
    bh_matrix
};

std::string to_string(MethodKind kind);
MethodKind method_from_string(const std::string& name);

struct MethodSpec
{
    MethodKind kind = MethodKind::partial_mic;
    /// alpha for p-value methods, bits per coefficient for the description-length methods.
    std::optional<double> param;
    CovSpec cov;
    Index top_t = 75;

    /// e.g. "bonferroni(alpha=0.05)" or "ric(bpc=0.1)".
    std::string label() const;
    /// The parameter in effect (defaults filled in).
    double effective_param() const;
    void validate() const;
};

enum class TaskKind
{
    regression,
    classification
};

std::string to_string(TaskKind kind);
TaskKind task_from_string(const std::string& name);

struct YeastPlan
{
    YeastSimSpec spec;
    YeastSources sources;
};

struct ExperimentPlan
{
    std::variant<ScenarioSpec, YeastPlan> generator;
    std::vector<MethodSpec> methods;
    int replicates = 5;
    /// Overrides the generator's test size when set.
    std::optional<Index> test_size;
    TaskKind task = TaskKind::regression;
    std::uint64_t seed = 1;

    void validate() const;
};

struct Aggregate
{
    double mean = 0.0;
    double stderr_ = 0.0;
    /// Cells that contributed.
    Index count = 0;
    /// Cells where the metric was undefined or the replicate failed.
    Index missing = 0;
};

struct MethodRun
{
    std::string label;
    /// One entry per replicate; absent when the method failed there.
    std::vector<std::optional<MetricReport>> replicates;
    std::vector<std::string> failures;
    std::map<std::string, Aggregate> metrics;
};

struct ExperimentResult
{
    std::vector<MethodRun> runs;
    std::vector<std::uint64_t> replicate_seeds;
};

/// Metric names in table order.
const std::vector<std::string>& metric_names();

/// Generates each replicate once and runs every method on it. Errors and
/// coefficient metrics are averaged over response x replicate cells, feature
/// metrics and counts over replicates; stderr = sd / sqrt(cells).
ExperimentResult run_experiment(const ExperimentPlan& plan);

/// Mean and standard error over the defined values.
Aggregate aggregate(const std::vector<std::optional<double>>& values);

struct SweepResult
{
    double chosen = 0.0;
    std::optional<double> chosen_precision;
    std::optional<double> reference_precision;
    /// No grid point had precision at or below the reference.
    bool flagged = false;
    std::vector<double> grid;
    std::vector<std::optional<double>> precisions;
    ExperimentResult experiment;
};

/// Runs the reference method and the sweep method at every grid value on the
/// same instances, then picks the grid value with the highest mean
/// coefficient precision not above the reference's.
SweepResult precision_matched_sweep(const ExperimentPlan& plan, const MethodSpec& reference,
                                    const MethodSpec& sweep, const std::vector<double>& grid);

/// The pick rule on its own: largest precision <= reference (first on ties);
/// otherwise the smallest precision, flagged.
std::pair<std::size_t, bool> pick_matched(const std::vector<std::optional<double>>& precisions, double reference);

/// Row index sets of K contiguous test folds over a (optionally shuffled) order.
std::vector<std::vector<Index>> kfold_indices(Index n, int k, bool shuffle, std::uint64_t seed);

struct CvResult
{
    /// Per fold, per response test error.
    std::vector<std::vector<double>> fold_errors;
    Aggregate error;
};

/// K-fold cross-validated regression error of one method on real data.
CvResult cross_validate(const Matrix& x, const Matrix& y, const MethodSpec& method, int k, bool shuffle,
                        std::uint64_t seed);

/// Applies a method to training data and returns its selected support.
/// `truth` is required for MethodKind::truth; `pvalues` is reused when given.
SupportMask select_support(const MethodSpec& method, const Matrix& x, const Matrix& y,
                           const CoefficientMatrix* truth = nullptr, const PValueMatrix* pvalues = nullptr,
                           SelectionLedger* ledger = nullptr);

} // namespace micsel

#endif // MICSEL_HARNESS_HPP
