#include "micsel/harness.hpp"

#include "micsel/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace micsel
{

namespace
{

std::optional<double> ratio(Index num, Index den)
{
    if (den == 0)
    {
        return std::nullopt;
    }
    return static_cast<double>(num) / static_cast<double>(den);
}

std::string format_param(double v)
{
    std::ostringstream os;
    os << v;
    return os.str();
}

bool is_pvalue_method(MethodKind k)
{
    return k == MethodKind::bonferroni || k == MethodKind::bonferroni_matrix || k == MethodKind::bh ||
           k == MethodKind::bh_matrix;
}

// Columns {0} plus the selected features of response r whose refit stays full
// rank; dropped features are reported through `notes`.
std::vector<Index> refit_columns(const Matrix& x_train, const SupportMask& support, Index r,
                                 std::vector<std::string>* notes)
{
    std::vector<Index> cols{0};
    for (Index j = 1; j < support.rows(); ++j)
    {
        if (!support(j, r))
        {
            continue;
        }
        cols.push_back(j);
        if (static_cast<Index>(cols.size()) > x_train.rows())
        {
            cols.pop_back();
            if (notes)
                notes->push_back("response " + std::to_string(r) + ": feature " + std::to_string(j) +
                                 " dropped, more features than observations");
            continue;
        }
        Eigen::ColPivHouseholderQR<Matrix> qr(select_columns(x_train, cols));
        qr.setThreshold(1e-10);
        if (qr.rank() < static_cast<Index>(cols.size()))
        {
            cols.pop_back();
            if (notes)
                notes->push_back("response " + std::to_string(r) + ": feature " + std::to_string(j) +
                                 " dropped, collinear in the refit");
        }
    }
    return cols;
}

struct Instance
{
    SyntheticInstance data;
    SyntheticInstance fit_data; // binarized copy for classification
};

SyntheticInstance make_instance(const ExperimentPlan& plan, std::uint64_t seed)
{
    if (const auto* s = std::get_if<ScenarioSpec>(&plan.generator))
    {
        ScenarioSpec spec = *s;
        spec.seed = seed;
        if (plan.test_size)
            spec.n_test = *plan.test_size;
        return gen_scenario(spec);
    }
    const YeastPlan& y = std::get<YeastPlan>(plan.generator);
    YeastSimSpec spec = y.spec;
    spec.seed = seed;
    if (plan.test_size)
        spec.n_test = *plan.test_size;
    return gen_yeast_sim(spec, y.sources);
}

void push_cells(std::vector<std::optional<double>>& cells, const std::vector<double>& values)
{
    cells.insert(cells.end(), values.begin(), values.end());
}

} // namespace

MetricReport score_selection(const SupportMask& selected, const SupportMask& truth)
{
    if (selected.rows() != truth.rows() || selected.cols() != truth.cols())
    {
        throw DomainError("selected and true supports have different shapes");
    }
    const Index p = selected.rows();
    const Index h = selected.cols();
    const SupportMask sel = selected.bottomRows(p - 1);
    const SupportMask tru = truth.bottomRows(p - 1);

    MetricReport rep;
    const Index tp = (sel && tru).count();
    rep.n_coeff_selected = sel.count();
    rep.coeff_precision = ratio(tp, rep.n_coeff_selected);
    rep.coeff_recall = ratio(tp, tru.count()).value_or(0.0);

    const auto sel_rows = sel.rowwise().any();
    const auto tru_rows = tru.rowwise().any();
    const Index ftp = (sel_rows && tru_rows).count();
    rep.n_feat_selected = sel_rows.count();
    rep.feat_precision = ratio(ftp, rep.n_feat_selected);
    rep.feat_recall = ratio(ftp, tru_rows.count()).value_or(0.0);

    for (Index r = 0; r < h; ++r)
    {
        const Index rtp = (sel.col(r) && tru.col(r)).count();
        rep.response_precision.push_back(ratio(rtp, sel.col(r).count()));
        rep.response_recall.push_back(ratio(rtp, tru.col(r).count()));
    }
    return rep;
}

MetricReport score_selection(const CoefficientMatrix& beta_hat, const CoefficientMatrix& beta_true)
{
    return score_selection(beta_hat.support_mask(), beta_true.support_mask());
}

std::vector<double> regression_test_error(const Matrix& x_eval, const Matrix& y_eval, const Matrix& x_train,
                                          const Matrix& y_train, const SupportMask& support,
                                          std::vector<std::string>* notes)
{
    if (x_eval.cols() != x_train.cols() || y_eval.cols() != y_train.cols() || support.rows() != x_train.cols() ||
        support.cols() != y_train.cols())
    {
        throw DomainError("train, evaluation and support shapes disagree");
    }
    std::vector<double> out;
    for (Index r = 0; r < y_train.cols(); ++r)
    {
        const std::vector<Index> cols = refit_columns(x_train, support, r, notes);
        const OlsFit fit = ols_fit(select_columns(x_train, cols), y_train.col(r));
        const Vector resid = y_eval.col(r) - select_columns(x_eval, cols) * fit.coefficients;
        out.push_back(std::sqrt(resid.squaredNorm() / static_cast<double>(y_eval.rows())));
    }
    return out;
}

ClassifierSet fit_classifiers(const Matrix& x, const Matrix& y_binary, const SupportMask& support)
{
    ClassifierSet out;
    for (Index r = 0; r < y_binary.cols(); ++r)
    {
        ResponseClassifier m;
        const std::vector<Index> cols = refit_columns(x, support, r, &out.selection.ledger.notes);
        m.features.assign(cols.begin() + 1, cols.end());
        const double ones = y_binary.col(r).sum();
        m.majority_label = 2.0 * ones >= double(y_binary.rows()) ? 1.0 : 0.0;
        if (ones == 0.0 || ones == double(y_binary.rows()))
        {
            m.majority_only = true;
        }
        else
        {
            const LogisticFit fit = logistic_refit(select_columns(x, cols), y_binary.col(r));
            m.coefficients = fit.coefficients;
            m.separated = fit.separated;
        }
        out.models.push_back(std::move(m));
    }
    return out;
}

std::vector<double> classification_test_error(const ClassifierSet& models, const Matrix& x_test,
                                              const Matrix& y_test_binary)
{
    const Matrix pred = models.predict(x_test);
    if (pred.cols() != y_test_binary.cols() || pred.rows() != y_test_binary.rows())
    {
        throw DomainError("classifier count does not match test responses");
    }
    std::vector<double> out;
    for (Index r = 0; r < pred.cols(); ++r)
    {
        out.push_back((pred.col(r).array() != y_test_binary.col(r).array()).cast<double>().mean());
    }
    return out;
}

std::string to_string(MethodKind kind)
{
    switch (kind)
    {
    case MethodKind::truth:
        return "truth";
    case MethodKind::partial_mic:
        return "partial-mic";
    case MethodKind::full_mic:
        return "full-mic";
    case MethodKind::ric:
        return "ric";
    case MethodKind::bonf_mic:
        return "bonf-mic";
    case MethodKind::bh_mic:
        return "bh-mic";
    case MethodKind::bonferroni:
        return "bonferroni";
    case MethodKind::bonferroni_matrix:
        return "bonferroni-matrix";
    case MethodKind::bh:
        return "bh";
    case MethodKind::bh_matrix:
        return "bh-matrix";
    }
    return "?";
}

MethodKind method_from_string(const std::string& name)
{
    for (MethodKind k : {MethodKind::truth, MethodKind::partial_mic, MethodKind::full_mic, MethodKind::ric,
                         MethodKind::bonf_mic, MethodKind::bh_mic, MethodKind::bonferroni,
                         MethodKind::bonferroni_matrix, MethodKind::bh, MethodKind::bh_matrix})
    {
        if (to_string(k) == name)
        {
            return k;
        }
    }
    if (name == "indep")
        return MethodKind::ric;
    if (name == "partial")
        return MethodKind::partial_mic;
    if (name == "full")
        return MethodKind::full_mic;
    throw DomainError("unknown method '" + name + "'");
}

double MethodSpec::effective_param() const
{
    if (param)
    {
        return *param;
    }
    return is_pvalue_method(kind) ? 0.05 : 2.0;
}

std::string MethodSpec::label() const
{
    std::string out = to_string(kind);
    if (kind == MethodKind::truth)
    {
        return out;
    }
    if (is_pvalue_method(kind))
    {
        return out + "(alpha=" + format_param(effective_param()) + ")";
    }
    std::string tail = "bpc=" + format_param(effective_param());
    if (cov.mode != CovMode::diagonal)
    {
        tail += ",cov=" + to_string(cov);
    }
    return out + "(" + tail + ")";
}

void MethodSpec::validate() const
{
    const double v = effective_param();
    if (is_pvalue_method(kind))
    {
        if (!(v > 0.0))
            throw DomainError("alpha must be positive for " + to_string(kind));
    }
    else if (!(v >= 0.0) || !std::isfinite(v))
    {
        throw DomainError("bits per coefficient must be finite and nonnegative for " + to_string(kind));
    }
    if (top_t < 1)
        throw DomainError("top_t must be at least 1");
}

std::string to_string(TaskKind kind)
{
    return kind == TaskKind::regression ? "regression" : "classification";
}

TaskKind task_from_string(const std::string& name)
{
    if (name == "regression")
        return TaskKind::regression;
    if (name == "classification")
        return TaskKind::classification;
    throw DomainError("unknown task '" + name + "' (expected regression or classification)");
}

void ExperimentPlan::validate() const
{
    if (replicates < 1)
        throw DomainError("replicates must be at least 1");
    if (methods.empty())
        throw DomainError("experiment needs at least one method");
    if (test_size && *test_size < 1)
        throw DomainError("test_size must be positive");
    for (const MethodSpec& m : methods)
    {
        m.validate();
    }
    if (const auto* s = std::get_if<ScenarioSpec>(&generator))
        s->validate();
    else
        std::get<YeastPlan>(generator).spec.validate();
}

SupportMask select_support(const MethodSpec& method, const Matrix& x, const Matrix& y,
                           const CoefficientMatrix* truth, const PValueMatrix* pvalues, SelectionLedger* ledger)
{
    method.validate();
    const Index m = x.cols() - 1;
    const Index h = y.cols();
    const double param = method.effective_param();
    CodingScheme scheme;
    scheme.m = m;
    scheme.h = h;
    scheme.bits_per_coefficient = param;

    auto stepwise = [&](SchemeKind kind) {
        SearchConfig config;
        config.scheme = scheme;
        config.scheme.kind = kind;
        config.cov = method.cov;
        config.top_t = method.top_t;
        Selection sel = stepwise_select(x, y, config);
        if (ledger)
            *ledger = sel.ledger;
        return SupportMask(sel.beta.support_mask());
    };
    auto pvals = [&]() { return pvalues ? *pvalues : pvalue_matrix(x, y); };

    switch (method.kind)
    {
    case MethodKind::truth:
        if (!truth)
            throw DomainError("the truth method needs the true coefficients");
        return truth->support_mask();
    case MethodKind::partial_mic:
        return stepwise(SchemeKind::partial_mic);
    case MethodKind::full_mic:
        return stepwise(SchemeKind::full_mic);
    case MethodKind::ric:
        return stepwise(SchemeKind::ric);
    case MethodKind::bonf_mic:
        scheme.kind = SchemeKind::partial_mic;
        return bonferroni_mic(x, y, scheme, method.cov).mask(m, h);
    case MethodKind::bh_mic:
        scheme.kind = SchemeKind::partial_mic;
        return bh_mic(x, y, scheme, method.cov).mask(m, h);
    case MethodKind::bonferroni:
        return bonferroni_select(pvals(), param).mask(m, h);
    case MethodKind::bonferroni_matrix:
        return bonferroni_matrix_select(pvals(), param).mask(m, h);
    case MethodKind::bh:
        return bh_select(pvals(), param, false).mask(m, h);
    case MethodKind::bh_matrix:
        return bh_select(pvals(), param, true).mask(m, h);
    }
    throw DomainError("unhandled method");
}

const std::vector<std::string>& metric_names()
{
    static const std::vector<std::string> names{"test_error",  "train_error", "coeff_precision", "coeff_recall",
                                                "feat_precision", "feat_recall", "n_coeff",       "n_feat"};
    return names;
}

Aggregate aggregate(const std::vector<std::optional<double>>& values)
{
    Aggregate a;
    double sum = 0.0;
    for (const auto& v : values)
    {
        if (v)
        {
            sum += *v;
            ++a.count;
        }
        else
        {
            ++a.missing;
        }
    }
    if (a.count == 0)
    {
        return a;
    }
    a.mean = sum / static_cast<double>(a.count);
    if (a.count > 1)
    {
        double ss = 0.0;
        for (const auto& v : values)
        {
            if (v)
                ss += (*v - a.mean) * (*v - a.mean);
        }
        a.stderr_ = std::sqrt(ss / static_cast<double>(a.count - 1)) / std::sqrt(static_cast<double>(a.count));
    }
    return a;
}

ExperimentResult run_experiment(const ExperimentPlan& plan)
{
    plan.validate();
    ExperimentResult result;
    for (int i = 0; i < plan.replicates; ++i)
    {
        result.replicate_seeds.push_back(derive_seed(plan.seed, "replicate/" + std::to_string(i)));
    }
    const std::size_t methods = plan.methods.size();
    result.runs.resize(methods);
    for (std::size_t k = 0; k < methods; ++k)
    {
        result.runs[k].label = plan.methods[k].label();
        result.runs[k].replicates.resize(static_cast<std::size_t>(plan.replicates));
    }
    std::vector<std::vector<std::string>> failures(static_cast<std::size_t>(plan.replicates) * methods);

    const bool any_pvalue = std::any_of(plan.methods.begin(), plan.methods.end(),
                                        [](const MethodSpec& m) { return is_pvalue_method(m.kind); });

#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < plan.replicates; ++i)
    {
        const std::size_t rep = static_cast<std::size_t>(i);
        SyntheticInstance inst;
        try
        {
            inst = make_instance(plan, result.replicate_seeds[rep]);
            if (plan.task == TaskKind::classification)
                inst = binarize_instance(inst);
        }
        catch (const std::exception& e)
        {
            for (std::size_t k = 0; k < methods; ++k)
                failures[rep * methods + k].push_back("replicate " + std::to_string(i) + ": " + e.what());
            continue;
        }
        std::optional<PValueMatrix> pvalues;
        if (any_pvalue)
        {
            try
            {
                pvalues = pvalue_matrix(inst.x_train, inst.y_train);
            }
            catch (const std::exception&)
            {
            }
        }
        for (std::size_t k = 0; k < methods; ++k)
        {
            const MethodSpec& method = plan.methods[k];
            try
            {
                const SupportMask support = select_support(method, inst.x_train, inst.y_train, &inst.beta_true,
                                                           pvalues ? &*pvalues : nullptr);
                MetricReport rep_metrics = score_selection(support, inst.beta_true.support_mask());
                if (plan.task == TaskKind::regression)
                {
                    rep_metrics.test_error = regression_test_error(inst.x_test, inst.y_test, inst.x_train,
                                                                   inst.y_train, support, &rep_metrics.notes);
                    rep_metrics.train_error = regression_test_error(inst.x_train, inst.y_train, inst.x_train,
                                                                    inst.y_train, support, nullptr);
                }
                else
                {
                    const ClassifierSet models = fit_classifiers(inst.x_train, inst.y_train, support);
                    rep_metrics.test_error = classification_test_error(models, inst.x_test, inst.y_test);
                    rep_metrics.train_error = classification_test_error(models, inst.x_train, inst.y_train);
                    rep_metrics.notes = models.selection.ledger.notes;
                }
                result.runs[k].replicates[rep] = std::move(rep_metrics);
            }
            catch (const std::exception& e)
            {
                failures[rep * methods + k].push_back("replicate " + std::to_string(i) + ": " + e.what());
            }
        }
    }

    for (std::size_t k = 0; k < methods; ++k)
    {
        MethodRun& run = result.runs[k];
        for (int i = 0; i < plan.replicates; ++i)
        {
            const auto& f = failures[static_cast<std::size_t>(i) * methods + k];
            run.failures.insert(run.failures.end(), f.begin(), f.end());
        }
        std::map<std::string, std::vector<std::optional<double>>> cells;
        for (const auto& rep : run.replicates)
        {
            if (!rep)
            {
                for (const std::string& name : metric_names())
                    cells[name].push_back(std::nullopt);
                continue;
            }
            push_cells(cells["test_error"], rep->test_error);
            push_cells(cells["train_error"], rep->train_error);
            cells["coeff_precision"].insert(cells["coeff_precision"].end(), rep->response_precision.begin(),
                                            rep->response_precision.end());
            cells["coeff_recall"].insert(cells["coeff_recall"].end(), rep->response_recall.begin(),
                                         rep->response_recall.end());
            cells["feat_precision"].push_back(rep->feat_precision);
            cells["feat_recall"].push_back(rep->feat_recall);
            cells["n_coeff"].push_back(static_cast<double>(rep->n_coeff_selected));
            cells["n_feat"].push_back(static_cast<double>(rep->n_feat_selected));
        }
        for (const std::string& name : metric_names())
        {
            run.metrics[name] = aggregate(cells[name]);
        }
    }
    return result;
}

std::pair<std::size_t, bool> pick_matched(const std::vector<std::optional<double>>& precisions, double reference)
{
    std::optional<std::size_t> best;
    std::optional<std::size_t> lowest;
    for (std::size_t i = 0; i < precisions.size(); ++i)
    {
        if (!precisions[i])
            continue;
        const double p = *precisions[i];
        if (p <= reference && (!best || p > *precisions[*best]))
            best = i;
        if (!lowest || p < *precisions[*lowest])
            lowest = i;
    }
    if (best)
        return {*best, false};
    if (lowest)
        return {*lowest, true};
    return {0, true};
}

SweepResult precision_matched_sweep(const ExperimentPlan& plan, const MethodSpec& reference,
                                    const MethodSpec& sweep, const std::vector<double>& grid)
{
    if (grid.empty())
    {
        throw DomainError("sweep grid is empty");
    }
    ExperimentPlan full = plan;
    full.methods = {reference};
    for (double v : grid)
    {
        MethodSpec m = sweep;
        m.param = v;
        full.methods.push_back(m);
    }
    SweepResult out;
    out.grid = grid;
    out.experiment = run_experiment(full);
    auto precision_of = [](const MethodRun& run) -> std::optional<double> {
        const Aggregate& a = run.metrics.at("coeff_precision");
        if (a.count == 0)
            return std::nullopt;
        return a.mean;
    };
    out.reference_precision = precision_of(out.experiment.runs.front());
    for (std::size_t i = 0; i < grid.size(); ++i)
    {
        out.precisions.push_back(precision_of(out.experiment.runs[i + 1]));
    }
    const auto [index, flagged] =
        pick_matched(out.precisions, out.reference_precision.value_or(std::numeric_limits<double>::infinity()));
    out.chosen = grid[index];
    out.chosen_precision = out.precisions[index];
    out.flagged = flagged;
    return out;
}

std::vector<std::vector<Index>> kfold_indices(Index n, int k, bool shuffle, std::uint64_t seed)
{
    if (k < 2 || k > n)
    {
        throw DomainError("K must lie in [2, n]");
    }
    std::vector<Index> order(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i)
        order[static_cast<std::size_t>(i)] = i;
    if (shuffle)
    {
        Stream s(seed, "cv/shuffle");
        order = s.permutation(n);
    }
    std::vector<std::vector<Index>> folds(static_cast<std::size_t>(k));
    for (int f = 0; f < k; ++f)
    {
        const Index lo = n * f / k;
        const Index hi = n * (f + 1) / k;
        folds[static_cast<std::size_t>(f)].assign(order.begin() + lo, order.begin() + hi);
    }
    return folds;
}

CvResult cross_validate(const Matrix& x, const Matrix& y, const MethodSpec& method, int k, bool shuffle,
                        std::uint64_t seed)
{
    if (method.kind == MethodKind::truth)
    {
        throw DomainError("cross-validation has no true support");
    }
    const Index n = x.rows();
    CvResult out;
    std::vector<std::optional<double>> cells;
    for (const std::vector<Index>& test : kfold_indices(n, k, shuffle, seed))
    {
        std::vector<bool> in_test(static_cast<std::size_t>(n), false);
        for (Index i : test)
            in_test[static_cast<std::size_t>(i)] = true;
        std::vector<Index> train;
        for (Index i = 0; i < n; ++i)
            if (!in_test[static_cast<std::size_t>(i)])
                train.push_back(i);
        const Matrix xtr = x(train, Eigen::all);
        const Matrix ytr = y(train, Eigen::all);
        const Matrix xte = x(test, Eigen::all);
        const Matrix yte = y(test, Eigen::all);
        const SupportMask support = select_support(method, xtr, ytr);
        std::vector<double> err = regression_test_error(xte, yte, xtr, ytr, support);
        push_cells(cells, err);
        out.fold_errors.push_back(std::move(err));
    }
    out.error = aggregate(cells);
    return out;
}

} // namespace micsel
