#include "micsel/hypothesis.hpp"

#include "micsel/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace micsel
{

namespace
{

constexpr double tie_eps = 1e-9;

void check_alpha(double alpha)
{
    // Levels of 1 and above are legal: precision-matched sweeps use alpha/m thresholds past 1/m.
    if (!(alpha > 0.0) || !std::isfinite(alpha))
    {
        throw DomainError("alpha must be positive and finite");
    }
}

void sort_support(HypothesisResult& out)
{
    std::sort(out.support.begin(), out.support.end());
}

struct FeatureChoice
{
    std::vector<Index> responses;
    double saved = 0.0;
};

// Best response subset of one feature from its per-response gains, with
// `fixed` bits charged on top of the subset code whenever k > 0.
FeatureChoice choose_subset(const Vector& gains, const CodingScheme& scheme, double fixed)
{
    const Index h = gains.size();
    const double lg_m = std::log2(static_cast<double>(scheme.m));
    FeatureChoice best;
    if (scheme.kind == SchemeKind::full_mic)
    {
        // feature_model_cost already includes lg m
        const double saved = gains.sum() - (feature_model_cost(scheme, h) - lg_m) - fixed;
        if (saved > tie_eps)
        {
            best.saved = saved;
            best.responses.resize(static_cast<std::size_t>(h));
            std::iota(best.responses.begin(), best.responses.end(), Index(0));
        }
        return best;
    }
    std::vector<Index> order(static_cast<std::size_t>(h));
    std::iota(order.begin(), order.end(), Index(0));
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return gains(a) > gains(b); });
    double sum = 0.0;
    Index best_k = 0;
    for (Index k = 1; k <= h; ++k)
    {
        sum += gains(order[static_cast<std::size_t>(k - 1)]);
        const double saved = sum - (feature_model_cost(scheme, k) - lg_m) - fixed;
        if (saved > best.saved + tie_eps)
        {
            best.saved = saved;
            best_k = k;
        }
    }
    best.responses.assign(order.begin(), order.begin() + best_k);
    std::sort(best.responses.begin(), best.responses.end());
    return best;
}

void check_mic_inputs(const Matrix& x, const Matrix& y, const CodingScheme& scheme, CovSpec cov)
{
    scheme.validate();
    if (scheme.kind == SchemeKind::ric)
    {
        throw DomainError("MIC hypothesis tests need the full-mic or partial-mic scheme");
    }
    if (cov.mode != CovMode::diagonal)
    {
        throw DomainError("per-feature MIC tests are defined for diagonal noise covariance only");
    }
    if (x.rows() != y.rows())
    {
        throw DomainError("X and Y row counts differ");
    }
    if (scheme.h != y.cols() || scheme.m != x.cols() - 1)
    {
        throw DomainError("coding scheme dimensions do not match X and Y");
    }
}

} // namespace

SupportMask HypothesisResult::mask(Index m, Index h) const
{
    SupportMask out = SupportMask::Constant(m + 1, h, false);
    for (const auto& [j, r] : support)
    {
        out(j, r) = true;
    }
    return out;
}

std::vector<Index> HypothesisResult::selected_features() const
{
    std::vector<Index> out;
    for (const auto& cell : support)
    {
        if (out.empty() || out.back() != cell.first)
        {
            out.push_back(cell.first);
        }
    }
    return out;
}

PValueMatrix pvalue_matrix(const Matrix& x, const Matrix& y, bool parallel)
{
    if (x.cols() < 2)
    {
        throw DomainError("X needs the intercept column and at least one feature");
    }
    const Matrix features = x.rightCols(x.cols() - 1);
    kernels::PValueResult raw =
        parallel ? kernels::pvalue_matrix_parallel(features, y) : kernels::pvalue_matrix_serial(features, y);
    PValueMatrix out;
    out.p = std::move(raw.p);
    for (Index j : raw.constant_features)
    {
        out.constant_features.push_back(j + 1);
    }
    return out;
}

HypothesisResult bonferroni_select(const PValueMatrix& p, double alpha)
{
    check_alpha(alpha);
    HypothesisResult out;
    out.procedure = "bonferroni";
    out.alpha = alpha;
    const double threshold = alpha / static_cast<double>(p.features());
    for (Index j = 0; j < p.features(); ++j)
    {
        for (Index r = 0; r < p.responses(); ++r)
        {
            if (p.p(j, r) <= threshold)
            {
                out.support.emplace_back(j + 1, r);
            }
        }
    }
    return out;
}

HypothesisResult bonferroni_matrix_select(const PValueMatrix& p, double alpha)
{
    check_alpha(alpha);
    HypothesisResult out;
    out.procedure = "bonferroni-matrix";
    out.alpha = alpha;
    const double threshold = alpha / static_cast<double>(p.features() * p.responses());
    for (Index j = 0; j < p.features(); ++j)
    {
        for (Index r = 0; r < p.responses(); ++r)
        {
            if (p.p(j, r) <= threshold)
            {
                out.support.emplace_back(j + 1, r);
            }
        }
    }
    return out;
}

HypothesisResult bh_select(const PValueMatrix& p, double alpha, bool matrix_mode)
{
    check_alpha(alpha);
    HypothesisResult out;
    out.procedure = matrix_mode ? "bh-matrix" : "bh";
    out.alpha = alpha;

    // Step-up over a list of cells: reject the q smallest where
    // q = max{ i : p_(i) <= i alpha / count }.
    auto step_up = [&](std::vector<std::pair<Index, Index>> cells) {
        const double count = static_cast<double>(cells.size());
        std::stable_sort(cells.begin(), cells.end(), [&](const auto& a, const auto& b) {
            return p.p(a.first, a.second) < p.p(b.first, b.second);
        });
        std::size_t q = 0;
        for (std::size_t i = 0; i < cells.size(); ++i)
        {
            if (p.p(cells[i].first, cells[i].second) <= static_cast<double>(i + 1) * alpha / count)
            {
                q = i + 1;
            }
        }
        for (std::size_t i = 0; i < q; ++i)
        {
            out.support.emplace_back(cells[i].first + 1, cells[i].second);
        }
    };

    if (matrix_mode)
    {
        std::vector<std::pair<Index, Index>> cells;
        for (Index j = 0; j < p.features(); ++j)
        {
            for (Index r = 0; r < p.responses(); ++r)
            {
                cells.emplace_back(j, r);
            }
        }
        step_up(std::move(cells));
    }
    else
    {
        for (Index r = 0; r < p.responses(); ++r)
        {
            std::vector<std::pair<Index, Index>> cells;
            for (Index j = 0; j < p.features(); ++j)
            {
                cells.emplace_back(j, r);
            }
            step_up(std::move(cells));
        }
    }
    sort_support(out);
    return out;
}

Matrix feature_gains(const Matrix& x, const Matrix& y)
{
    if (x.rows() != y.rows())
    {
        throw DomainError("X and Y row counts differ");
    }
    const Matrix features = x.rightCols(x.cols() - 1);
    const Matrix fc = features.rowwise() - features.colwise().mean();
    const Matrix yc = y.rowwise() - y.colwise().mean();
    const Vector sxx = fc.colwise().squaredNorm().transpose();
    const Vector raw = features.colwise().squaredNorm().transpose();
    const Vector syy = yc.colwise().squaredNorm().transpose();
    const Matrix sxy = fc.transpose() * yc;
    const double scale = static_cast<double>(x.rows()) / (2.0 * std::numbers::ln2);
    Matrix gains = Matrix::Zero(features.cols(), y.cols());
    for (Index j = 0; j < features.cols(); ++j)
    {
        if (!(sxx(j) > 0.0) || sxx(j) <= 1e-24 * raw(j))
        {
            continue;
        }
        for (Index r = 0; r < y.cols(); ++r)
        {
            if (syy(r) > 0.0)
            {
                gains(j, r) = scale * std::min(1.0, sxy(j, r) * sxy(j, r) / (sxx(j) * syy(r)));
            }
        }
    }
    return gains;
}

HypothesisResult bonferroni_mic(const Matrix& x, const Matrix& y, const CodingScheme& scheme, CovSpec cov)
{
    check_mic_inputs(x, y, scheme, cov);
    const Matrix gains = feature_gains(x, y);
    const double lg_m = std::log2(static_cast<double>(scheme.m));
    HypothesisResult out;
    out.procedure = "bonf-mic";
    out.scheme = scheme.kind;
    out.scores.assign(static_cast<std::size_t>(scheme.m), 0.0);
    for (Index j = 0; j < gains.rows(); ++j)
    {
        const FeatureChoice c = choose_subset(gains.row(j).transpose(), scheme, lg_m);
        out.scores[static_cast<std::size_t>(j)] = c.saved;
        for (Index r : c.responses)
        {
            out.support.emplace_back(j + 1, r);
        }
    }
    return out;
}

HypothesisResult bh_mic(const Matrix& x, const Matrix& y, const CodingScheme& scheme, CovSpec cov)
{
    check_mic_inputs(x, y, scheme, cov);
    const Matrix gains = feature_gains(x, y);
    const Index m = gains.rows();
    HypothesisResult out;
    out.procedure = "bh-mic";
    out.scheme = scheme.kind;
    out.scores.assign(static_cast<std::size_t>(m), 0.0);
    std::vector<FeatureChoice> choices(static_cast<std::size_t>(m));
    for (Index j = 0; j < m; ++j)
    {
        choices[static_cast<std::size_t>(j)] = choose_subset(gains.row(j).transpose(), scheme, 0.0);
        out.scores[static_cast<std::size_t>(j)] = choices[static_cast<std::size_t>(j)].saved;
    }

    std::vector<Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), Index(0));
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return out.scores[std::size_t(a)] > out.scores[std::size_t(b)]; });

    // Only features that kept some response in the first phase compete.
    const Index q_orig = static_cast<Index>(std::count_if(choices.begin(), choices.end(),
                                                          [](const FeatureChoice& c) { return !c.responses.empty(); }));
    const double c_m = compute_c_Z(m);
    double sum = 0.0;
    double best = 0.0;
    Index q_star = 0;
    for (Index q = 1; q <= q_orig; ++q)
    {
        sum += out.scores[static_cast<std::size_t>(order[static_cast<std::size_t>(q - 1)])];
        const double net = sum - (lg_star(q) + c_m + lg_binomial(m, q));
        if (net > best + tie_eps)
        {
            best = net;
            q_star = q;
        }
    }
    out.q_star = q_star;
    for (Index i = 0; i < q_star; ++i)
    {
        const Index j = order[static_cast<std::size_t>(i)];
        for (Index r : choices[static_cast<std::size_t>(j)].responses)
        {
            out.support.emplace_back(j + 1, r);
        }
    }
    sort_support(out);
    return out;
}

double implied_alpha(double delta_c, int dof)
{
    if (!(delta_c >= 0.0))
    {
        throw DomainError("delta_c must be nonnegative");
    }
    if (dof < 1)
    {
        throw DomainError("degrees of freedom must be positive");
    }
    return chi_square_upper(2.0 * std::numbers::ln2 * delta_c, dof);
}

double lambda_to_pvalue(double neg_lg_lambda, int dof)
{
    if (!(neg_lg_lambda >= 0.0))
    {
        throw DomainError("-lg lambda must be nonnegative");
    }
    if (dof < 1)
    {
        throw DomainError("degrees of freedom must be positive");
    }
    return chi_square_upper(2.0 * std::numbers::ln2 * neg_lg_lambda, dof);
}

} // namespace micsel
