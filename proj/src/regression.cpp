#include "micsel/regression.hpp"

#include "micsel/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

namespace micsel
{

namespace
{

constexpr double tie_eps = 1e-9;
constexpr double freeze_ratio = 1e-12;
const double two_ln2 = 2.0 * std::numbers::ln2;

std::vector<Index> with_intercept(const std::vector<Index>& features)
{
    std::vector<Index> cols{0};
    cols.insert(cols.end(), features.begin(), features.end());
    return cols;
}

// x minus its projection on the orthonormal columns of q, two passes.
Vector residualize(const Matrix& q, const Vector& x)
{
    Vector r = x - q * (q.transpose() * x);
    r -= q * (q.transpose() * r);
    return r;
}

// Quadratic form of a candidate feature over its eligible responses:
// adding the feature to subset S changes sum_i r_i' W r_i by
// -2 sum_{r in S} b_r + sum_{r,s in S} H_rs.
struct CandidateForm
{
    Index feature = 0;
    std::vector<Index> responses; // eligible responses, ascending
    Vector b;
    Matrix h;
};

// Mutable search state: per-response orthonormal bases, residuals and
// bookkeeping for frozen or capped responses.
class SearchState
{
public:
    SearchState(const Matrix& x, const Matrix& y, Index cap) : x_(&x), y_(&y), cap_(cap)
    {
        n_ = x.rows();
        p_ = x.cols();
        h_ = y.cols();
        features_.assign(static_cast<std::size_t>(h_), {});
        bases_.assign(static_cast<std::size_t>(h_), Matrix::Constant(n_, 1, 1.0 / std::sqrt(double(n_))));
        in_model_ = SupportMask::Constant(p_, h_, false);
        residuals_ = y.rowwise() - y.colwise().mean();
        tss_ = residuals_.colwise().squaredNorm().transpose();
        frozen_.assign(static_cast<std::size_t>(h_), false);
        for (Index r = 0; r < h_; ++r)
        {
            check_frozen(r);
        }
    }

    const Matrix& x() const { return *x_; }
    Index n() const { return n_; }
    Index p() const { return p_; }
    Index h() const { return h_; }
    const Matrix& residuals() const { return residuals_; }
    const std::vector<Matrix>& bases() const { return bases_; }
    const SupportMask& in_model() const { return in_model_; }
    bool frozen(Index r) const { return frozen_[static_cast<std::size_t>(r)]; }
    const std::vector<std::string>& notes() const { return notes_; }

    std::int64_t k(Index j) const { return in_model_.row(j).count(); }

    // Responses whose residuals enter the code.
    std::vector<Index> coded() const
    {
        std::vector<Index> out;
        for (Index r = 0; r < h_; ++r)
        {
            if (!frozen(r))
            {
                out.push_back(r);
            }
        }
        return out;
    }

    // Responses that may still receive features.
    std::vector<bool> open() const
    {
        std::vector<bool> out(static_cast<std::size_t>(h_));
        for (Index r = 0; r < h_; ++r)
        {
            out[static_cast<std::size_t>(r)] =
                !frozen(r) && static_cast<Index>(features_[static_cast<std::size_t>(r)].size()) < cap_;
        }
        return out;
    }

    // Returns false when x_j is collinear with response r's design.
    bool add(Index j, Index r)
    {
        Matrix& q = bases_[static_cast<std::size_t>(r)];
        const Vector xr = residualize(q, x_->col(j));
        if (xr.squaredNorm() <= kernels::collinear_tolerance * x_->col(j).squaredNorm())
        {
            return false;
        }
        q.conservativeResize(Eigen::NoChange, q.cols() + 1);
        q.col(q.cols() - 1) = xr.normalized();
        features_[static_cast<std::size_t>(r)].push_back(j);
        in_model_(j, r) = true;
        residuals_.col(r) = residualize(q, y_->col(r));
        check_frozen(r);
        return true;
    }

    void check_frozen(Index r)
    {
        if (frozen(r))
        {
            return;
        }
        const double rss = residuals_.col(r).squaredNorm();
        if (rss <= freeze_ratio * tss_(r))
        {
            frozen_[static_cast<std::size_t>(r)] = true;
            notes_.push_back("response " + std::to_string(r) + " fits exactly; no further features for it");
        }
    }

    void note(std::string text) { notes_.push_back(std::move(text)); }

    double model_cost(const CodingScheme& scheme) const
    {
        double total = 0.0;
        for (Index j = 1; j < p_; ++j)
        {
            total += feature_model_cost(scheme, k(j));
        }
        return total;
    }

    Matrix coded_residuals(const std::vector<Index>& coded) const { return select_columns(residuals_, coded); }

    SupportMask support() const
    {
        SupportMask m = in_model_;
        m.row(0).setConstant(false);
        return m;
    }

private:
    const Matrix* x_;
    const Matrix* y_;
    Index cap_;
    Index n_ = 0, p_ = 0, h_ = 0;
    std::vector<std::vector<Index>> features_;
    std::vector<Matrix> bases_;
    SupportMask in_model_;
    Matrix residuals_;
    Vector tss_;
    std::vector<bool> frozen_;
    std::vector<std::string> notes_;
};

// Noise covariance of the coded responses, its inverse and the code of the
// current residuals under it.
struct CodedCov
{
    std::vector<Index> coded;
    // position of each response within `coded`, -1 when frozen
    std::vector<Index> slot;
    NoiseCovEstimate cov;
    Matrix inverse;
    bool diagonal = true;
};

Matrix covariance_inverse(const NoiseCovEstimate& cov)
{
    if (cov.spec.mode == CovMode::diagonal)
    {
        Vector d = cov.matrix.diagonal();
        if (!(d.array() > 0.0).all())
        {
            throw SingularDesignError("noise covariance is singular; shrink toward the diagonal");
        }
        return d.cwiseInverse().asDiagonal();
    }
    Eigen::LLT<Matrix> llt(cov.matrix);
    if (llt.info() != Eigen::Success)
    {
        throw SingularDesignError("noise covariance is not positive definite; shrink toward the diagonal");
    }
    return llt.solve(Matrix::Identity(cov.matrix.rows(), cov.matrix.cols()));
}

CodedCov make_coded_cov(const SearchState& s, std::vector<Index> coded, NoiseCovEstimate cov)
{
    CodedCov c;
    c.coded = std::move(coded);
    c.slot.assign(static_cast<std::size_t>(s.h()), -1);
    for (std::size_t i = 0; i < c.coded.size(); ++i)
    {
        c.slot[static_cast<std::size_t>(c.coded[i])] = static_cast<Index>(i);
    }
    c.diagonal = cov.spec.mode == CovMode::diagonal;
    c.cov = std::move(cov);
    if (!c.coded.empty())
    {
        c.inverse = covariance_inverse(c.cov);
    }
    return c;
}

CodedCov estimate_coded_cov(const SearchState& s, CovSpec spec)
{
    std::vector<Index> coded = s.coded();
    NoiseCovEstimate cov{spec, Matrix(0, 0)};
    if (!coded.empty())
    {
        cov = estimate_noise_cov(s.coded_residuals(coded), spec);
    }
    return make_coded_cov(s, std::move(coded), std::move(cov));
}

double coded_residual_cost(const SearchState& s, const CodedCov& c)
{
    if (c.coded.empty())
    {
        return 0.0;
    }
    return residual_cost_multi(s.coded_residuals(c.coded), c.cov);
}

// Quadratic forms for the candidate features of one step. The diagonal case
// reads everything off the gain table; otherwise the residual changes are
// built explicitly.
std::vector<CandidateForm> build_forms(const SearchState& s, const CodedCov& c, const kernels::GainTable& gains,
                                       const std::vector<Index>& features, bool parallel)
{
    const Index count = static_cast<Index>(features.size());
    std::vector<CandidateForm> forms(features.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (Index f = 0; f < count; ++f)
    {
        const Index j = features[static_cast<std::size_t>(f)];
        CandidateForm& form = forms[static_cast<std::size_t>(f)];
        form.feature = j;
        for (Index r = 0; r < s.h(); ++r)
        {
            if (gains.status(j, r) == kernels::CellStatus::eligible)
            {
                form.responses.push_back(r);
            }
        }
        const Index k = static_cast<Index>(form.responses.size());
        form.b.resize(k);
        form.h = Matrix::Zero(k, k);
        if (k == 0)
        {
            continue;
        }
        if (c.diagonal)
        {
            for (Index a = 0; a < k; ++a)
            {
                const Index r = form.responses[static_cast<std::size_t>(a)];
                const Index sl = c.slot[static_cast<std::size_t>(r)];
                const double v = gains.delta_rss(j, r) * c.inverse(sl, sl);
                form.b(a) = v;
                form.h(a, a) = v;
            }
            continue;
        }
        // Column a of d is the drop in response a's residual.
        Matrix d(s.n(), k);
        for (Index a = 0; a < k; ++a)
        {
            const Index r = form.responses[static_cast<std::size_t>(a)];
            const Vector xr = residualize(s.bases()[static_cast<std::size_t>(r)], s.x().col(j));
            d.col(a) = (xr.dot(s.residuals().col(r)) / xr.squaredNorm()) * xr;
        }
        const Matrix coded_res = s.coded_residuals(c.coded);
        const Matrix de = d.transpose() * coded_res;
        const Matrix dd = d.transpose() * d;
        for (Index a = 0; a < k; ++a)
        {
            const Index sa = c.slot[static_cast<std::size_t>(form.responses[static_cast<std::size_t>(a)])];
            form.b(a) = c.inverse.row(sa).dot(de.row(a));
            for (Index bi = 0; bi < k; ++bi)
            {
                const Index sb = c.slot[static_cast<std::size_t>(form.responses[static_cast<std::size_t>(bi)])];
                form.h(a, bi) = c.inverse(sa, sb) * dd(a, bi);
            }
        }
    }
    return forms;
}

// Smallest change over all real weightings of the eligible responses; no
// subset can do better. Exact in the diagonal case.
double lower_bound_bits(const CandidateForm& form, bool diagonal)
{
    if (form.responses.empty())
    {
        return 0.0;
    }
    double q = 0.0;
    if (diagonal)
    {
        q = -form.b.sum();
    }
    else
    {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(form.h);
        const Vector& ev = eig.eigenvalues();
        const double tol = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
        const Vector proj = eig.eigenvectors().transpose() * form.b;
        for (Index i = 0; i < ev.size(); ++i)
        {
            if (ev(i) > tol)
            {
                q -= proj(i) * proj(i) / ev(i);
            }
        }
        q -= 1e-9 * (1.0 + std::abs(q));
    }
    return q / two_ln2;
}

// Change in the residual code, in bits, when the feature enters subset `idx`
// (indices into form.responses).
double subset_delta_bits(const CandidateForm& form, const std::vector<Index>& idx)
{
    double q = 0.0;
    for (Index a : idx)
    {
        q -= 2.0 * form.b(a);
        for (Index bi : idx)
        {
            q += form.h(a, bi);
        }
    }
    return q / two_ln2;
}

struct PathResult
{
    std::vector<Index> chosen; // indices into form.responses
    double delta = std::numeric_limits<double>::infinity();
    std::int64_t evaluations = 0;
    std::int64_t skips = 0;
};

// Greedy response path for one feature. Prefixes whose lower bound cannot
// beat `best` are skipped when short_circuit is set.
PathResult response_path(const CandidateForm& form, const CodingScheme& scheme, std::int64_t k0, double best,
                         bool short_circuit, bool diagonal)
{
    PathResult out;
    const Index kmax = static_cast<Index>(form.responses.size());
    if (kmax == 0)
    {
        return out;
    }
    const double base_cost = feature_model_cost(scheme, k0);
    std::vector<double> extra(static_cast<std::size_t>(kmax) + 1, 0.0);
    for (Index k = 1; k <= kmax; ++k)
    {
        extra[static_cast<std::size_t>(k)] = feature_model_cost(scheme, k0 + k) - base_cost;
    }
    // suffix minimum of the cost increase
    std::vector<double> tail(static_cast<std::size_t>(kmax) + 2, std::numeric_limits<double>::infinity());
    for (Index k = kmax; k >= 1; --k)
    {
        tail[static_cast<std::size_t>(k)] = std::min(tail[static_cast<std::size_t>(k) + 1], extra[static_cast<std::size_t>(k)]);
    }
    const double bound = short_circuit ? lower_bound_bits(form, diagonal) : -std::numeric_limits<double>::infinity();

    std::vector<bool> used(static_cast<std::size_t>(kmax), false);
    Vector cross = Vector::Zero(kmax); // sum over the current subset of H_rs
    std::vector<Index> path;
    double q = 0.0;
    for (Index k = 1; k <= kmax; ++k)
    {
        if (short_circuit && bound + tail[static_cast<std::size_t>(k)] >= best - tie_eps)
        {
            out.skips += kmax - k + 1;
            break;
        }
        Index pick = -1;
        double pick_inc = 0.0;
        for (Index a = 0; a < kmax; ++a)
        {
            if (used[static_cast<std::size_t>(a)])
            {
                continue;
            }
            const double inc = -2.0 * form.b(a) + form.h(a, a) + 2.0 * cross(a);
            if (pick < 0 || inc < pick_inc - tie_eps * two_ln2)
            {
                pick = a;
                pick_inc = inc;
            }
        }
        used[static_cast<std::size_t>(pick)] = true;
        path.push_back(pick);
        q += pick_inc;
        cross += form.h.col(pick);
        if (short_circuit && bound + extra[static_cast<std::size_t>(k)] >= best - tie_eps)
        {
            ++out.skips;
            continue;
        }
        ++out.evaluations;
        const double value = q / two_ln2 + extra[static_cast<std::size_t>(k)];
        if (value < out.delta - tie_eps)
        {
            out.delta = value;
            out.chosen = path;
        }
    }
    std::sort(out.chosen.begin(), out.chosen.end());
    return out;
}

struct Move
{
    Index feature = 0;
    std::vector<Index> responses;
    double delta = 0.0;
};

Index default_cap(Index n, Index m)
{
    return std::max<Index>(1, std::min(n / 2, m));
}

void check_xy(const Matrix& x, const Matrix& y)
{
    if (x.rows() != y.rows())
    {
        throw DomainError("X has " + std::to_string(x.rows()) + " rows but Y has " + std::to_string(y.rows()));
    }
    if (x.rows() < 3)
    {
        throw DomainError("need at least 3 observations");
    }
    if (x.cols() < 2)
    {
        throw DomainError("X needs the intercept column and at least one feature");
    }
    if (y.cols() < 1)
    {
        throw DomainError("Y has no columns");
    }
    if (!(x.col(0).array() == 1.0).all())
    {
        throw DomainError("X column 0 must be the all-ones intercept");
    }
    if (!x.allFinite() || !y.allFinite())
    {
        throw DomainError("X and Y must be finite");
    }
}

void check_scheme(const CodingScheme& scheme, const Matrix& x, const Matrix& y)
{
    scheme.validate();
    if (scheme.h != y.cols())
    {
        throw DomainError("coding scheme h=" + std::to_string(scheme.h) + " but Y has " + std::to_string(y.cols()) +
                          " columns");
    }
    if (scheme.m != x.cols() - 1)
    {
        throw DomainError("coding scheme m=" + std::to_string(scheme.m) + " but X has " +
                          std::to_string(x.cols() - 1) + " features");
    }
}

std::vector<Index> to_responses(const CandidateForm& form, const std::vector<Index>& idx)
{
    std::vector<Index> out;
    for (Index a : idx)
    {
        out.push_back(form.responses[static_cast<std::size_t>(a)]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

namespace
{

NoiseCovEstimate restrict_cov(const NoiseCovEstimate& cov, const std::vector<Index>& keep)
{
    NoiseCovEstimate out{cov.spec, Matrix(keep.size(), keep.size())};
    for (std::size_t a = 0; a < keep.size(); ++a)
    {
        for (std::size_t b = 0; b < keep.size(); ++b)
        {
            out.matrix(Index(a), Index(b)) = cov.matrix(keep[a], keep[b]);
        }
    }
    return out;
}

// Starts a search state from an existing support, adding features per
// response in ascending order.
SearchState state_from_support(const Matrix& x, const Matrix& y, const SupportMask& support, Index cap)
{
    SearchState s(x, y, cap);
    for (Index r = 0; r < y.cols(); ++r)
    {
        for (Index j = 1; j < x.cols(); ++j)
        {
            if (support(j, r) && !s.add(j, r))
            {
                throw SingularDesignError("feature " + std::to_string(j) + " is collinear with response " +
                                          std::to_string(r) + "'s other features");
            }
        }
    }
    return s;
}

kernels::GainTable score(const SearchState& s, const std::vector<bool>& open, bool parallel)
{
    kernels::CandidateInputs in;
    in.x = &s.x();
    in.residuals = &s.residuals();
    in.bases = &s.bases();
    in.in_model = &s.in_model();
    in.active = &open;
    return parallel ? kernels::score_candidates_parallel(in) : kernels::score_candidates_serial(in);
}

// Best single move of one step under the configured scheme, or nullopt when
// nothing lowers the description length.
std::optional<Move> best_move(SearchState& s, const CodedCov& c, const SearchConfig& config, SearchStats& stats,
                              std::set<std::pair<Index, Index>>& reported)
{
    const std::vector<bool> open = s.open();
    const kernels::GainTable gains = score(s, open, config.parallel);
    const CodingScheme& scheme = config.scheme;
    const Index h = s.h();

    for (Index j = 1; j < s.p(); ++j)
    {
        for (Index r = 0; r < h; ++r)
        {
            if (gains.status(j, r) == kernels::CellStatus::collinear && reported.emplace(j, r).second)
            {
                s.note("feature " + std::to_string(j) + " is collinear with response " + std::to_string(r) +
                       "'s design; skipped");
            }
        }
    }

    std::vector<Index> candidates;
    for (Index j = 1; j < s.p(); ++j)
    {
        const std::int64_t k0 = s.k(j);
        bool any = false;
        bool all_open = true;
        for (Index r = 0; r < h; ++r)
        {
            if (!open[static_cast<std::size_t>(r)])
            {
                continue;
            }
            if (gains.status(j, r) == kernels::CellStatus::eligible)
            {
                any = true;
            }
            else
            {
                all_open = false;
            }
        }
        if (!any)
        {
            continue;
        }
        switch (scheme.kind)
        {
        case SchemeKind::full_mic:
            // all open responses or nothing; never extended
            if (k0 == 0 && all_open)
            {
                candidates.push_back(j);
            }
            break;
        case SchemeKind::partial_mic:
            if (k0 == 0 || config.allow_extension)
            {
                candidates.push_back(j);
            }
            break;
        case SchemeKind::ric:
            candidates.push_back(j);
            break;
        }
    }
    std::vector<CandidateForm> forms = build_forms(s, c, gains, candidates, config.parallel);

    if (scheme.kind == SchemeKind::partial_mic && config.prefilter &&
        static_cast<Index>(forms.size()) > config.top_t)
    {
        // Rank by the likelihood gain with every eligible response nonzero.
        std::vector<std::pair<double, std::size_t>> ranked;
        ranked.reserve(forms.size());
        for (std::size_t f = 0; f < forms.size(); ++f)
        {
            std::vector<Index> all(forms[f].responses.size());
            for (std::size_t a = 0; a < all.size(); ++a)
            {
                all[a] = Index(a);
            }
            ranked.emplace_back(-subset_delta_bits(forms[f], all), f);
        }
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        std::vector<std::size_t> keep;
        for (Index t = 0; t < config.top_t; ++t)
        {
            keep.push_back(ranked[static_cast<std::size_t>(t)].second);
        }
        std::sort(keep.begin(), keep.end());
        stats.prefiltered += static_cast<std::int64_t>(forms.size() - keep.size());
        std::vector<CandidateForm> kept;
        kept.reserve(keep.size());
        for (std::size_t f : keep)
        {
            kept.push_back(std::move(forms[f]));
        }
        forms = std::move(kept);
    }

    std::optional<Move> best;
    double best_delta = 0.0;
    for (const CandidateForm& form : forms)
    {
        const std::int64_t k0 = s.k(form.feature);
        switch (scheme.kind)
        {
        case SchemeKind::partial_mic:
        {
            PathResult path = response_path(form, scheme, k0, best_delta, config.short_circuit, c.diagonal);
            stats.evaluations += path.evaluations;
            stats.bound_skips += path.skips;
            if (!path.chosen.empty() && path.delta < best_delta - tie_eps)
            {
                best_delta = path.delta;
                best = Move{form.feature, to_responses(form, path.chosen), path.delta};
            }
            break;
        }
        case SchemeKind::full_mic:
        {
            std::vector<Index> all(form.responses.size());
            for (std::size_t a = 0; a < all.size(); ++a)
            {
                all[a] = Index(a);
            }
            ++stats.evaluations;
            const double delta = subset_delta_bits(form, all) + feature_model_cost(scheme, scheme.h);
            if (delta < best_delta - tie_eps)
            {
                best_delta = delta;
                best = Move{form.feature, form.responses, delta};
            }
            break;
        }
        case SchemeKind::ric:
        {
            const double step_cost = feature_model_cost(scheme, k0 + 1) - feature_model_cost(scheme, k0);
            for (std::size_t a = 0; a < form.responses.size(); ++a)
            {
                ++stats.evaluations;
                const double delta = subset_delta_bits(form, {Index(a)}) + step_cost;
                if (delta < best_delta - tie_eps)
                {
                    best_delta = delta;
                    best = Move{form.feature, {form.responses[a]}, delta};
                }
            }
            break;
        }
        }
    }
    return best;
}

Selection finish(const Matrix& x, const Matrix& y, const SearchState& s, SelectionLedger ledger,
                 const CodingScheme& scheme, CovSpec spec)
{
    Selection out;
    out.beta = CoefficientMatrix::refit(x, y, s.support());
    const CodedCov c = estimate_coded_cov(s, spec);
    ledger.final_dl = coded_residual_cost(s, c) + s.model_cost(scheme);
    ledger.notes.insert(ledger.notes.begin(), s.notes().begin(), s.notes().end());
    out.ledger = std::move(ledger);
    return out;
}

} // namespace

CoefficientMatrix::CoefficientMatrix(Index p, Index h)
    : values_(Matrix::Zero(p, h)), mask_(SupportMask::Constant(p, h, false))
{
    if (p < 1 || h < 1)
    {
        throw DomainError("coefficient matrix needs at least the intercept row and one response");
    }
}

CoefficientMatrix CoefficientMatrix::refit(const Matrix& x, const Matrix& y, const SupportMask& support)
{
    if (support.rows() != x.cols() || support.cols() != y.cols() || x.rows() != y.rows())
    {
        throw DomainError("support mask does not match X and Y");
    }
    CoefficientMatrix beta(x.cols(), y.cols());
    beta.mask_ = support;
    beta.mask_.row(0).setConstant(false);
    for (Index r = 0; r < y.cols(); ++r)
    {
        const std::vector<Index> cols = with_intercept(beta.features_for(r));
        const OlsFit fit = ols_fit(select_columns(x, cols), y.col(r));
        for (std::size_t c = 0; c < cols.size(); ++c)
        {
            beta.values_(cols[c], r) = fit.coefficients(Index(c));
        }
    }
    return beta;
}

std::int64_t CoefficientMatrix::response_count(Index feature) const
{
    return feature == 0 ? 0 : mask_.row(feature).count();
}

std::vector<Index> CoefficientMatrix::features_for(Index response) const
{
    std::vector<Index> out;
    for (Index j = 1; j < mask_.rows(); ++j)
    {
        if (mask_(j, response))
        {
            out.push_back(j);
        }
    }
    return out;
}

std::vector<Index> CoefficientMatrix::selected_features() const
{
    std::vector<Index> out;
    for (Index j = 1; j < mask_.rows(); ++j)
    {
        if (mask_.row(j).any())
        {
            out.push_back(j);
        }
    }
    return out;
}

std::vector<CoefficientMatrix::Entry> CoefficientMatrix::support() const
{
    std::vector<Entry> out;
    for (Index j = 1; j < mask_.rows(); ++j)
    {
        for (Index r = 0; r < mask_.cols(); ++r)
        {
            if (mask_(j, r))
            {
                out.push_back({j, r, values_(j, r)});
            }
        }
    }
    return out;
}

Matrix CoefficientMatrix::predict(const Matrix& x) const
{
    if (x.cols() != values_.rows())
    {
        throw DomainError("X has " + std::to_string(x.cols()) + " columns, coefficients expect " +
                          std::to_string(values_.rows()));
    }
    return x * values_;
}

void CoefficientMatrix::set(Index feature, Index response, double value)
{
    if (feature < 0 || feature >= values_.rows() || response < 0 || response >= values_.cols())
    {
        throw DomainError("coefficient index out of range");
    }
    values_(feature, response) = value;
    if (feature > 0)
    {
        mask_(feature, response) = true;
    }
}

void SearchConfig::validate() const
{
    scheme.validate();
    if (top_t < 1)
    {
        throw DomainError("top_t must be at least 1");
    }
    if (max_steps && *max_steps < 1)
    {
        throw DomainError("max_steps must be at least 1");
    }
    if (cov.mode == CovMode::shrunken && !(cov.lambda >= 0.0 && cov.lambda <= 1.0))
    {
        throw DomainError("shrinkage lambda must lie in [0, 1]");
    }
}

double model_cost(const CoefficientMatrix& beta, const CodingScheme& scheme)
{
    double total = 0.0;
    for (Index j = 1; j < beta.rows(); ++j)
    {
        total += feature_model_cost(scheme, beta.response_count(j));
    }
    return total;
}

double residual_cost_multi(const Matrix& x, const Matrix& y, const CoefficientMatrix& beta,
                           const NoiseCovEstimate& cov)
{
    if (beta.rows() != x.cols() || beta.responses() != y.cols() || x.rows() != y.rows())
    {
        throw DomainError("coefficient matrix does not match X and Y");
    }
    const CoefficientMatrix fit = CoefficientMatrix::refit(x, y, beta.support_mask());
    return residual_cost_multi(Matrix(y - fit.predict(x)), cov);
}

double description_length(const Matrix& x, const Matrix& y, const CoefficientMatrix& beta,
                          const NoiseCovEstimate& cov, const CodingScheme& scheme)
{
    return residual_cost_multi(x, y, beta, cov) + model_cost(beta, scheme);
}

SubsetChoice best_response_subset(const Matrix& x, const Matrix& y, const CoefficientMatrix& beta_current,
                                  Index candidate_feature, const NoiseCovEstimate& cov,
                                  const CodingScheme& scheme)
{
    check_xy(x, y);
    check_scheme(scheme, x, y);
    if (scheme.kind != SchemeKind::partial_mic)
    {
        throw DomainError("response-subset search applies to partial MIC only");
    }
    if (candidate_feature < 1 || candidate_feature >= x.cols())
    {
        throw DomainError("candidate feature " + std::to_string(candidate_feature) + " out of range");
    }
    if (beta_current.response_count(candidate_feature) > 0)
    {
        throw DomainError("candidate feature " + std::to_string(candidate_feature) + " is already in the model");
    }
    if (cov.matrix.rows() != y.cols() || cov.matrix.cols() != y.cols())
    {
        throw DomainError("covariance dimension does not match Y");
    }
    SearchState s = state_from_support(x, y, beta_current.support_mask(), x.rows());
    const std::vector<Index> coded = s.coded();
    const CodedCov c = make_coded_cov(s, coded, restrict_cov(cov, coded));
    const double current = description_length(x, y, beta_current, cov, scheme);

    std::vector<bool> open(static_cast<std::size_t>(y.cols()));
    for (Index r = 0; r < y.cols(); ++r)
    {
        open[static_cast<std::size_t>(r)] = !s.frozen(r);
    }
    const kernels::GainTable gains = score(s, open, false);
    const std::vector<CandidateForm> forms = build_forms(s, c, gains, {candidate_feature}, false);
    const PathResult path = response_path(forms.front(), scheme, 0, 0.0, false, c.diagonal);

    SubsetChoice out;
    out.bits = current;
    if (!path.chosen.empty() && path.delta < -tie_eps)
    {
        out.responses = to_responses(forms.front(), path.chosen);
        out.bits = current + path.delta;
    }
    return out;
}

Selection stepwise_select(const Matrix& x, const Matrix& y, const SearchConfig& config)
{
    check_xy(x, y);
    config.validate();
    check_scheme(config.scheme, x, y);
    const Index cap = config.max_steps.value_or(default_cap(x.rows(), x.cols() - 1));

    SearchState s(x, y, cap);
    SelectionLedger ledger;
    std::set<std::pair<Index, Index>> reported;
    CodedCov c = estimate_coded_cov(s, config.cov);

    while (true)
    {
        const std::optional<Move> move = best_move(s, c, config, ledger.stats, reported);
        if (!move)
        {
            break;
        }
        LedgerStep step;
        step.feature = move->feature;
        step.responses = move->responses;
        step.residual_before = coded_residual_cost(s, c);
        step.model_before = s.model_cost(config.scheme);
        step.dl_before = step.residual_before + step.model_before;

        SearchState next = s;
        for (Index r : move->responses)
        {
            if (!next.add(move->feature, r))
            {
                throw SingularDesignError("accepted feature became collinear");
            }
        }
        step.residual_after = coded_residual_cost(next, c);
        step.model_after = next.model_cost(config.scheme);
        step.dl_after = step.residual_after + step.model_after;
        if (!(step.dl_after < step.dl_before))
        {
            ledger.notes.push_back("stopped: adding feature " + std::to_string(move->feature) +
                                   " did not lower the recomputed description length");
            break;
        }
        s = std::move(next);
        ledger.steps.push_back(std::move(step));
        c = estimate_coded_cov(s, config.cov);
    }
    return finish(x, y, s, std::move(ledger), config.scheme, config.cov);
}

Matrix ClassifierSet::predict(const Matrix& x) const
{
    Matrix out(x.rows(), static_cast<Index>(models.size()));
    for (std::size_t r = 0; r < models.size(); ++r)
    {
        const ResponseClassifier& m = models[r];
        if (m.majority_only)
        {
            out.col(Index(r)).setConstant(m.majority_label);
            continue;
        }
        const Vector eta = select_columns(x, with_intercept(m.features)) * m.coefficients;
        out.col(Index(r)) = (eta.array() > 0.0).cast<double>().matrix();
    }
    return out;
}

ClassifierSet classify_pipeline(const Matrix& x, const Matrix& y_binary, const SearchConfig& config)
{
    if (!((y_binary.array() == 0.0) || (y_binary.array() == 1.0)).all())
    {
        throw DomainError("classification responses must be 0 or 1");
    }
    ClassifierSet out;
    out.selection = stepwise_select(x, y_binary, config);
    for (Index r = 0; r < y_binary.cols(); ++r)
    {
        ResponseClassifier m;
        m.features = out.selection.beta.features_for(r);
        const double ones = y_binary.col(r).sum();
        if (ones == 0.0 || ones == double(y_binary.rows()))
        {
            m.majority_only = true;
            m.majority_label = ones == 0.0 ? 0.0 : 1.0;
            out.selection.ledger.notes.push_back("response " + std::to_string(r) +
                                                 " has a single class; majority-label classifier");
        }
        else
        {
            const LogisticFit fit = logistic_refit(select_columns(x, with_intercept(m.features)), y_binary.col(r));
            m.coefficients = fit.coefficients;
            m.separated = fit.separated;
            m.majority_label = 2.0 * ones >= double(y_binary.rows()) ? 1.0 : 0.0;
        }
        out.models.push_back(std::move(m));
    }
    return out;
}

} // namespace micsel
