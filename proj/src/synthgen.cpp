#include "micsel/synthgen.hpp"

#include "micsel/rng.hpp"

#include <algorithm>
#include <cmath>

namespace micsel
{

namespace
{

Matrix with_intercept_column(const Matrix& raw)
{
    Matrix x(raw.rows(), raw.cols() + 1);
    x.col(0).setOnes();
    x.rightCols(raw.cols()) = raw;
    return x;
}

Index ceil_div(Index a, Index b)
{
    return (a + b - 1) / b;
}

// Square root factor of a symmetric PSD matrix (negative eigenvalues clamped).
Matrix psd_factor(const Matrix& cov)
{
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    if (eig.info() != Eigen::Success)
    {
        throw DomainError("covariance eigen-decomposition failed");
    }
    const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal();
}

Matrix sample_covariance(const Matrix& x)
{
    const Matrix centered = x.rowwise() - x.colwise().mean();
    return centered.transpose() * centered / static_cast<double>(x.rows() - 1);
}

} // namespace

std::string to_string(ScenarioKind kind)
{
    switch (kind)
    {
    case ScenarioKind::partial:
        return "partial";
    case ScenarioKind::full:
        return "full";
    case ScenarioKind::independent:
        return "independent";
    }
    return "?";
}

ScenarioKind scenario_from_string(const std::string& name)
{
    if (name == "partial")
        return ScenarioKind::partial;
    if (name == "full")
        return ScenarioKind::full;
    if (name == "independent")
        return ScenarioKind::independent;
    throw DomainError("unknown scenario '" + name + "' (expected partial, full or independent)");
}

void ScenarioSpec::validate() const
{
    if (h < 1)
        throw DomainError("scenario needs h >= 1");
    if (n < 3)
        throw DomainError("scenario needs n >= 3");
    if (n_test < 1)
        throw DomainError("scenario needs n_test >= 1");
    if (k_per_response < 1 || k_per_response > m - 1)
        throw DomainError("k_per_response must lie in [1, m - 1]");
    if (kind == ScenarioKind::partial && k_per_response < 4)
        throw DomainError("partial scenario needs k_per_response >= 4");
    if (!(noise_var > 0.0) || !std::isfinite(noise_var))
        throw DomainError("noise_var must be positive");
}

SyntheticInstance gen_scenario(const ScenarioSpec& spec)
{
    spec.validate();
    const Index m = spec.m;
    const Index h = spec.h;
    const Index k = spec.k_per_response;

    SupportMask support = SupportMask::Constant(m + 1, h, false);
    Stream pick(spec.seed, "scenario/support");
    switch (spec.kind)
    {
    case ScenarioKind::full:
        support.block(1, 0, k, h).setConstant(true);
        break;
    case ScenarioKind::partial:
    {
        const Index coverage[4] = {h, ceil_div(3 * h, 4), ceil_div(h, 2), ceil_div(h, 4)};
        for (Index f = 0; f < 4; ++f)
        {
            support.block(f + 1, 0, 1, coverage[f]).setConstant(true);
        }
        for (Index r = 0; r < h; ++r)
        {
            const Index have = support.col(r).count();
            for (std::int64_t j : pick.sample_without_replacement(5, m, k - have))
            {
                support(j, r) = true;
            }
        }
        break;
    }
    case ScenarioKind::independent:
        for (Index r = 0; r < h; ++r)
        {
            for (std::int64_t j : pick.sample_without_replacement(1, m, k))
            {
                support(j, r) = true;
            }
        }
        break;
    }

    SyntheticInstance inst;
    inst.beta_true = CoefficientMatrix(m + 1, h);
    Stream values(spec.seed, "scenario/beta");
    for (Index j = 1; j <= m; ++j)
    {
        for (Index r = 0; r < h; ++r)
        {
            if (support(j, r))
            {
                inst.beta_true.set(j, r, values.normal());
            }
        }
    }
    const double sd = std::sqrt(spec.noise_var);
    inst.x_train = with_intercept_column(Stream(spec.seed, "scenario/x_train").normal_matrix(spec.n, m));
    inst.x_test = with_intercept_column(Stream(spec.seed, "scenario/x_test").normal_matrix(spec.n_test, m));
    inst.y_train = inst.beta_true.predict(inst.x_train) +
                   Stream(spec.seed, "scenario/noise_train").normal_matrix(spec.n, h, sd);
    inst.y_test = inst.beta_true.predict(inst.x_test) +
                  Stream(spec.seed, "scenario/noise_test").normal_matrix(spec.n_test, h, sd);
    return inst;
}

std::string to_string(CovVariant v)
{
    switch (v)
    {
    case CovVariant::diag:
        return "diag";
    case CovVariant::half:
        return "half";
    case CovVariant::full:
        return "full";
    case CovVariant::original_x:
        return "original_x";
    }
    return "?";
}

CovVariant cov_variant_from_string(const std::string& name)
{
    if (name == "diag")
        return CovVariant::diag;
    if (name == "half")
        return CovVariant::half;
    if (name == "full")
        return CovVariant::full;
    if (name == "original_x" || name == "original-x")
        return CovVariant::original_x;
    throw DomainError("unknown covariance variant '" + name + "' (expected diag, half, full or original_x)");
}

void YeastSimSpec::validate() const
{
    if (m < 1 || h < 1)
        throw DomainError("yeast simulation needs m, h >= 1");
    if (n < 3 || n_test < 1)
        throw DomainError("yeast simulation needs n >= 3 and n_test >= 1");
    if (!(f > 0.0 && f < 1.0))
        throw DomainError("f must lie in (0, 1)");
    if (!(a > 0.0))
        throw DomainError("a must be positive");
    if (!(sigma_beta >= 0.0))
        throw DomainError("sigma_beta must be nonnegative");
    if (target_nonzeros < 1)
        throw DomainError("target_nonzeros must be positive");
    if (!(noise_var > 0.0))
        throw DomainError("noise_var must be positive");
    if (max_attempts < 1)
        throw DomainError("max_attempts must be positive");
}

SyntheticInstance gen_yeast_sim(const YeastSimSpec& spec, const YeastSources& sources)
{
    spec.validate();
    const Index m = spec.m;
    const Index h = spec.h;
    if (sources.x && sources.x->cols() != m)
    {
        throw DomainError("X source has " + std::to_string(sources.x->cols()) + " columns, expected m=" +
                          std::to_string(m));
    }
    if (sources.y && sources.y->cols() != h)
    {
        throw DomainError("Y source has " + std::to_string(sources.y->cols()) + " columns, expected h=" +
                          std::to_string(h));
    }

    SyntheticInstance inst;
    Stream walk(spec.seed, "yeast/beta");
    const double window = 0.25 * static_cast<double>(spec.target_nonzeros);
    bool accepted = false;
    for (int attempt = 0; attempt < spec.max_attempts && !accepted; ++attempt)
    {
        CoefficientMatrix beta(m + 1, h);
        for (Index j = 1; j <= m; ++j)
        {
            if (!walk.bernoulli(spec.f))
            {
                continue;
            }
            const std::int64_t count = std::min<std::int64_t>(walk.poisson(spec.a), h);
            for (std::int64_t r : walk.sample_without_replacement(0, h - 1, count))
            {
                beta.set(j, r, walk.normal(spec.mu_beta, spec.sigma_beta));
            }
        }
        const double total = static_cast<double>(beta.support_size());
        if (std::abs(total - static_cast<double>(spec.target_nonzeros)) <= window)
        {
            inst.beta_true = std::move(beta);
            accepted = true;
        }
    }
    if (!accepted)
    {
        throw DomainError("no coefficient matrix within 25% of " + std::to_string(spec.target_nonzeros) +
                          " nonzeros after " + std::to_string(spec.max_attempts) + " attempts");
    }

    Matrix raw_train;
    Matrix raw_test;
    if (spec.cov_variant == CovVariant::original_x)
    {
        if (!sources.x)
        {
            throw DomainError("original_x variant needs an X source");
        }
        raw_train = *sources.x;
        // test rows resampled from the source
        Stream rows(spec.seed, "yeast/x_test_rows");
        raw_test.resize(spec.n_test, m);
        for (Index i = 0; i < spec.n_test; ++i)
        {
            raw_test.row(i) = sources.x->row(rows.uniform_int(0, sources.x->rows() - 1));
        }
    }
    else
    {
        Matrix cov;
        if (sources.cov)
        {
            cov = *sources.cov;
        }
        else if (sources.x)
        {
            cov = sample_covariance(*sources.x);
        }
        else
        {
            throw DomainError("covariance variants need a covariance source or an X source");
        }
        if (cov.rows() != m || cov.cols() != m)
        {
            throw DomainError("covariance source must be m x m");
        }
        const double lambda = spec.cov_variant == CovVariant::diag ? 1.0
                              : spec.cov_variant == CovVariant::half ? 0.5
                                                                      : 0.0;
        const Matrix diag = cov.diagonal().asDiagonal();
        const Matrix factor = psd_factor(lambda * diag + (1.0 - lambda) * cov);
        raw_train = Stream(spec.seed, "yeast/x_train").normal_matrix(spec.n, m) * factor.transpose();
        raw_test = Stream(spec.seed, "yeast/x_test").normal_matrix(spec.n_test, m) * factor.transpose();
    }

    Vector noise_sd = Vector::Constant(h, std::sqrt(spec.noise_var));
    if (sources.y)
    {
        const Matrix centered = sources.y->rowwise() - sources.y->colwise().mean();
        noise_sd = (centered.colwise().squaredNorm() / static_cast<double>(sources.y->rows())).cwiseSqrt().transpose();
    }
    inst.x_train = with_intercept_column(raw_train);
    inst.x_test = with_intercept_column(raw_test);
    inst.y_train = inst.beta_true.predict(inst.x_train) +
                   Stream(spec.seed, "yeast/noise_train").normal_matrix(inst.x_train.rows(), h) * noise_sd.asDiagonal();
    inst.y_test = inst.beta_true.predict(inst.x_test) +
                  Stream(spec.seed, "yeast/noise_test").normal_matrix(inst.x_test.rows(), h) * noise_sd.asDiagonal();
    return inst;
}

Binarized binarize(const Matrix& y)
{
    Binarized out;
    out.values.resize(y.rows(), y.cols());
    for (Index r = 0; r < y.cols(); ++r)
    {
        if ((y.col(r).array() == y(0, r)).all())
        {
            out.constant_columns.push_back(r);
            out.values.col(r).setOnes();
            continue;
        }
        const double mean = y.col(r).mean();
        out.values.col(r) = (y.col(r).array() >= mean).cast<double>().matrix();
    }
    return out;
}

SyntheticInstance binarize_instance(const SyntheticInstance& inst)
{
    SyntheticInstance out = inst;
    const double total = static_cast<double>(inst.y_train.rows() + inst.y_test.rows());
    for (Index r = 0; r < inst.y_train.cols(); ++r)
    {
        const double mean = (inst.y_train.col(r).sum() + inst.y_test.col(r).sum()) / total;
        out.y_train.col(r) = (inst.y_train.col(r).array() >= mean).cast<double>().matrix();
        out.y_test.col(r) = (inst.y_test.col(r).array() >= mean).cast<double>().matrix();
    }
    out.binarized = true;
    return out;
}

} // namespace micsel
