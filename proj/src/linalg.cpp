#include "micsel/linalg.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>

namespace micsel
{

namespace
{

constexpr double pivot_threshold = 1e-10;

void require_finite(const Matrix& m, const char* what)
{
    if (!m.allFinite())
    {
        throw DomainError(std::string(what) + " contains non-finite entries");
    }
}

} // namespace

DataMatrix::DataMatrix(Matrix values, MatrixRole role, std::vector<std::string> names)
    : values_(std::move(values)), role_(role), names_(std::move(names))
{
    require_finite(values_, "data matrix");
    if (values_.rows() < 2)
    {
        throw DomainError("data matrix needs at least 2 observations");
    }
}

DataMatrix DataMatrix::features(const Matrix& raw, std::vector<std::string> names)
{
    Matrix x(raw.rows(), raw.cols() + 1);
    x.col(0).setOnes();
    x.rightCols(raw.cols()) = raw;
    if (!names.empty())
    {
        names.insert(names.begin(), "(intercept)");
    }
    return DataMatrix(std::move(x), MatrixRole::features, std::move(names));
}

DataMatrix DataMatrix::design(Matrix with_intercept)
{
    if (with_intercept.cols() < 1 || !(with_intercept.col(0).array() == 1.0).all())
    {
        throw DomainError("design matrix must carry an all-ones intercept column at index 0");
    }
    return DataMatrix(std::move(with_intercept), MatrixRole::features, {});
}

DataMatrix DataMatrix::responses(Matrix values, std::vector<std::string> names)
{
    return DataMatrix(std::move(values), MatrixRole::responses, std::move(names));
}

OlsFit ols_fit(const Matrix& design, const Vector& response)
{
    if (design.rows() != response.size())
    {
        throw DomainError("design and response lengths differ");
    }
    if (design.cols() > design.rows())
    {
        throw SingularDesignError("more columns than observations");
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(design);
    const auto& r = qr.matrixQR();
    const Index p = design.cols();
    double max_pivot = 0.0;
    for (Index i = 0; i < p; ++i)
    {
        max_pivot = std::max(max_pivot, std::abs(r(i, i)));
    }
    for (Index i = 0; i < p; ++i)
    {
        if (!(std::abs(r(i, i)) > pivot_threshold * max_pivot))
        {
            throw SingularDesignError("design matrix is rank deficient (column " +
                                      std::to_string(qr.colsPermutation().indices()(i)) + ")");
        }
    }
    OlsFit fit;
    fit.coefficients = qr.solve(response);
    fit.rss = (response - design * fit.coefficients).squaredNorm();
    fit.dof = design.rows() - p;
    return fit;
}

OlsFit ols_fit(const DataMatrix& design, const Vector& response)
{
    return ols_fit(design.values(), response);
}

double t_two_sided_p(double t, double dof)
{
    if (std::isinf(t))
    {
        return 0.0;
    }
    boost::math::students_t dist(dof);
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

double chi_square_upper(double x, double dof)
{
    if (x <= 0.0)
    {
        return 1.0;
    }
    if (std::isinf(x))
    {
        return 0.0;
    }
    boost::math::chi_squared dist(dof);
    return boost::math::cdf(boost::math::complement(dist, x));
}

double slope_p_value(const Vector& feature, const Vector& response)
{
    const Index n = feature.size();
    if (n != response.size())
    {
        throw DomainError("feature and response lengths differ");
    }
    if (n < 3)
    {
        throw DomainError("slope test needs at least 3 observations");
    }
    const Vector fc = feature.array() - feature.mean();
    const Vector yc = response.array() - response.mean();
    const double sxx = fc.squaredNorm();
    const double syy = yc.squaredNorm();
    if (!(sxx > 0.0) || sxx <= 1e-24 * feature.squaredNorm())
    {
        throw DegenerateInputError("constant feature has no slope");
    }
    if (!(syy > 0.0))
    {
        return 1.0;
    }
    const double sxy = fc.dot(yc);
    const double r2 = std::min(1.0, sxy * sxy / (sxx * syy));
    if (r2 >= 1.0)
    {
        return 0.0;
    }
    const double t = std::sqrt(r2 * static_cast<double>(n - 2) / (1.0 - r2));
    return t_two_sided_p(t, static_cast<double>(n - 2));
}

double logistic_log_likelihood(const Matrix& design, const Vector& labels, const Vector& coefficients)
{
    const Vector eta = design * coefficients;
    double ll = 0.0;
    for (Index i = 0; i < eta.size(); ++i)
    {
        // log(1 + e^eta) without overflow
        const double e = eta(i);
        const double log1pexp = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
        ll += labels(i) * e - log1pexp;
    }
    return ll;
}

LogisticFit logistic_refit(const Matrix& design, const Vector& labels)
{
    if (design.rows() != labels.size())
    {
        throw DomainError("design and label lengths differ");
    }
    Index ones = 0;
    for (Index i = 0; i < labels.size(); ++i)
    {
        if (labels(i) != 0.0 && labels(i) != 1.0)
        {
            throw DomainError("labels must be 0 or 1");
        }
        ones += labels(i) == 1.0;
    }
    if (ones == 0 || ones == labels.size())
    {
        throw DegenerateInputError("logistic refit needs both classes");
    }

    constexpr int max_iterations = 100;
    constexpr double tolerance = 1e-8;
    const Index p = design.cols();

    LogisticFit fit;
    fit.coefficients = Vector::Zero(p);
    for (int it = 1; it <= max_iterations; ++it)
    {
        const Vector eta = design * fit.coefficients;
        const Vector mu = (1.0 / (1.0 + (-eta.array()).exp())).matrix();
        const Vector w = (mu.array() * (1.0 - mu.array())).max(1e-12).matrix();
        const Matrix xtwx = design.transpose() * w.asDiagonal() * design;
        const Vector grad = design.transpose() * (labels - mu);
        Eigen::LDLT<Matrix> ldlt(xtwx);
        Vector step = ldlt.solve(grad);
        if (!step.allFinite())
        {
            fit.separated = true;
            fit.iterations = it;
            break;
        }
        fit.coefficients += step;
        fit.iterations = it;
        if (step.cwiseAbs().maxCoeff() < tolerance)
        {
            fit.converged = true;
            break;
        }
    }
    if (!fit.converged)
    {
        fit.separated = true;
    }
    return fit;
}

Matrix select_columns(const Matrix& x, const std::vector<Index>& columns)
{
    Matrix out(x.rows(), static_cast<Index>(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c)
    {
        out.col(static_cast<Index>(c)) = x.col(columns[c]);
    }
    return out;
}

} // namespace micsel
