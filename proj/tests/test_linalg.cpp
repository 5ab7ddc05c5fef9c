#include "micsel/linalg.hpp"
#include "micsel/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace micsel;

TEST_CASE("ols matches the normal equations")
{
    Stream s(11, "test/ols");
    Matrix x(30, 4);
    x.col(0).setOnes();
    x.rightCols(3) = s.normal_matrix(30, 3);
    const Vector y = s.normal_matrix(30, 1).col(0);
    const OlsFit fit = ols_fit(x, y);
    const Vector normal = (x.transpose() * x).ldlt().solve(x.transpose() * y);
    CHECK((fit.coefficients - normal).norm() < 1e-10);
    CHECK(fit.rss == doctest::Approx((y - x * normal).squaredNorm()));
    CHECK(fit.dof == 26);

    Matrix dup = x;
    dup.col(3) = 2.0 * dup.col(1);
    CHECK_THROWS_AS(ols_fit(dup, y), SingularDesignError);
}

TEST_CASE("data matrix roles")
{
    const DataMatrix f = DataMatrix::features(Matrix::Constant(3, 2, 5.0));
    CHECK(f.cols() == 3);
    CHECK(f.feature_count() == 2);
    CHECK(f.values().col(0).isOnes());
    CHECK_THROWS(DataMatrix::design(Matrix::Constant(3, 2, 5.0)));
}

TEST_CASE("distribution tails")
{
    CHECK(t_two_sided_p(2.228, 10) == doctest::Approx(0.05).epsilon(0.01));
    CHECK(t_two_sided_p(0.0, 5) == doctest::Approx(1.0));
    CHECK(chi_square_upper(3.841, 1) == doctest::Approx(0.05).epsilon(0.01));
    CHECK(chi_square_upper(0.0, 3) == doctest::Approx(1.0));
}

TEST_CASE("slope p-value from the t statistic")
{
    Stream s(5, "test/slope");
    const Vector x = s.normal_matrix(25, 1).col(0);
    const Vector y = 0.4 * x + s.normal_matrix(25, 1).col(0);
    const double xm = x.mean(), ym = y.mean();
    const double sxx = (x.array() - xm).square().sum();
    const double sxy = ((x.array() - xm) * (y.array() - ym)).sum();
    const double b = sxy / sxx;
    const double rss = ((y.array() - ym) - b * (x.array() - xm)).square().sum();
    const double t = b / std::sqrt(rss / 23.0 / sxx);
    CHECK(slope_p_value(x, y) == doctest::Approx(t_two_sided_p(std::abs(t), 23.0)));
    CHECK_THROWS_AS(slope_p_value(Vector::Constant(25, 1.0), y), DegenerateInputError);
}

TEST_CASE("logistic refit reaches a stationary point")
{
    Stream s(9, "test/logit");
    Matrix x(200, 2);
    x.col(0).setOnes();
    x.col(1) = s.normal_matrix(200, 1).col(0);
    Vector labels(200);
    for (Index i = 0; i < 200; ++i)
        labels(i) = s.uniform() < 1.0 / (1.0 + std::exp(-(0.3 + 1.2 * x(i, 1)))) ? 1.0 : 0.0;
    const LogisticFit fit = logistic_refit(x, labels);
    CHECK(fit.converged);
    const Vector p = (1.0 + (-(x * fit.coefficients)).array().exp()).inverse().matrix();
    CHECK((x.transpose() * (labels - p)).norm() < 1e-6);
    const double ll = logistic_log_likelihood(x, labels, fit.coefficients);
    Vector nudged = fit.coefficients;
    nudged(1) += 0.05;
    CHECK(logistic_log_likelihood(x, labels, nudged) < ll);

    CHECK_THROWS_AS(logistic_refit(x, Vector::Ones(200)), DegenerateInputError);
}

TEST_CASE("column selection")
{
    Matrix x(2, 3);
    x << 1, 2, 3, 4, 5, 6;
    const Matrix s = select_columns(x, {2, 0});
    CHECK(s(0, 0) == 3);
    CHECK(s(1, 1) == 4);
}
