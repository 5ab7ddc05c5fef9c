#ifndef MICSEL_LINALG_HPP
#define MICSEL_LINALG_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace micsel
{

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Argument outside the mathematical domain of an operation (i <= 0 for lg*, k > h, ...).
struct DomainError : std::domain_error
{
    using std::domain_error::domain_error;
};

/// Design matrix without full column rank.
struct SingularDesignError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/// Input that makes the requested statistic meaningless (constant feature, single-class labels, ...).
struct DegenerateInputError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

enum class MatrixRole
{
    features,
    responses
};

/// Dense n x cols matrix, one observation per row, all entries finite.
/// Feature matrices always carry the all-ones intercept column at index 0.
class DataMatrix
{
public:
    /// Prepends the intercept column to raw feature values.
    static DataMatrix features(const Matrix& raw, std::vector<std::string> names = {});
    /// Wraps a matrix whose column 0 is already the intercept.
    static DataMatrix design(Matrix with_intercept);
    static DataMatrix responses(Matrix values, std::vector<std::string> names = {});

    const Matrix& values() const { return values_; }
    Index rows() const { return values_.rows(); }
    Index cols() const { return values_.cols(); }
    MatrixRole role() const { return role_; }
    const std::vector<std::string>& names() const { return names_; }

    /// Number of selectable features (intercept excluded) for feature matrices.
    Index feature_count() const { return role_ == MatrixRole::features ? cols() - 1 : cols(); }

private:
    DataMatrix(Matrix values, MatrixRole role, std::vector<std::string> names);

    Matrix values_;
    MatrixRole role_;
    std::vector<std::string> names_;
};

struct OlsFit
{
    Vector coefficients;
    double rss = 0.0;
    Index dof = 0;
};

/// Least squares by column-pivoted Householder QR. A column whose pivot falls
/// below 1e-10 of the largest one raises SingularDesignError.
OlsFit ols_fit(const Matrix& design, const Vector& response);
OlsFit ols_fit(const DataMatrix& design, const Vector& response);

/// Two-sided p-value of the slope in response ~ 1 + feature (t test, n - 2 dof).
double slope_p_value(const Vector& feature, const Vector& response);

/// Two-sided Student-t tail probability 2 P(T_dof > |t|).
double t_two_sided_p(double t, double dof);

/// Upper tail 1 - F_{chi^2(dof)}(x).
double chi_square_upper(double x, double dof);

struct LogisticFit
{
    Vector coefficients;
    int iterations = 0;
    bool converged = false;
    /// Iteration cap reached or fitted probabilities collapsed to 0/1.
    bool separated = false;
};

/// Maximum-likelihood logistic regression by IRLS. Stops when the largest
/// coefficient change is below 1e-8 or after 100 iterations.
LogisticFit logistic_refit(const Matrix& design, const Vector& labels);

/// Bernoulli log-likelihood of labels under logistic coefficients.
double logistic_log_likelihood(const Matrix& design, const Vector& labels, const Vector& coefficients);

/// Columns of x selected by index, in the given order.
Matrix select_columns(const Matrix& x, const std::vector<Index>& columns);

} // namespace micsel

#endif // MICSEL_LINALG_HPP
