#ifndef MICSEL_KERNELS_HPP
#define MICSEL_KERNELS_HPP

// Data-parallel inner loops. Each kernel has a plain serial reference and an
// OpenMP version; tests hold the two to the same answers and bench_kernels
// times them against each other.

#include "micsel/linalg.hpp"

#include <cstdint>
#include <vector>

namespace micsel::kernels
{

enum class CellStatus : std::uint8_t
{
    eligible = 0,
    in_model = 1,
    collinear = 2,
    inactive = 3
};

/// Snapshot of a multi-response stepwise search.
struct CandidateInputs
{
    /// n x p design, intercept in column 0.
    const Matrix* x = nullptr;
    /// n x h residuals of the current per-response OLS fits.
    const Matrix* residuals = nullptr;
    /// Per response, an n x q orthonormal basis of that response's current design.
    const std::vector<Matrix>* bases = nullptr;
    /// p x h, true where feature j is already in response r's model.
    const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>* in_model = nullptr;
    /// Per response, false once the response is frozen (perfect fit or at its feature cap).
    const std::vector<bool>* active = nullptr;
};

/// Residual sum of squares removed by adding feature j to response r's model,
/// (x_j' e_r)^2 / |x_j - Q_r Q_r' x_j|^2, for every (j, r).
struct GainTable
{
    Matrix delta_rss;
    Eigen::Array<CellStatus, Eigen::Dynamic, Eigen::Dynamic> status;
};

/// |x~|^2 <= collinear_tolerance |x|^2 marks a candidate as collinear with the current design.
inline constexpr double collinear_tolerance = 1e-10;

GainTable score_candidates_serial(const CandidateInputs& in);
GainTable score_candidates_parallel(const CandidateInputs& in);

/// m x h slope p-values, one simple regression of Y[:, r] on features[:, j] each.
/// Constant feature columns get p = 1 and are listed in `constant_features`.
struct PValueResult
{
    Matrix p;
    std::vector<Index> constant_features;
};

PValueResult pvalue_matrix_serial(const Matrix& features, const Matrix& y);
PValueResult pvalue_matrix_parallel(const Matrix& features, const Matrix& y);

/// Number of OpenMP worker threads to use; 0 leaves the runtime default.
void set_thread_count(int threads);

} // namespace micsel::kernels

#endif // MICSEL_KERNELS_HPP
