#include "micsel/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

namespace micsel::kernels
{

namespace
{

void check_inputs(const CandidateInputs& in)
{
    if (!in.x || !in.residuals || !in.bases || !in.in_model || !in.active)
    {
        throw DomainError("candidate inputs incomplete");
    }
    const Index h = in.residuals->cols();
    if (static_cast<Index>(in.bases->size()) != h || static_cast<Index>(in.active->size()) != h ||
        in.in_model->rows() != in.x->cols() || in.in_model->cols() != h || in.residuals->rows() != in.x->rows())
    {
        throw DomainError("candidate inputs have inconsistent shapes");
    }
}

GainTable blank_table(const CandidateInputs& in)
{
    GainTable t;
    t.delta_rss = Matrix::Zero(in.x->cols(), in.residuals->cols());
    t.status.resize(in.x->cols(), in.residuals->cols());
    return t;
}

// Constant columns have zero centered norm.
bool centered_constant(const Vector& centered, const Vector& raw)
{
    const double sxx = centered.squaredNorm();
    return !(sxx > 0.0) || sxx <= 1e-24 * raw.squaredNorm();
}

} // namespace

GainTable score_candidates_serial(const CandidateInputs& in)
{
    check_inputs(in);
    const Matrix& x = *in.x;
    const Matrix& e = *in.residuals;
    GainTable t = blank_table(in);
    for (Index j = 0; j < x.cols(); ++j)
    {
        for (Index r = 0; r < e.cols(); ++r)
        {
            if (!(*in.active)[static_cast<std::size_t>(r)])
            {
                t.status(j, r) = CellStatus::inactive;
                continue;
            }
            if (j == 0 || (*in.in_model)(j, r))
            {
                t.status(j, r) = CellStatus::in_model;
                continue;
            }
            const Matrix& q = (*in.bases)[static_cast<std::size_t>(r)];
            // Two passes of classical Gram-Schmidt.
            Vector resid = x.col(j) - q * (q.transpose() * x.col(j));
            resid -= q * (q.transpose() * resid);
            const double norm2 = resid.squaredNorm();
            if (norm2 <= collinear_tolerance * x.col(j).squaredNorm())
            {
                t.status(j, r) = CellStatus::collinear;
                continue;
            }
            const double a = resid.dot(e.col(r));
            t.delta_rss(j, r) = a * a / norm2;
            t.status(j, r) = CellStatus::eligible;
        }
    }
    return t;
}

GainTable score_candidates_parallel(const CandidateInputs& in)
{
    check_inputs(in);
    const Matrix& x = *in.x;
    const Matrix& e = *in.residuals;
    const Index p = x.cols();
    const Index h = e.cols();
    GainTable t = blank_table(in);

    // e_r is orthogonal to Q_r, so x~'e_r = x'e_r and |x~|^2 = |x|^2 - |Q_r'x|^2.
    const Matrix xte = x.transpose() * e;
    const Vector col_norm2 = x.colwise().squaredNorm().transpose();
    Matrix proj_norm2(p, h);
#pragma omp parallel for schedule(static)
    for (Index r = 0; r < h; ++r)
    {
        const Matrix& q = (*in.bases)[static_cast<std::size_t>(r)];
        proj_norm2.col(r) = (q.transpose() * x).colwise().squaredNorm().transpose();
    }

#pragma omp parallel for schedule(static)
    for (Index j = 0; j < p; ++j)
    {
        for (Index r = 0; r < h; ++r)
        {
            if (!(*in.active)[static_cast<std::size_t>(r)])
            {
                t.status(j, r) = CellStatus::inactive;
                continue;
            }
            if (j == 0 || (*in.in_model)(j, r))
            {
                t.status(j, r) = CellStatus::in_model;
                continue;
            }
            const double norm2 = col_norm2(j) - proj_norm2(j, r);
            if (norm2 <= collinear_tolerance * col_norm2(j))
            {
                t.status(j, r) = CellStatus::collinear;
                continue;
            }
            const double a = xte(j, r);
            t.delta_rss(j, r) = a * a / norm2;
            t.status(j, r) = CellStatus::eligible;
        }
    }
    return t;
}

PValueResult pvalue_matrix_serial(const Matrix& features, const Matrix& y)
{
    if (features.rows() != y.rows())
    {
        throw DomainError("feature and response row counts differ");
    }
    PValueResult out;
    out.p.resize(features.cols(), y.cols());
    for (Index j = 0; j < features.cols(); ++j)
    {
        const Vector f = features.col(j);
        const Vector fc = f.array() - f.mean();
        if (centered_constant(fc, f))
        {
            out.constant_features.push_back(j);
            out.p.row(j).setOnes();
            continue;
        }
        for (Index r = 0; r < y.cols(); ++r)
        {
            out.p(j, r) = slope_p_value(f, y.col(r));
        }
    }
    return out;
}

PValueResult pvalue_matrix_parallel(const Matrix& features, const Matrix& y)
{
    if (features.rows() != y.rows())
    {
        throw DomainError("feature and response row counts differ");
    }
    const Index n = features.rows();
    if (n < 3)
    {
        throw DomainError("slope test needs at least 3 observations");
    }
    const Matrix fc = features.rowwise() - features.colwise().mean();
    const Matrix yc = y.rowwise() - y.colwise().mean();
    const Vector sxx = fc.colwise().squaredNorm().transpose();
    const Vector raw = features.colwise().squaredNorm().transpose();
    const Vector syy = yc.colwise().squaredNorm().transpose();
    const Matrix sxy = fc.transpose() * yc;
    const double dof = static_cast<double>(n - 2);

    PValueResult out;
    out.p.resize(features.cols(), y.cols());
    std::vector<char> constant(static_cast<std::size_t>(features.cols()), 0);
#pragma omp parallel for schedule(static)
    for (Index j = 0; j < features.cols(); ++j)
    {
        if (!(sxx(j) > 0.0) || sxx(j) <= 1e-24 * raw(j))
        {
            constant[static_cast<std::size_t>(j)] = 1;
            out.p.row(j).setOnes();
            continue;
        }
        for (Index r = 0; r < y.cols(); ++r)
        {
            if (!(syy(r) > 0.0))
            {
                out.p(j, r) = 1.0;
                continue;
            }
            const double r2 = std::min(1.0, sxy(j, r) * sxy(j, r) / (sxx(j) * syy(r)));
            if (r2 >= 1.0)
            {
                out.p(j, r) = 0.0;
                continue;
            }
            out.p(j, r) = t_two_sided_p(std::sqrt(r2 * dof / (1.0 - r2)), dof);
        }
    }
    for (Index j = 0; j < features.cols(); ++j)
    {
        if (constant[static_cast<std::size_t>(j)])
        {
            out.constant_features.push_back(j);
        }
    }
    return out;
}

void set_thread_count(int threads)
{
    if (threads > 0)
    {
        omp_set_num_threads(threads);
    }
}

} // namespace micsel::kernels
