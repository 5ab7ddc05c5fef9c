#include "micsel/kernels.hpp"
#include "micsel/rng.hpp"

#include <doctest.h>

using namespace micsel;

namespace
{

struct Snapshot
{
    Matrix x, y, residuals;
    std::vector<Matrix> bases;
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> in_model;
    std::vector<bool> active;

    explicit Snapshot(std::uint64_t seed)
    {
        const Index n = 40, m = 12, h = 4;
        Stream s(seed, "test/kernels");
        x = Matrix(n, m + 1);
        x.col(0).setOnes();
        x.rightCols(m) = s.normal_matrix(n, m);
        x.col(7) = x.col(2) * 3.0 - x.col(0); // collinear once feature 2 is in
        y = s.normal_matrix(n, h);
        in_model = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(m + 1, h, false);
        in_model(2, 0) = in_model(5, 0) = in_model(2, 1) = in_model(9, 3) = true;
        active = {true, true, false, true};
        residuals = Matrix(n, h);
        for (Index r = 0; r < h; ++r)
        {
            std::vector<Index> cols{0};
            for (Index j = 1; j <= m; ++j)
                if (in_model(j, r))
                    cols.push_back(j);
            Matrix d(n, Index(cols.size()));
            for (std::size_t c = 0; c < cols.size(); ++c)
                d.col(Index(c)) = x.col(cols[c]);
            Eigen::HouseholderQR<Matrix> qr(d);
            Matrix q = qr.householderQ() * Matrix::Identity(n, d.cols());
            residuals.col(r) = y.col(r) - q * (q.transpose() * y.col(r));
            bases.push_back(q);
        }
    }

    kernels::CandidateInputs inputs() const { return {&x, &residuals, &bases, &in_model, &active}; }
};

} // namespace

TEST_CASE("serial and parallel gain tables agree")
{
    for (std::uint64_t seed : {1, 2, 3})
    {
        const Snapshot s(seed);
        const auto a = kernels::score_candidates_serial(s.inputs());
        const auto b = kernels::score_candidates_parallel(s.inputs());
        CHECK((a.status == b.status).all());
        CHECK((a.delta_rss - b.delta_rss).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("gain table cells")
{
    const Snapshot s(4);
    const auto t = kernels::score_candidates_serial(s.inputs());
    using kernels::CellStatus;
    CHECK(t.status(0, 0) == CellStatus::in_model);
    CHECK(t.status(2, 0) == CellStatus::in_model);
    CHECK(t.status(7, 0) == CellStatus::collinear);
    CHECK(t.status(7, 3) == CellStatus::eligible);
    CHECK(t.status(3, 2) == CellStatus::inactive);

    // drop in RSS from an explicit refit
    const Index n = s.x.rows();
    Matrix d(n, 4);
    d << s.x.col(0), s.x.col(2), s.x.col(5), s.x.col(4);
    const Vector beta = d.colPivHouseholderQr().solve(s.y.col(0));
    const double rss_after = (s.y.col(0) - d * beta).squaredNorm();
    CHECK(t.delta_rss(4, 0) == doctest::Approx(s.residuals.col(0).squaredNorm() - rss_after));
}

TEST_CASE("gain table input checks")
{
    const Snapshot s(5);
    auto in = s.inputs();
    in.bases = nullptr;
    CHECK_THROWS_AS(kernels::score_candidates_serial(in), DomainError);
    std::vector<bool> short_active{true};
    in = s.inputs();
    in.active = &short_active;
    CHECK_THROWS_AS(kernels::score_candidates_parallel(in), DomainError);
}

TEST_CASE("serial and parallel p-value matrices agree")
{
    Stream s(8, "test/pvalues");
    Matrix f = s.normal_matrix(30, 9);
    f.col(4).setConstant(2.5);
    Matrix y = s.normal_matrix(30, 3);
    y.col(1) += 0.8 * f.col(0);
    const auto a = kernels::pvalue_matrix_serial(f, y);
    const auto b = kernels::pvalue_matrix_parallel(f, y);
    CHECK((a.p - b.p).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(a.constant_features == std::vector<Index>{4});
    CHECK(b.constant_features == std::vector<Index>{4});
    CHECK(a.p.row(4).isOnes());
    CHECK(a.p(0, 1) < 1e-2);
    CHECK_THROWS_AS(kernels::pvalue_matrix_parallel(f, y.topRows(10)), DomainError);
}
