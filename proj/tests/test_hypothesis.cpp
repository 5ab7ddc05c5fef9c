#include "micsel/hypothesis.hpp"
#include "micsel/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace micsel;

namespace
{

PValueMatrix column(std::vector<double> p)
{
    PValueMatrix out;
    out.p = Eigen::Map<Vector>(p.data(), Index(p.size()));
    return out;
}

Matrix with_intercept(const Matrix& raw)
{
    Matrix x(raw.rows(), raw.cols() + 1);
    x.col(0).setOnes();
    x.rightCols(raw.cols()) = raw;
    return x;
}

} // namespace

TEST_CASE("bonferroni thresholds")
{
    const PValueMatrix p = column({0.001, 0.01, 0.0125, 0.02, 0.5});
    const HypothesisResult r = bonferroni_select(p, 0.0625);
    // threshold 0.0625 / 5 = 0.0125, inclusive
    REQUIRE(r.support.size() == 3);
    CHECK(r.support[0] == std::pair<Index, Index>{1, 0});
    CHECK(r.support[2] == std::pair<Index, Index>{3, 0});
    CHECK(r.selected_features() == std::vector<Index>{1, 2, 3});
    CHECK(r.mask(5, 1)(3, 0));
    CHECK_FALSE(r.mask(5, 1)(0, 0));

    PValueMatrix two;
    two.p = Matrix(2, 2);
    two.p << 0.01, 0.2, 0.03, 0.001;
    CHECK(bonferroni_select(two, 0.05).support.size() == 2);
    // alpha / (m h) = 0.0125
    CHECK(bonferroni_matrix_select(two, 0.05).support.size() == 2);
    CHECK(bonferroni_matrix_select(two, 0.01).support.size() == 1);
    CHECK_THROWS_AS(bonferroni_select(two, 0.0), DomainError);
    CHECK_THROWS_AS(bonferroni_select(two, -1.0), DomainError);
    CHECK_NOTHROW(bonferroni_select(two, 2.0));
}

TEST_CASE("Benjamini-Hochberg step-up")
{
    const PValueMatrix p = column({0.205, 0.001, 0.039, 0.008, 0.041, 0.042, 0.06, 0.074});
    const HypothesisResult r = bh_select(p, 0.05, false);
    REQUIRE(r.support.size() == 2);
    CHECK(r.support[0].first == 2);
    CHECK(r.support[1].first == 4);

    // step-up: a later p-value under its threshold pulls in earlier failures
    const HypothesisResult up = bh_select(column({0.011, 0.012, 0.013, 0.9}), 0.05, false);
    CHECK(up.support.size() == 3);
    CHECK(bh_select(column({0.3, 0.6}), 0.05, false).support.empty());
}

TEST_CASE("BH over the whole matrix")
{
    PValueMatrix p;
    p.p = Matrix(3, 2);
    p.p << 0.001, 0.5, 0.004, 0.02, 0.8, 0.009;
    // sorted 0.001 0.004 0.009 0.02 0.5 0.8 against j * 0.05 / 6: the fourth passes
    const HypothesisResult r = bh_select(p, 0.05, true);
    CHECK(r.support.size() == 4);
    CHECK_FALSE(r.mask(3, 2)(1, 1));

    // one strong column lowers the bar for the other only in matrix mode
    PValueMatrix q;
    q.p = Matrix(4, 2);
    q.p << 0.001, 0.018, 0.002, 0.9, 0.003, 0.9, 0.004, 0.9;
    CHECK(bh_select(q, 0.05, false).support.size() == 4);
    CHECK(bh_select(q, 0.05, true).support.size() == 5);
}

TEST_CASE("feature gains")
{
    Stream s(21, "test/gains");
    const Matrix raw = s.normal_matrix(50, 4);
    Matrix y = s.normal_matrix(50, 2);
    y.col(0) += raw.col(1);
    const Matrix x = with_intercept(raw);
    const Matrix g = feature_gains(x, y);
    for (Index j = 0; j < 4; ++j)
        for (Index r = 0; r < 2; ++r)
        {
            const Vector f = raw.col(j).array() - raw.col(j).mean();
            const Vector c = y.col(r).array() - y.col(r).mean();
            const double corr = f.dot(c) / (f.norm() * c.norm());
            CHECK(g(j, r) == doctest::Approx(50.0 * corr * corr / (2 * std::numbers::ln2)));
        }
}

TEST_CASE("Bonferroni-MIC against subset enumeration")
{
    for (std::uint64_t seed : {1, 2, 3, 4, 5})
    {
        Stream s(seed, "test/bonf-mic");
        const Index m = 12, h = 3;
        const Matrix raw = s.normal_matrix(40, m);
        Matrix y = s.normal_matrix(40, h);
        y.col(0) += 0.6 * raw.col(0);
        y.col(1) += 0.5 * raw.col(0);
        y.col(2) += 0.7 * raw.col(3);
        const Matrix x = with_intercept(raw);
        const CodingScheme scheme{SchemeKind::partial_mic, 2.0, m, h};
        const HypothesisResult res = bonferroni_mic(x, y, scheme);
        const Matrix g = feature_gains(x, y);
        for (Index j = 0; j < m; ++j)
        {
            double best = 0.0;
            unsigned best_t = 0;
            for (unsigned t = 1; t < 8; ++t)
            {
                double gain = 0.0;
                int k = 0;
                for (Index r = 0; r < h; ++r)
                    if ((t >> r) & 1u)
                    {
                        gain += g(j, r);
                        ++k;
                    }
                const double net = gain - feature_model_cost(scheme, k);
                if (net > best + 1e-9)
                {
                    best = net;
                    best_t = t;
                }
            }
            CHECK(res.scores[std::size_t(j)] == doctest::Approx(best));
            for (Index r = 0; r < h; ++r)
                CHECK(res.mask(m, h)(j + 1, r) == bool((best_t >> r) & 1u));
        }
    }
}

TEST_CASE("BH-MIC keeps a prefix of the ranked features")
{
    Stream s(31, "test/bh-mic");
    const Index m = 60, h = 5;
    const Matrix raw = s.normal_matrix(80, m);
    Matrix y = s.normal_matrix(80, h);
    for (Index r = 0; r < h; ++r)
        y.col(r) += 0.5 * raw.col(0) + (r < 2 ? 0.6 : 0.0) * raw.col(7);
    const Matrix x = with_intercept(raw);
    const CodingScheme scheme{SchemeKind::partial_mic, 2.0, m, h};
    const HypothesisResult res = bh_mic(x, y, scheme);
    REQUIRE(res.q_star.has_value());
    const auto feats = res.selected_features();
    CHECK(Index(feats.size()) == *res.q_star);
    CHECK(std::find(feats.begin(), feats.end(), 1) != feats.end());
    CHECK(std::find(feats.begin(), feats.end(), 8) != feats.end());
    double weakest_kept = 1e300;
    for (Index j : feats)
        weakest_kept = std::min(weakest_kept, res.scores[std::size_t(j - 1)]);
    for (Index j = 1; j <= m; ++j)
        if (std::find(feats.begin(), feats.end(), j) == feats.end())
            CHECK(res.scores[std::size_t(j - 1)] <= weakest_kept);

    // no signal at all: nothing survives the second phase
    const Matrix noise = Stream(32, "test/bh-mic-null").normal_matrix(80, h);
    const HypothesisResult null = bh_mic(x, noise, scheme);
    CHECK(null.support.size() <= 5);
}

TEST_CASE("MIC tests reject unsupported settings")
{
    const Matrix x = with_intercept(Stream(1, "t").normal_matrix(20, 3));
    const Matrix y = Stream(2, "t").normal_matrix(20, 2);
    const CodingScheme scheme{SchemeKind::partial_mic, 2.0, 3, 2};
    CHECK_THROWS_AS(bonferroni_mic(x, y, scheme, {CovMode::full, 0.0}), DomainError);
    CHECK_THROWS_AS(bh_mic(x, y, {SchemeKind::ric, 2.0, 3, 2}), DomainError);
    CHECK_THROWS_AS(bonferroni_mic(x, y, {SchemeKind::partial_mic, 2.0, 4, 2}), DomainError);
}

TEST_CASE("p-value matrix wrapper")
{
    Matrix raw = Stream(3, "t").normal_matrix(30, 4);
    raw.col(2).setConstant(1.0);
    const PValueMatrix p = pvalue_matrix(with_intercept(raw), Stream(4, "t").normal_matrix(30, 2));
    CHECK(p.features() == 4);
    CHECK(p.responses() == 2);
    CHECK(p.constant_features == std::vector<Index>{3});
    CHECK(((p.p.array() >= 0.0) && (p.p.array() <= 1.0)).all());
}

TEST_CASE("implied alpha")
{
    CHECK(implied_alpha(1.0, 1) == doctest::Approx(0.24).epsilon(0.03));
    CHECK(implied_alpha(2.0, 1) == doctest::Approx(0.10).epsilon(0.05));
    CHECK(implied_alpha(2.77, 1) == doctest::Approx(0.05).epsilon(0.04));
    CHECK(implied_alpha(0.0, 1) == doctest::Approx(1.0));
    CHECK(implied_alpha(3.0, 2) > implied_alpha(3.0, 1));
    CHECK(lambda_to_pvalue(2.0, 1) == implied_alpha(2.0, 1));
    CHECK_THROWS_AS(implied_alpha(-1.0, 1), DomainError);
    CHECK_THROWS_AS(implied_alpha(1.0, 0), DomainError);
}
