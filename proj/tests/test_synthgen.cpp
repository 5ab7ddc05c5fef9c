#include "micsel/rng.hpp"
#include "micsel/synthgen.hpp"

#include <doctest.h>

#include <set>

using namespace micsel;

TEST_CASE("labeled streams")
{
    Stream a(5, "x"), b(5, "x"), c(5, "y"), d(6, "x");
    const double va = a.normal();
    CHECK(va == b.normal());
    CHECK(va != c.normal());
    CHECK(va != d.normal());
    CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);

    Stream s(3, "draws");
    const auto pick = s.sample_without_replacement(5, 14, 10);
    CHECK(std::set<std::int64_t>(pick.begin(), pick.end()).size() == 10);
    CHECK(*std::min_element(pick.begin(), pick.end()) == 5);
    auto perm = s.permutation(7);
    std::sort(perm.begin(), perm.end());
    for (Index i = 0; i < 7; ++i)
        CHECK(perm[std::size_t(i)] == i);
    for (int i = 0; i < 100; ++i)
    {
        const auto v = s.uniform_int(-2, 2);
        CHECK((v >= -2 && v <= 2));
    }
    CHECK_THROWS_AS(s.sample_without_replacement(1, 3, 4), DomainError);
}

TEST_CASE("scenario supports")
{
    ScenarioSpec spec;
    spec.m = 300;
    spec.n_test = 50;
    SUBCASE("partial")
    {
        spec.kind = ScenarioKind::partial;
        const SyntheticInstance inst = gen_scenario(spec);
        CHECK(inst.beta_true.response_count(1) == 20);
        CHECK(inst.beta_true.response_count(2) == 15);
        CHECK(inst.beta_true.response_count(3) == 10);
        CHECK(inst.beta_true.response_count(4) == 5);
        for (Index r = 0; r < 20; ++r)
            CHECK(inst.beta_true.features_for(r).size() == 4);
        CHECK(inst.beta_true.nonzero(4, 4));
        CHECK_FALSE(inst.beta_true.nonzero(4, 5));
        CHECK(inst.beta_true.nonzero(2, 14));
        CHECK_FALSE(inst.beta_true.nonzero(2, 15));
    }
    SUBCASE("full")
    {
        spec.kind = ScenarioKind::full;
        const SyntheticInstance inst = gen_scenario(spec);
        CHECK(inst.beta_true.selected_features() == std::vector<Index>{1, 2, 3, 4});
        CHECK(inst.beta_true.support_size() == 80);
    }
    SUBCASE("independent")
    {
        spec.kind = ScenarioKind::independent;
        const SyntheticInstance inst = gen_scenario(spec);
        CHECK(inst.beta_true.support_size() == 80);
        for (Index r = 0; r < 20; ++r)
            CHECK(inst.beta_true.features_for(r).size() == 4);
    }
}

TEST_CASE("scenario data")
{
    ScenarioSpec spec;
    spec.kind = ScenarioKind::full;
    spec.m = 50;
    spec.n = 100;
    spec.n_test = 20000;
    const SyntheticInstance inst = gen_scenario(spec);
    CHECK(inst.x_train.rows() == 100);
    CHECK(inst.x_train.cols() == 51);
    CHECK(inst.x_test.rows() == 20000);
    CHECK(inst.x_train.col(0).isOnes());
    CHECK(inst.x_test.col(0).isOnes());
    CHECK(inst.beta_true.intercept(0) == 0.0);
    const Matrix noise = inst.y_test - inst.beta_true.predict(inst.x_test);
    for (Index r = 0; r < 3; ++r)
        CHECK(noise.col(r).squaredNorm() / 20000.0 == doctest::Approx(0.1).epsilon(0.05));
    CHECK(inst.x_test.rightCols(50).array().square().mean() == doctest::Approx(1.0).epsilon(0.02));

    const SyntheticInstance again = gen_scenario(spec);
    CHECK(again.y_train == inst.y_train);
    spec.seed = 2;
    CHECK(gen_scenario(spec).y_train != inst.y_train);

    spec.m = 3;
    CHECK_THROWS_AS(gen_scenario(spec), DomainError);
}

TEST_CASE("binarization")
{
    Matrix y(4, 2);
    y << 1, 5, 2, 5, 3, 5, 4, 5;
    const Binarized b = binarize(y);
    CHECK(b.values.col(0) == Vector((Vector(4) << 0, 0, 1, 1).finished()));
    CHECK(b.values.col(1).isOnes());
    CHECK(b.constant_columns == std::vector<Index>{1});

    ScenarioSpec spec;
    spec.m = 20;
    spec.n_test = 1000;
    const SyntheticInstance bin = binarize_instance(gen_scenario(spec));
    CHECK(bin.binarized);
    CHECK(((bin.y_train.array() == 0.0) || (bin.y_train.array() == 1.0)).all());
    CHECK(bin.y_test.mean() == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("summary-statistic simulator")
{
    YeastSimSpec spec;
    spec.m = 40;
    spec.h = 6;
    spec.n_test = 500;
    spec.f = 0.2;
    spec.target_nonzeros = 10;
    Matrix cov = Matrix::Identity(40, 40);
    for (Index i = 0; i + 1 < 40; ++i)
        cov(i, i + 1) = cov(i + 1, i) = 0.5;
    YeastSources src;
    src.cov = cov;
    for (CovVariant v : {CovVariant::diag, CovVariant::half, CovVariant::full})
    {
        spec.cov_variant = v;
        const SyntheticInstance inst = gen_yeast_sim(spec, src);
        const auto nz = Index(inst.beta_true.support_size());
        CHECK(nz >= 8);
        CHECK(nz <= 12);
        CHECK(inst.x_train.cols() == 41);
        CHECK(inst.y_test.rows() == 500);
    }

    spec.cov_variant = CovVariant::original_x;
    src.x = Stream(1, "test/x-source").normal_matrix(30, 40);
    const SyntheticInstance inst = gen_yeast_sim(spec, src);
    // every simulated row is a row of the source
    for (Index i = 0; i < 5; ++i)
    {
        bool found = false;
        for (Index k = 0; k < 30 && !found; ++k)
            found = inst.x_test.row(i).tail(40) == src.x->row(k);
        CHECK(found);
    }
    CHECK_THROWS_AS(gen_yeast_sim(spec, YeastSources{}), DomainError);
    for (auto v : {CovVariant::diag, CovVariant::half, CovVariant::full, CovVariant::original_x})
        CHECK(cov_variant_from_string(to_string(v)) == v);
}
