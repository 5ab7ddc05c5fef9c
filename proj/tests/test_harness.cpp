#include "micsel/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace micsel;

TEST_CASE("precision and recall")
{
    SupportMask truth = SupportMask::Constant(5, 2, false);
    truth(1, 0) = truth(2, 0) = truth(1, 1) = true;
    SupportMask sel = SupportMask::Constant(5, 2, false);
    sel(1, 0) = sel(3, 0) = sel(1, 1) = true;
    sel(0, 0) = true; // intercept never counts
    const MetricReport r = score_selection(sel, truth);
    CHECK(r.n_coeff_selected == 3);
    CHECK(*r.coeff_precision == doctest::Approx(2.0 / 3.0));
    CHECK(r.coeff_recall == doctest::Approx(2.0 / 3.0));
    CHECK(r.n_feat_selected == 2);
    CHECK(*r.feat_precision == doctest::Approx(0.5));
    CHECK(r.feat_recall == doctest::Approx(0.5));
    CHECK(*r.response_precision[0] == doctest::Approx(0.5));
    CHECK(*r.response_precision[1] == doctest::Approx(1.0));

    const MetricReport empty = score_selection(SupportMask::Constant(5, 2, false), truth);
    CHECK_FALSE(empty.coeff_precision.has_value());
    CHECK(empty.coeff_recall == 0.0);
    CHECK_THROWS_AS(score_selection(SupportMask::Constant(4, 2, false), truth), DomainError);
}

TEST_CASE("test error of the true support")
{
    ScenarioSpec spec;
    spec.kind = ScenarioKind::independent;
    spec.m = 100;
    spec.n_test = 20000;
    const SyntheticInstance inst = gen_scenario(spec);
    const auto err = regression_test_error(inst.x_test, inst.y_test, inst.x_train, inst.y_train,
                                           inst.beta_true.support_mask());
    REQUIRE(err.size() == 20);
    double mean = 0.0;
    for (double e : err)
        mean += e / 20.0;
    // refit noise inflates RMSE a little above sqrt(0.1)
    CHECK(mean > std::sqrt(0.1) * 0.98);
    CHECK(mean < std::sqrt(0.1) * 1.06);

    SupportMask dup = SupportMask::Constant(101, 20, false);
    Matrix xtr = inst.x_train, xte = inst.x_test;
    xtr.col(2) = xtr.col(1);
    xte.col(2) = xte.col(1);
    dup(1, 0) = dup(2, 0) = true;
    std::vector<std::string> notes;
    CHECK_NOTHROW(regression_test_error(xte, inst.y_test, xtr, inst.y_train, dup, &notes));
    CHECK_FALSE(notes.empty());
}

TEST_CASE("aggregates")
{
    const Aggregate a = aggregate({1.0, 2.0, std::nullopt, 3.0});
    CHECK(a.mean == doctest::Approx(2.0));
    CHECK(a.stderr_ == doctest::Approx(1.0 / std::sqrt(3.0)));
    CHECK(a.count == 3);
    CHECK(a.missing == 1);
    const Aggregate none = aggregate({std::nullopt});
    CHECK(none.count == 0);
}

TEST_CASE("precision matching")
{
    const auto [i, flagged] = pick_matched({0.99, 0.9, 0.8, std::nullopt}, 0.92);
    CHECK(i == 1);
    CHECK_FALSE(flagged);
    const auto [j, low] = pick_matched({0.99, 0.95}, 0.5);
    CHECK(j == 1);
    CHECK(low);
}

TEST_CASE("method names")
{
    CHECK(method_from_string("indep") == MethodKind::ric);
    CHECK(method_from_string("partial") == MethodKind::partial_mic);
    CHECK(method_from_string("bh-matrix") == MethodKind::bh_matrix);
    CHECK_THROWS_AS(method_from_string("lasso"), DomainError);
    MethodSpec m{MethodKind::bonferroni, std::nullopt, {}, 75};
    CHECK(m.effective_param() == 0.05);
    CHECK(m.label() == "bonferroni(alpha=0.05)");
    m.param = -1.0;
    CHECK_THROWS_AS(m.validate(), DomainError);
    MethodSpec r{MethodKind::ric, 0.1, {}, 75};
    CHECK(r.label() == "ric(bpc=0.1)");
}

TEST_CASE("k-fold indices partition the rows")
{
    const auto folds = kfold_indices(23, 5, true, 4);
    REQUIRE(folds.size() == 5);
    std::set<Index> seen;
    for (const auto& f : folds)
    {
        CHECK((f.size() == 4 || f.size() == 5));
        seen.insert(f.begin(), f.end());
    }
    CHECK(seen.size() == 23);
    CHECK(kfold_indices(23, 5, false, 0)[0] == std::vector<Index>{0, 1, 2, 3});
    CHECK_THROWS_AS(kfold_indices(3, 5, false, 0), DomainError);
}

TEST_CASE("experiments are reproducible")
{
    ScenarioSpec spec;
    spec.kind = ScenarioKind::partial;
    spec.m = 80;
    spec.n_test = 500;
    ExperimentPlan plan;
    plan.generator = spec;
    plan.methods = {{MethodKind::truth, {}, {}, 75},
                    {MethodKind::partial_mic, {}, {}, 75},
                    {MethodKind::bonferroni, 0.1, {}, 75},
                    {MethodKind::bh_mic, {}, {}, 75}};
    plan.replicates = 3;
    plan.seed = 9;
    const ExperimentResult a = run_experiment(plan);
    const ExperimentResult b = run_experiment(plan);
    REQUIRE(a.runs.size() == 4);
    for (std::size_t i = 0; i < a.runs.size(); ++i)
        for (const std::string& name : metric_names())
        {
            CHECK(a.runs[i].metrics.at(name).mean == b.runs[i].metrics.at(name).mean);
            CHECK(a.runs[i].metrics.at(name).stderr_ == b.runs[i].metrics.at(name).stderr_);
        }
    CHECK(a.runs[0].metrics.at("coeff_precision").mean == 1.0);
    CHECK(a.runs[0].metrics.at("coeff_recall").mean == 1.0);
    // error and coefficient cells are response x replicate
    CHECK(a.runs[1].metrics.at("test_error").count == 60);
    CHECK(a.runs[1].metrics.at("n_feat").count == 3);
    CHECK(a.replicate_seeds.size() == 3);

    plan.task = TaskKind::classification;
    plan.methods.resize(2);
    const ExperimentResult c = run_experiment(plan);
    CHECK(c.runs[1].metrics.at("test_error").mean < 0.5);
}

TEST_CASE("sweep picks the matched grid point")
{
    ScenarioSpec spec;
    spec.kind = ScenarioKind::independent;
    spec.m = 80;
    spec.n_test = 200;
    ExperimentPlan plan;
    plan.generator = spec;
    plan.replicates = 2;
    const SweepResult s = precision_matched_sweep(plan, {MethodKind::bonf_mic, {}, {}, 75},
                                                  {MethodKind::bonferroni, {}, {}, 75}, {0.01, 0.1, 1.0, 5.0});
    REQUIRE(s.precisions.size() == 4);
    REQUIRE(s.reference_precision.has_value());
    if (!s.flagged)
        CHECK(*s.chosen_precision <= *s.reference_precision);
    CHECK(std::find(s.grid.begin(), s.grid.end(), s.chosen) != s.grid.end());
    CHECK_THROWS_AS(precision_matched_sweep(plan, {}, {MethodKind::bonferroni, {}, {}, 75}, {}), DomainError);
}

TEST_CASE("cross-validation")
{
    ScenarioSpec spec;
    spec.kind = ScenarioKind::full;
    spec.m = 30;
    spec.h = 3;
    spec.n_test = 10;
    const SyntheticInstance inst = gen_scenario(spec);
    const CvResult cv = cross_validate(inst.x_train, inst.y_train, {MethodKind::full_mic, {}, {}, 75}, 5, true, 3);
    CHECK(cv.fold_errors.size() == 5);
    CHECK(cv.error.mean < 0.6);
    CHECK_THROWS_AS(cross_validate(inst.x_train, inst.y_train, {MethodKind::truth, {}, {}, 75}, 5, true, 3),
                    DomainError);
}
