// Serial reference kernels against their OpenMP versions on scenario-sized inputs.

#include "micsel/kernels.hpp"
#include "micsel/rng.hpp"

#include <benchmark/benchmark.h>

#include <vector>

namespace
{

using namespace micsel;

struct Fixture
{
    Matrix x;
    Matrix y;
    Matrix residuals;
    std::vector<Matrix> bases;
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> in_model;
    std::vector<bool> active;
    kernels::CandidateInputs inputs;

    Fixture(Index n, Index m, Index h)
    {
        Stream s(7, "bench/x");
        x = Matrix(n, m + 1);
        x.col(0).setOnes();
        x.rightCols(m) = s.normal_matrix(n, m);
        y = Stream(7, "bench/y").normal_matrix(n, h);
        in_model = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(m + 1, h, false);
        residuals = Matrix(n, h);
        for (Index r = 0; r < h; ++r)
        {
            // intercept plus features r+1 and r+2
            in_model(r + 1, r) = in_model(r + 2, r) = true;
            Matrix d(n, 3);
            d << x.col(0), x.col(r + 1), x.col(r + 2);
            Eigen::HouseholderQR<Matrix> qr(d);
            Matrix q = qr.householderQ() * Matrix::Identity(n, 3);
            residuals.col(r) = y.col(r) - q * (q.transpose() * y.col(r));
            bases.push_back(std::move(q));
        }
        active.assign(static_cast<std::size_t>(h), true);
        inputs = {&x, &residuals, &bases, &in_model, &active};
    }
};

const Fixture& fixture()
{
    static const Fixture f(100, 2000, 20);
    return f;
}

void BM_gain_table_serial(benchmark::State& state)
{
    const Fixture& f = fixture();
    for (auto _ : state)
        benchmark::DoNotOptimize(kernels::score_candidates_serial(f.inputs));
}

void BM_gain_table_parallel(benchmark::State& state)
{
    const Fixture& f = fixture();
    for (auto _ : state)
        benchmark::DoNotOptimize(kernels::score_candidates_parallel(f.inputs));
}

void BM_pvalues_serial(benchmark::State& state)
{
    const Fixture& f = fixture();
    const Matrix features = f.x.rightCols(f.x.cols() - 1);
    for (auto _ : state)
        benchmark::DoNotOptimize(kernels::pvalue_matrix_serial(features, f.y));
}

void BM_pvalues_parallel(benchmark::State& state)
{
    const Fixture& f = fixture();
    const Matrix features = f.x.rightCols(f.x.cols() - 1);
    for (auto _ : state)
        benchmark::DoNotOptimize(kernels::pvalue_matrix_parallel(features, f.y));
}

} // namespace

BENCHMARK(BM_gain_table_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_gain_table_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_pvalues_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_pvalues_parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
