#include <numeric>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "plexp/kernels.hpp"

namespace {

struct Fixture {
  Eigen::MatrixXd X;
  Eigen::VectorXd v;
  std::vector<int> cols;

  Fixture(int n, int p) : X(n, p), v(n), cols(p) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    for (Eigen::Index j = 0; j < X.cols(); ++j)
      for (Eigen::Index i = 0; i < X.rows(); ++i) X(i, j) = nd(rng);
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = nd(rng);
    std::iota(cols.begin(), cols.end(), 0);
  }
};

template <bool Parallel>
void BM_ColumnDots(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  Eigen::VectorXd out(f.cols.size());
  for (auto _ : state) {
    if constexpr (Parallel)
      plexp::kernels::omp::column_dots(f.X, f.cols, f.v, out);
    else
      plexp::kernels::serial::column_dots(f.X, f.cols, f.v, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_ColumnCombination(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  Eigen::VectorXd coef = Eigen::VectorXd::Constant(f.cols.size(), 0.5);
  Eigen::VectorXd out(f.X.rows());
  for (auto _ : state) {
    if constexpr (Parallel)
      plexp::kernels::omp::column_combination(f.X, f.cols, coef, out);
    else
      plexp::kernels::serial::column_combination(f.X, f.cols, coef, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_ExpectileTerms(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)), 1);
  Eigen::VectorXd psi(f.v.size());
  const plexp::ExpectileLevel a{0.1};
  for (auto _ : state) {
    double s;
    if constexpr (Parallel)
      s = plexp::kernels::omp::expectile_terms(f.v, a, psi);
    else
      s = plexp::kernels::serial::expectile_terms(f.v, a, psi);
    benchmark::DoNotOptimize(s);
  }
}

}  // namespace

BENCHMARK(BM_ColumnDots<false>)->Args({300, 400})->Args({3000, 600})->Args({20000, 600});
BENCHMARK(BM_ColumnDots<true>)->Args({300, 400})->Args({3000, 600})->Args({20000, 600});
BENCHMARK(BM_ColumnCombination<false>)->Args({300, 400})->Args({3000, 600})->Args({20000, 600});
BENCHMARK(BM_ColumnCombination<true>)->Args({300, 400})->Args({3000, 600})->Args({20000, 600});
BENCHMARK(BM_ExpectileTerms<false>)->Arg(3000)->Arg(1 << 20);
BENCHMARK(BM_ExpectileTerms<true>)->Arg(3000)->Arg(1 << 20);

BENCHMARK_MAIN();
