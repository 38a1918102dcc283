// Serial reference kernels against their OpenMP counterparts. With one
// hardware thread the two should be within noise of each other; set
// OMP_NUM_THREADS to compare on larger machines.

#include <benchmark/benchmark.h>

#include <random>

#include "atomret/kernels.hpp"
#include "atomret/linops.hpp"

using namespace atomret;

namespace {

Mat random_mat(Index r, Index c, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  Mat A(r, c);
  for (Index i = 0; i < A.size(); ++i) A.data()[i] = n(rng);
  return A;
}

template <bool Parallel>
void BM_gemv(benchmark::State& st) {
  const Index m = st.range(0), n = 4 * st.range(0);
  const Mat A = random_mat(m, n, 1);
  const Mat x = random_mat(n, 1, 2);
  Mat y(m, 1);
  for (auto _ : st) {
    if constexpr (Parallel)
      kernels::gemv(A, kernels::view(x), kernels::view(y));
    else
      kernels::serial::gemv(A, kernels::view(x), kernels::view(y));
    benchmark::DoNotOptimize(y.data());
  }
  st.SetItemsProcessed(st.iterations() * m * n);
}

template <bool Parallel>
void BM_gemv_t(benchmark::State& st) {
  const Index m = st.range(0), n = 4 * st.range(0);
  const Mat A = random_mat(m, n, 1);
  const Mat x = random_mat(m, 1, 2);
  Mat y(n, 1);
  for (auto _ : st) {
    if constexpr (Parallel)
      kernels::gemv_t(A, kernels::view(x), kernels::view(y));
    else
      kernels::serial::gemv_t(A, kernels::view(x), kernels::view(y));
    benchmark::DoNotOptimize(y.data());
  }
  st.SetItemsProcessed(st.iterations() * m * n);
}

template <bool Parallel>
void BM_dot(benchmark::State& st) {
  const Mat a = random_mat(st.range(0), 1, 3), b = random_mat(st.range(0), 1, 4);
  for (auto _ : st) {
    double d = Parallel ? kernels::dot(kernels::view(a), kernels::view(b))
                        : kernels::serial::dot(kernels::view(a), kernels::view(b));
    benchmark::DoNotOptimize(d);
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void BM_top_k(benchmark::State& st) {
  const Mat s = random_mat(st.range(0), 1, 5);
  for (auto _ : st) {
    auto idx = Parallel ? kernels::top_k(kernels::view(s), 20) : kernels::serial::top_k(kernels::view(s), 20);
    benchmark::DoNotOptimize(idx.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void BM_conv(benchmark::State& st) {
  const Mat k = random_mat(16, 1, 6), x = random_mat(st.range(0), 1, 7);
  Mat out(st.range(0), 1);
  for (auto _ : st) {
    if constexpr (Parallel)
      kernels::circular_conv(kernels::view(k), kernels::view(x), kernels::view(out));
    else
      kernels::serial::circular_conv(kernels::view(k), kernels::view(x), kernels::view(out));
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0) * 16);
}

// End-to-end operator application with the nMat counter, as the solvers see it.
void BM_gaussian_adjoint(benchmark::State& st) {
  GaussianEnsembleOp op(600, 2560, 11);
  const Mat y = random_mat(600, 1, 8);
  for (auto _ : st) {
    Mat z = op.adjoint(y);
    benchmark::DoNotOptimize(z.data());
  }
}

}  // namespace

BENCHMARK(BM_gemv<false>)->Name("gemv/serial")->Arg(256)->Arg(600)->Arg(1024);
BENCHMARK(BM_gemv<true>)->Name("gemv/omp")->Arg(256)->Arg(600)->Arg(1024);
BENCHMARK(BM_gemv_t<false>)->Name("gemv_t/serial")->Arg(256)->Arg(600)->Arg(1024);
BENCHMARK(BM_gemv_t<true>)->Name("gemv_t/omp")->Arg(256)->Arg(600)->Arg(1024);
BENCHMARK(BM_dot<false>)->Name("dot/serial")->Arg(1 << 12)->Arg(1 << 18);
BENCHMARK(BM_dot<true>)->Name("dot/omp")->Arg(1 << 12)->Arg(1 << 18);
BENCHMARK(BM_top_k<false>)->Name("top_k/serial")->Arg(2560)->Arg(1 << 16);
BENCHMARK(BM_top_k<true>)->Name("top_k/omp")->Arg(2560)->Arg(1 << 16);
BENCHMARK(BM_conv<false>)->Name("circular_conv/serial")->Arg(1024)->Arg(1 << 16);
BENCHMARK(BM_conv<true>)->Name("circular_conv/omp")->Arg(1024)->Arg(1 << 16);
BENCHMARK(BM_gaussian_adjoint)->Name("gaussian_op/adjoint_600x2560");

BENCHMARK_MAIN();
