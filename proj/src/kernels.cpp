#include "atomret/kernels.hpp"

#include <algorithm>
#include <cassert>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace atomret::kernels {

namespace {

constexpr std::ptrdiff_t kDotChunk = 4096;
constexpr std::ptrdiff_t kRowBlock = 256;

bool ranks_before(std::span<const double> s, Index a, Index b) {
  if (s[a] != s[b]) return s[a] > s[b];
  return a < b;
}

void select_top(std::span<const double> scores, std::vector<Index>& cand, Index k) {
  auto cmp = [&](Index a, Index b) { return ranks_before(scores, a, b); };
  if (static_cast<Index>(cand.size()) > k) {
    std::nth_element(cand.begin(), cand.begin() + k, cand.end(), cmp);
    cand.resize(k);
  }
  std::sort(cand.begin(), cand.end(), cmp);
}

}  // namespace

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void gemv(const Mat& A, std::span<const double> x, std::span<double> y) {
  const std::ptrdiff_t m = A.rows();
  const std::ptrdiff_t n = A.cols();
  assert(static_cast<std::ptrdiff_t>(x.size()) == n);
  assert(static_cast<std::ptrdiff_t>(y.size()) == m);
  const std::ptrdiff_t blocks = (m + kRowBlock - 1) / kRowBlock;
  const double* a = A.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t blk = 0; blk < blocks; ++blk) {
    const std::ptrdiff_t r0 = blk * kRowBlock;
    const std::ptrdiff_t r1 = std::min(m, r0 + kRowBlock);
    for (std::ptrdiff_t i = r0; i < r1; ++i) y[i] = 0.0;
    for (std::ptrdiff_t j = 0; j < n; ++j) {
      const double xj = x[j];
      const double* col = a + j * m;
      for (std::ptrdiff_t i = r0; i < r1; ++i) y[i] += col[i] * xj;
    }
  }
}

void gemv_t(const Mat& A, std::span<const double> x, std::span<double> y) {
  const std::ptrdiff_t m = A.rows();
  const std::ptrdiff_t n = A.cols();
  assert(static_cast<std::ptrdiff_t>(x.size()) == m);
  assert(static_cast<std::ptrdiff_t>(y.size()) == n);
  const double* a = A.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    const double* col = a + j * m;
    double s = 0.0;
    for (std::ptrdiff_t i = 0; i < m; ++i) s += col[i] * x[i];
    y[j] = s;
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(a.size());
  const std::ptrdiff_t chunks = (n + kDotChunk - 1) / kDotChunk;
  std::vector<double> partial(static_cast<size_t>(chunks), 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < chunks; ++c) {
    const std::ptrdiff_t i0 = c * kDotChunk;
    const std::ptrdiff_t i1 = std::min(n, i0 + kDotChunk);
    double s = 0.0;
    for (std::ptrdiff_t i = i0; i < i1; ++i) s += a[i] * b[i];
    partial[c] = s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

std::vector<Index> top_k(std::span<const double> scores, Index k) {
  const Index n = static_cast<Index>(scores.size());
  k = std::clamp<Index>(k, 0, n);
  if (k == 0) return {};
  const int threads = max_threads();
  if (threads <= 1 || n < 8192) return serial::top_k(scores, k);

  // Each block keeps its own top-k; the merged candidates contain the global top-k.
  const Index blocks = threads;
  const Index per = (n + blocks - 1) / blocks;
  std::vector<std::vector<Index>> local(static_cast<size_t>(blocks));
#pragma omp parallel for schedule(static)
  for (Index blk = 0; blk < blocks; ++blk) {
    const Index i0 = blk * per;
    const Index i1 = std::min(n, i0 + per);
    auto& cand = local[blk];
    for (Index i = i0; i < i1; ++i) cand.push_back(i);
    select_top(scores, cand, k);
  }
  std::vector<Index> merged;
  for (auto& l : local) merged.insert(merged.end(), l.begin(), l.end());
  select_top(scores, merged, k);
  return merged;
}

void circular_conv(std::span<const double> kernel, std::span<const double> x,
                   std::span<double> out) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
  const std::ptrdiff_t len = static_cast<std::ptrdiff_t>(kernel.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::ptrdiff_t j = 0; j < len; ++j) s += kernel[j] * x[((i - j) % n + n) % n];
    out[i] = s;
  }
}

void circular_corr(std::span<const double> kernel, std::span<const double> y,
                   std::span<double> out) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(y.size());
  const std::ptrdiff_t len = static_cast<std::ptrdiff_t>(kernel.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::ptrdiff_t j = 0; j < len; ++j) s += kernel[j] * y[(i + j) % n];
    out[i] = s;
  }
}

void mask_copy(std::span<const Index> idx, std::span<const double> x, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const std::ptrdiff_t t_end = static_cast<std::ptrdiff_t>(idx.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t t = 0; t < t_end; ++t) out[idx[t]] = x[idx[t]];
}

namespace serial {

void gemv(const Mat& A, std::span<const double> x, std::span<double> y) {
  const Index m = A.rows();
  std::fill(y.begin(), y.end(), 0.0);
  for (Index j = 0; j < A.cols(); ++j)
    for (Index i = 0; i < m; ++i) y[i] += A(i, j) * x[j];
}

void gemv_t(const Mat& A, std::span<const double> x, std::span<double> y) {
  for (Index j = 0; j < A.cols(); ++j) {
    double s = 0.0;
    for (Index i = 0; i < A.rows(); ++i) s += A(i, j) * x[i];
    y[j] = s;
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  // same chunked association as the parallel kernel, so results match bitwise
  double total = 0.0;
  for (size_t i0 = 0; i0 < a.size(); i0 += kDotChunk) {
    const size_t i1 = std::min(a.size(), i0 + static_cast<size_t>(kDotChunk));
    double s = 0.0;
    for (size_t i = i0; i < i1; ++i) s += a[i] * b[i];
    total += s;
  }
  return total;
}

std::vector<Index> top_k(std::span<const double> scores, Index k) {
  const Index n = static_cast<Index>(scores.size());
  k = std::clamp<Index>(k, 0, n);
  std::vector<Index> all(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) all[i] = i;
  std::partial_sort(all.begin(), all.begin() + k, all.end(),
                    [&](Index a, Index b) { return ranks_before(scores, a, b); });
  all.resize(k);
  return all;
}

void circular_conv(std::span<const double> kernel, std::span<const double> x,
                   std::span<double> out) {
  const Index n = static_cast<Index>(x.size());
  for (Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Index j = 0; j < static_cast<Index>(kernel.size()); ++j)
      s += kernel[j] * x[((i - j) % n + n) % n];
    out[i] = s;
  }
}

void circular_corr(std::span<const double> kernel, std::span<const double> y,
                   std::span<double> out) {
  const Index n = static_cast<Index>(y.size());
  for (Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Index j = 0; j < static_cast<Index>(kernel.size()); ++j) s += kernel[j] * y[(i + j) % n];
    out[i] = s;
  }
}

void mask_copy(std::span<const Index> idx, std::span<const double> x, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (Index t : idx) out[t] = x[t];
}

}  // namespace serial

}  // namespace atomret::kernels
