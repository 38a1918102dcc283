#pragma once

// Data-parallel inner loops. Each kernel has an OpenMP implementation (the
// one the library calls) and a plain serial reference in `kernels::serial`
// that the tests compare against and the benchmark times.
//
// All parallel kernels are deterministic: the work split never changes the
// order of floating-point accumulation for a given output element, and
// reductions use a fixed chunking that does not depend on the thread count.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "atomret/types.hpp"

namespace atomret::kernels {

/// y = A x. A is column-major rows x cols.
void gemv(const Mat& A, std::span<const double> x, std::span<double> y);

/// y = A^T x.
void gemv_t(const Mat& A, std::span<const double> x, std::span<double> y);

/// Sum of a[i] * b[i] using fixed 4096-element chunks.
double dot(std::span<const double> a, std::span<const double> b);

/// Indices of the k largest scores, ordered by (score desc, index asc).
std::vector<Index> top_k(std::span<const double> scores, Index k);

/// Circular 1-D convolution out[i] = sum_j kernel[j] * x[(i - j) mod n].
void circular_conv(std::span<const double> kernel, std::span<const double> x,
                   std::span<double> out);

/// Circular correlation (adjoint of circular_conv):
/// out[i] = sum_j kernel[j] * y[(i + j) mod n].
void circular_corr(std::span<const double> kernel, std::span<const double> y,
                   std::span<double> out);

/// out[idx[t]] = x[idx[t]] for each listed linear index, zero elsewhere.
void mask_copy(std::span<const Index> idx, std::span<const double> x, std::span<double> out);

namespace serial {

void gemv(const Mat& A, std::span<const double> x, std::span<double> y);
void gemv_t(const Mat& A, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> a, std::span<const double> b);
std::vector<Index> top_k(std::span<const double> scores, Index k);
void circular_conv(std::span<const double> kernel, std::span<const double> x,
                   std::span<double> out);
void circular_corr(std::span<const double> kernel, std::span<const double> y,
                   std::span<double> out);
void mask_copy(std::span<const Index> idx, std::span<const double> x, std::span<double> out);

}  // namespace serial

/// Number of OpenMP threads available (1 when built without OpenMP).
int max_threads();

inline std::span<const double> view(const Mat& m) { return {m.data(), static_cast<size_t>(m.size())}; }
inline std::span<double> view(Mat& m) { return {m.data(), static_cast<size_t>(m.size())}; }

}  // namespace atomret::kernels
