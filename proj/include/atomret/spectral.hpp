#pragma once

#include <cstdint>
#include <functional>

#include "atomret/types.hpp"

namespace atomret {

/// Rank-k truncation of an SVD: Z ~ U diag(S) V^T.
struct TruncatedSvd {
  Mat U;  // m x k, orthonormal columns
  Vec S;  // k values, nonincreasing, nonnegative
  Mat V;  // n x k, orthonormal columns
  /// Upper estimate of sigma_{k+1}: exact in dense mode, Ritz value plus
  /// residual in Lanczos mode. Zero when k = min(m, n).
  double sigma_next_bound = 0.0;
  /// Lanczos steps taken (0 in dense mode).
  int steps = 0;
};

/// Top-k eigenpairs (largest algebraic) of a symmetric matrix.
struct TruncatedEig {
  Mat V;      // n x k, orthonormal columns
  Vec values; // k values, nonincreasing
  double lambda_next_bound = -std::numeric_limits<double>::infinity();
  int steps = 0;
};

enum class SpectralMode { Auto, Dense, Lanczos };

struct SpectralOptions {
  double tol = 1e-10;  // relative residual tolerance (scaled by the top value)
  SpectralMode mode = SpectralMode::Auto;
  Index dense_threshold = 64;  // Auto uses dense when min(m, n) <= threshold
  std::uint64_t seed = 0x5eed;
};

/// Matrix given only through its action. apply: R^cols -> R^rows.
struct MatrixAction {
  Index rows = 0;
  Index cols = 0;
  std::function<Vec(const Vec&)> apply;
  std::function<Vec(const Vec&)> apply_transpose;
};

TruncatedSvd truncated_svd(const Mat& Z, Index k, const SpectralOptions& opts = {});

/// Golub-Kahan-Lanczos bidiagonalization with full reorthogonalization.
TruncatedSvd truncated_svd(const MatrixAction& Z, Index k, const SpectralOptions& opts = {});

TruncatedEig truncated_eig_sym(const Mat& Z, Index k, const SpectralOptions& opts = {});

/// Symmetric Lanczos with full reorthogonalization; apply_transpose is unused.
TruncatedEig truncated_eig_sym(const MatrixAction& Z, Index k, const SpectralOptions& opts = {});

}  // namespace atomret
