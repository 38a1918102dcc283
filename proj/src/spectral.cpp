#include "atomret/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace atomret {

namespace {

void check_k(Index k, Index limit, const char* what) {
  if (k < 1 || k > limit)
    throw ArgumentError(std::string(what) + ": k = " + std::to_string(k) + " outside [1, " +
                        std::to_string(limit) + "]");
}

bool use_dense(const SpectralOptions& o, Index min_dim) {
  if (o.mode == SpectralMode::Dense) return true;
  if (o.mode == SpectralMode::Lanczos) return false;
  return min_dim <= o.dense_threshold;
}

// Orthogonalize v against the first `count` columns of B twice (classical
// Gram-Schmidt with one reorthogonalization pass).
void reorthogonalize(const Mat& B, Index count, Vec& v) {
  if (count == 0) return;
  for (int pass = 0; pass < 2; ++pass) {
    const Vec c = B.leftCols(count).transpose() * v;
    v.noalias() -= B.leftCols(count) * c;
  }
}

// A unit vector orthogonal to the first `count` columns of B, used to restart
// after breakdown (invariant subspace found).
Vec fresh_direction(const Mat& B, Index count, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Vec v(B.rows());
    for (Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
    reorthogonalize(B, count, v);
    const double nv = v.norm();
    if (nv > 1e-8) return v / nv;
  }
  throw NumericalError("Lanczos: failed to find a fresh orthogonal direction");
}

Vec random_unit(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v / v.norm();
}

}  // namespace

TruncatedSvd truncated_svd(const Mat& Z, Index k, const SpectralOptions& opts) {
  const Index min_dim = std::min(Z.rows(), Z.cols());
  check_k(k, min_dim, "truncated_svd");
  if (!Z.allFinite()) throw NumericalError("truncated_svd: non-finite input");
  if (use_dense(opts, min_dim)) {
    Eigen::JacobiSVD<Mat> svd(Z, Eigen::ComputeThinU | Eigen::ComputeThinV);
    TruncatedSvd out;
    out.U = svd.matrixU().leftCols(k);
    out.S = svd.singularValues().head(k);
    out.V = svd.matrixV().leftCols(k);
    out.sigma_next_bound = k < min_dim ? svd.singularValues()[k] : 0.0;
    return out;
  }
  MatrixAction act{Z.rows(), Z.cols(), [&Z](const Vec& x) -> Vec { return Z * x; },
                   [&Z](const Vec& y) -> Vec { return Z.transpose() * y; }};
  return truncated_svd(act, k, opts);
}

TruncatedSvd truncated_svd(const MatrixAction& Z, Index k, const SpectralOptions& opts) {
  const Index m = Z.rows;
  const Index n = Z.cols;
  const Index min_dim = std::min(m, n);
  check_k(k, min_dim, "truncated_svd");

  std::mt19937_64 rng(opts.seed);
  Mat P(m, min_dim + 1), Q(n, min_dim + 1);
  Vec alpha = Vec::Zero(min_dim), beta = Vec::Zero(min_dim);

  Q.col(0) = random_unit(n, rng);
  Vec u = Z.apply(Q.col(0));
  double scale = 0.0;  // running estimate of sigma_1 used for relative tests

  Eigen::JacobiSVD<Mat> small;
  Index p = 0;
  double best_residual = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < min_dim; ++j) {
    // u currently holds Z q_j - beta_{j-1} p_{j-1}
    reorthogonalize(P, j, u);
    alpha[j] = u.norm();
    scale = std::max(scale, alpha[j]);
    if (alpha[j] <= 1e-14 * std::max(scale, 1.0)) {
      alpha[j] = 0.0;
      P.col(j) = fresh_direction(P, j, rng);
    } else {
      P.col(j) = u / alpha[j];
    }
    Vec v = Z.apply_transpose(P.col(j)) - alpha[j] * Q.col(j);
    reorthogonalize(Q, j + 1, v);
    beta[j] = v.norm();
    scale = std::max(scale, beta[j]);
    p = j + 1;
    const bool exhausted = (p == min_dim);
    // When P spans all of R^m (m < n) the residual beta_j q_{j+1} is not a
    // convergence error: Z = P [B, beta_j e_p] Q_{p+1}^T holds exactly.
    const bool extend = exhausted && beta[j] > 1e-14 * std::max(scale, 1.0);
    if (extend) Q.col(j + 1) = v / beta[j];
    if (!exhausted) {
      if (beta[j] <= 1e-14 * std::max(scale, 1.0)) {
        beta[j] = 0.0;
        Q.col(j + 1) = fresh_direction(Q, j + 1, rng);
      } else {
        Q.col(j + 1) = v / beta[j];
      }
    }

    const Index need = std::min(k + 1, min_dim);
    if (p < need && !exhausted) {
      u = Z.apply(Q.col(j + 1)) - beta[j] * P.col(j);
      continue;
    }
    const Index qcols = extend ? p + 1 : p;
    Mat B = Mat::Zero(p, qcols);
    for (Index i = 0; i < p; ++i) {
      B(i, i) = alpha[i];
      if (i + 1 < qcols) B(i, i + 1) = beta[i];
    }
    small.compute(B, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec& s = small.singularValues();
    const double tol = opts.tol * std::max(s[0], 1e-300);
    const double resid_scale = exhausted ? 0.0 : beta[j];
    double worst = 0.0;
    for (Index i = 0; i < need; ++i)
      worst = std::max(worst, resid_scale * std::abs(small.matrixU()(p - 1, i)));
    best_residual = std::min(best_residual, worst);
    if (worst <= tol || exhausted) {
      TruncatedSvd out;
      out.U = P.leftCols(p) * small.matrixU().leftCols(k);
      out.V = Q.leftCols(qcols) * small.matrixV().leftCols(k);
      out.S = s.head(k);
      out.steps = static_cast<int>(p);
      if (k < min_dim) {
        const double r = resid_scale * std::abs(small.matrixU()(p - 1, k));
        out.sigma_next_bound = (k < p ? s[k] : 0.0) + r;
      }
      return out;
    }
    u = Z.apply(Q.col(j + 1)) - beta[j] * P.col(j);
  }
  throw NumericalError("truncated_svd: Lanczos did not converge; best residual " +
                       std::to_string(best_residual));
}

TruncatedEig truncated_eig_sym(const Mat& Z, Index k, const SpectralOptions& opts) {
  if (Z.rows() != Z.cols()) throw DimensionError("truncated_eig_sym: matrix not square");
  const Index n = Z.rows();
  check_k(k, n, "truncated_eig_sym");
  if (!Z.allFinite()) throw NumericalError("truncated_eig_sym: non-finite input");
  const double asym = (Z - Z.transpose()).cwiseAbs().maxCoeff();
  if (asym > Tolerances::symmetry * std::max(1.0, Z.cwiseAbs().maxCoeff()))
    throw ArgumentError("truncated_eig_sym: matrix not symmetric");
  if (use_dense(opts, n)) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (Z + Z.transpose()));
    TruncatedEig out;
    out.V.resize(n, k);
    out.values.resize(k);
    for (Index i = 0; i < k; ++i) {
      out.values[i] = es.eigenvalues()[n - 1 - i];
      out.V.col(i) = es.eigenvectors().col(n - 1 - i);
    }
    if (k < n) out.lambda_next_bound = es.eigenvalues()[n - 1 - k];
    return out;
  }
  MatrixAction act{n, n, [&Z](const Vec& x) -> Vec { return Z * x; }, {}};
  return truncated_eig_sym(act, k, opts);
}

TruncatedEig truncated_eig_sym(const MatrixAction& Z, Index k, const SpectralOptions& opts) {
  const Index n = Z.rows;
  if (Z.cols != n) throw DimensionError("truncated_eig_sym: operator not square");
  check_k(k, n, "truncated_eig_sym");

  std::mt19937_64 rng(opts.seed);
  Mat Q(n, n + 1);
  Vec a = Vec::Zero(n), b = Vec::Zero(n);
  Q.col(0) = random_unit(n, rng);
  double scale = 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> small;
  double best_residual = std::numeric_limits<double>::infinity();

  for (Index j = 0; j < n; ++j) {
    Vec w = Z.apply(Q.col(j));
    a[j] = Q.col(j).dot(w);
    reorthogonalize(Q, j + 1, w);
    b[j] = w.norm();
    scale = std::max({scale, std::abs(a[j]), b[j]});
    const Index p = j + 1;
    const bool exhausted = (p == n);
    if (!exhausted) {
      if (b[j] <= 1e-14 * std::max(scale, 1.0)) {
        b[j] = 0.0;
        Q.col(j + 1) = fresh_direction(Q, j + 1, rng);
      } else {
        Q.col(j + 1) = w / b[j];
      }
    }
    const Index need = std::min(k + 1, n);
    if (p < need && !exhausted) continue;

    Mat T = Mat::Zero(p, p);
    for (Index i = 0; i < p; ++i) {
      T(i, i) = a[i];
      if (i + 1 < p) T(i, i + 1) = T(i + 1, i) = b[i];
    }
    small.compute(T);
    const Vec& ev = small.eigenvalues();  // ascending
    const double top = std::max(std::abs(ev[p - 1]), std::abs(ev[0]));
    const double tol = opts.tol * std::max(top, 1e-300);
    const double resid_scale = exhausted ? 0.0 : b[j];
    double worst = 0.0;
    for (Index i = 0; i < std::min(need, p); ++i)
      worst = std::max(worst, resid_scale * std::abs(small.eigenvectors()(p - 1, p - 1 - i)));
    best_residual = std::min(best_residual, worst);
    if (worst <= tol || exhausted) {
      TruncatedEig out;
      out.V.resize(n, k);
      out.values.resize(k);
      for (Index i = 0; i < k; ++i) {
        out.values[i] = ev[p - 1 - i];
        out.V.col(i) = Q.leftCols(p) * small.eigenvectors().col(p - 1 - i);
      }
      out.steps = static_cast<int>(p);
      if (k < n && k < p)
        out.lambda_next_bound = ev[p - 1 - k] + resid_scale * std::abs(small.eigenvectors()(p - 1, p - 1 - k));
      return out;
    }
  }
  throw NumericalError("truncated_eig_sym: Lanczos did not converge; best residual " +
                       std::to_string(best_residual));
}

}  // namespace atomret
