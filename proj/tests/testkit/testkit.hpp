#pragma once
// Brute-force reference oracles for tests. Deliberately naive and independent
// of the library: only Eigen containers and the standard library are used.

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace testkit {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct OracleConfig {
  std::uint64_t seed = 1;
  int max_dim = 8;         // exhaustive modes refuse larger inputs
  double kkt_tol = 1e-8;   // certificate tolerance of the reference solves
  double exact_tol = 1e-10;
};

struct OracleFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Dictionary { Signed, Nonneg };

/// inf { sum c_a : x = sum c_a a, c_a >= 0 } over {+-e_i} or {e_i}, by
/// enumerating atom subsets of size <= n. +infinity when x is outside the cone.
double gauge_lp_oracle(Dictionary dict, const Vec& x, const OracleConfig& cfg = {});

struct DenseSvd {
  Mat U, V;
  Vec s;  // descending
};
struct DenseEig {
  Mat V;
  Vec values;  // descending
};

/// Two-sided Jacobi on the triangular factor; min dimension <= 16.
DenseSvd dense_svd_oracle(const Mat& Z);
/// Cyclic Jacobi rotations on a symmetric matrix.
DenseEig dense_eig_oracle(const Mat& Z);

/// argmin ||G c - b|| via normal equations and Gaussian elimination
/// (minimum-norm through a tiny ridge when G has dependent columns).
Vec dense_least_squares(const Mat& G, const Vec& b);

enum class Form { P1, P2, P3 };

/// Small dense instance with f = 0.5 ||.||^2.
struct SmallProblem {
  Mat A;
  Vec b;
  Dictionary dict = Dictionary::Signed;
  Form form = Form::P1;
  double lambda = 1.0;
  double tau = 1.0;
  double alpha = 0.0;
};

struct ReferenceSolution {
  Vec x;
  Vec y;            // dual optimum (D3: normalized so max <a, A^T y> = 1)
  double p = 0.0;   // optimal primal value
  double d = 0.0;   // optimal dual value, p + d = 0
  double kkt = 0.0; // certificate residual
  std::vector<int> support;  // signed atom ids: +(i+1) for +e_i, -(i+1) for -e_i
};

/// Enumerates supports and sign patterns, solves each restricted problem in
/// closed form and keeps the best certified candidate. Throws OracleFailure
/// if the optimality certificate exceeds cfg.kkt_tol.
ReferenceSolution small_instance_reference_solve(const SmallProblem& prob, const OracleConfig& cfg = {});

/// Spectral P1: argmin 0.5 ||b - A vec(X)||^2 + lambda ||X||_* for min(m, n) <= 6
/// by long-run proximal gradient with the Jacobi SVD; certified by the fixed
/// point residual and the dual norm bound.
struct SpectralReference {
  Mat X;
  Vec y;
  double p = 0.0;
  double kkt = 0.0;
};
SpectralReference spectral_reference_solve(const Mat& A, const Vec& b, int rows, int cols, double lambda,
                                           const OracleConfig& cfg = {});

/// sup_{a in A1} inf_{a2} ||a - a2|| against the unit rank-one atoms
/// {u v^T : u in range U, v in range V}, via 2 - 2 sigma_max(U^T a V).
double one_sided_hausdorff(const std::vector<Mat>& A1, const Mat& U, const Mat& V);
/// Same against a finite list of atoms.
double one_sided_hausdorff(const std::vector<Mat>& A1, const std::vector<Mat>& A2);

/// Samples unit rank-one atoms u v^T with u^T Z v >= sigma_1(Z) - eps: grid
/// rotations of the top singular pair towards every other pair, plus random
/// directions that pass the filter.
std::vector<Mat> sample_exposed_rank1(const Mat& Z, double eps, int grid, int random_draws, std::uint64_t seed);

}  // namespace testkit
