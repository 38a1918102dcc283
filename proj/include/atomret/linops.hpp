#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "atomret/types.hpp"

namespace atomret {

/// Application counts of a linear operator. nMat = forward + adjoint.
struct OpCounter {
  std::int64_t forward_count = 0;
  std::int64_t adjoint_count = 0;

  std::int64_t nmat() const { return forward_count + adjoint_count; }
};

/// Abstract linear map M with adjoint M*.
///
/// `forward` and `adjoint` validate shapes and bump the application counter.
/// Composite operators count one application per constituent leaf operator,
/// so Compose(Dense, Dct) advances forward_count by 2 per call. The
/// `raw_*` entry points do the arithmetic only and are used by composites.
class LinOp {
 public:
  LinOp(Shape in, Shape out) : in_(in), out_(out) {}
  virtual ~LinOp() = default;
  LinOp(const LinOp&) = delete;
  LinOp& operator=(const LinOp&) = delete;

  Shape in_shape() const { return in_; }
  Shape out_shape() const { return out_; }

  Mat forward(const Mat& x) const;
  Mat adjoint(const Mat& y) const;

  /// M applied to the unit basis element with linear (column-major) index i.
  /// Counts as one forward application.
  Mat forward_unit(Index i) const;

  OpCounter counter_snapshot() const;
  void counter_reset() const;

  virtual std::string kind() const = 0;
  /// True when M* M = I on the input space.
  virtual bool is_isometry() const { return false; }
  /// Leaf operators applied per forward/adjoint call.
  virtual int leaf_count() const { return 1; }

  virtual Mat raw_forward(const Mat& x) const = 0;
  virtual Mat raw_adjoint(const Mat& y) const = 0;
  virtual Mat raw_forward_unit(Index i) const;

 private:
  Shape in_;
  Shape out_;
  // forward count in the high 32 bits, adjoint count in the low 32 bits, so a
  // snapshot is a single atomic load.
  mutable std::atomic<std::uint64_t> counts_{0};
};

using LinOpPtr = std::shared_ptr<const LinOp>;

class DenseOp : public LinOp {
 public:
  explicit DenseOp(Mat A);
  std::string kind() const override { return "dense"; }
  const Mat& matrix() const { return A_; }
  Mat raw_forward(const Mat& x) const override;
  Mat raw_adjoint(const Mat& y) const override;
  Mat raw_forward_unit(Index i) const override;

 private:
  Mat A_;
};

class IdentityOp : public LinOp {
 public:
  explicit IdentityOp(Shape s) : LinOp(s, s) {}
  explicit IdentityOp(Index n) : IdentityOp(Shape{n, 1}) {}
  std::string kind() const override { return "identity"; }
  bool is_isometry() const override { return true; }
  Mat raw_forward(const Mat& x) const override { return x; }
  Mat raw_adjoint(const Mat& y) const override { return y; }
};

/// Orthonormal type-II DCT, materialized as an n x n matrix.
class DctOp : public LinOp {
 public:
  explicit DctOp(Index n);
  std::string kind() const override { return "dct"; }
  bool is_isometry() const override { return true; }
  const Mat& matrix() const { return C_; }
  Mat raw_forward(const Mat& x) const override;
  Mat raw_adjoint(const Mat& y) const override;

 private:
  Mat C_;
};

/// Orthonormal Haar wavelet transform (full depth), n a power of two.
/// Output layout: [scaling coefficient, coarsest detail, ..., finest details].
class HaarOp : public LinOp {
 public:
  explicit HaarOp(Index n);
  std::string kind() const override { return "haar"; }
  bool is_isometry() const override { return true; }
  Mat raw_forward(const Mat& x) const override;
  Mat raw_adjoint(const Mat& y) const override;
};

/// Circular 1-D convolution with a fixed kernel.
class Conv1dOp : public LinOp {
 public:
  Conv1dOp(Vec kernel, Index n);
  std::string kind() const override { return "conv1d"; }
  Mat raw_forward(const Mat& x) const override;
  Mat raw_adjoint(const Mat& y) const override;

 private:
  Vec kernel_;
};

/// Dense m x n matrix with iid N(0, 1/m) entries drawn from a seeded
/// mt19937_64 stream; bit-reproducible for a fixed seed and toolchain.
class GaussianEnsembleOp : public DenseOp {
 public:
  GaussianEnsembleOp(Index m, Index n, std::uint64_t seed);
  std::string kind() const override { return "gaussian"; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

/// Entry mask on p x q matrices: keeps entries (i, j) in Omega and zeroes the
/// rest. Self-adjoint and idempotent.
class EntryMaskOp : public LinOp {
 public:
  /// Omega is sorted row-major on construction; duplicates and out-of-range
  /// entries are rejected.
  EntryMaskOp(std::vector<std::pair<Index, Index>> omega, Shape shape);
  std::string kind() const override { return "mask"; }
  const std::vector<std::pair<Index, Index>>& omega() const { return omega_; }
  /// Column-major linear indices of Omega, in Omega's order.
  const std::vector<Index>& linear_indices() const { return linear_; }
  Mat raw_forward(const Mat& x) const override;
  Mat raw_adjoint(const Mat& y) const override { return raw_forward(y); }
  Mat raw_forward_unit(Index i) const override;

 private:
  std::vector<std::pair<Index, Index>> omega_;
  std::vector<Index> linear_;
};

/// outer . inner
class ComposeOp : public LinOp {
 public:
  ComposeOp(LinOpPtr outer, LinOpPtr inner);
  std::string kind() const override { return "compose"; }
  bool is_isometry() const override { return outer_->is_isometry() && inner_->is_isometry(); }
  int leaf_count() const override { return outer_->leaf_count() + inner_->leaf_count(); }
  Mat raw_forward(const Mat& x) const override;
  Mat raw_adjoint(const Mat& y) const override;

 private:
  LinOpPtr outer_;
  LinOpPtr inner_;
};

/// [B_1 B_2 ... B_r] acting on the stacked input vector.
class HStackOp : public LinOp {
 public:
  explicit HStackOp(std::vector<LinOpPtr> blocks);
  std::string kind() const override { return "hstack"; }
  int leaf_count() const override;
  Mat raw_forward(const Mat& x) const override;
  Mat raw_adjoint(const Mat& y) const override;
  Mat raw_forward_unit(Index i) const override;

 private:
  std::vector<LinOpPtr> blocks_;
  std::vector<Index> offsets_;
};

/// Power-iteration estimate of the operator 2-norm. Uses the counted entry
/// points; callers that do not want setup work in nMat reset afterwards.
double operator_norm_estimate(const LinOp& op, int iterations, std::uint64_t seed = 7);

}  // namespace atomret
