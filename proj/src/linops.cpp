#include "atomret/linops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "atomret/kernels.hpp"

namespace atomret {

namespace {

constexpr std::uint64_t kForwardUnit = std::uint64_t{1} << 32;

bool is_power_of_two(Index n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

Mat LinOp::forward(const Mat& x) const {
  require_shape(x, in_, "LinOp::forward");
  counts_.fetch_add(kForwardUnit * static_cast<std::uint64_t>(leaf_count()), std::memory_order_relaxed);
  return raw_forward(x);
}

Mat LinOp::adjoint(const Mat& y) const {
  require_shape(y, out_, "LinOp::adjoint");
  counts_.fetch_add(static_cast<std::uint64_t>(leaf_count()), std::memory_order_relaxed);
  return raw_adjoint(y);
}

Mat LinOp::forward_unit(Index i) const {
  if (i < 0 || i >= in_.size()) throw ArgumentError("forward_unit: index out of range");
  counts_.fetch_add(kForwardUnit * static_cast<std::uint64_t>(leaf_count()), std::memory_order_relaxed);
  return raw_forward_unit(i);
}

Mat LinOp::raw_forward_unit(Index i) const {
  Mat e = Mat::Zero(in_.rows, in_.cols);
  e.data()[i] = 1.0;
  return raw_forward(e);
}

OpCounter LinOp::counter_snapshot() const {
  const std::uint64_t c = counts_.load(std::memory_order_acquire);
  return {static_cast<std::int64_t>(c >> 32), static_cast<std::int64_t>(c & 0xffffffffu)};
}

void LinOp::counter_reset() const { counts_.store(0, std::memory_order_release); }

// ---------------------------------------------------------------- Dense

DenseOp::DenseOp(Mat A) : LinOp({A.cols(), 1}, {A.rows(), 1}), A_(std::move(A)) {
  if (A_.size() == 0) throw DimensionError("DenseOp: empty matrix");
}

Mat DenseOp::raw_forward(const Mat& x) const {
  Mat y(A_.rows(), 1);
  kernels::gemv(A_, kernels::view(x), kernels::view(y));
  return y;
}

Mat DenseOp::raw_adjoint(const Mat& y) const {
  Mat x(A_.cols(), 1);
  kernels::gemv_t(A_, kernels::view(y), kernels::view(x));
  return x;
}

Mat DenseOp::raw_forward_unit(Index i) const { return A_.col(i); }

// ---------------------------------------------------------------- DCT

DctOp::DctOp(Index n) : LinOp({n, 1}, {n, 1}), C_(n, n) {
  if (n <= 0) throw DimensionError("DctOp: n must be positive");
  const double w0 = std::sqrt(1.0 / static_cast<double>(n));
  const double wk = std::sqrt(2.0 / static_cast<double>(n));
  for (Index k = 0; k < n; ++k)
    for (Index j = 0; j < n; ++j)
      C_(k, j) = (k == 0 ? w0 : wk) *
                 std::cos(std::numbers::pi * static_cast<double>((2 * j + 1) * k) /
                          static_cast<double>(2 * n));
}

Mat DctOp::raw_forward(const Mat& x) const {
  Mat y(C_.rows(), 1);
  kernels::gemv(C_, kernels::view(x), kernels::view(y));
  return y;
}

Mat DctOp::raw_adjoint(const Mat& y) const {
  Mat x(C_.cols(), 1);
  kernels::gemv_t(C_, kernels::view(y), kernels::view(x));
  return x;
}

// ---------------------------------------------------------------- Haar

HaarOp::HaarOp(Index n) : LinOp({n, 1}, {n, 1}) {
  if (!is_power_of_two(n)) throw DimensionError("HaarOp: n must be a power of two");
}

Mat HaarOp::raw_forward(const Mat& x) const {
  const Index n = x.rows();
  Vec a = x.col(0);
  Vec tmp(n);
  const double r = std::numbers::sqrt2 / 2.0;
  for (Index len = n; len > 1; len /= 2) {
    const Index half = len / 2;
    for (Index i = 0; i < half; ++i) {
      tmp[i] = r * (a[2 * i] + a[2 * i + 1]);
      tmp[half + i] = r * (a[2 * i] - a[2 * i + 1]);
    }
    a.head(len) = tmp.head(len);
  }
  return a;
}

Mat HaarOp::raw_adjoint(const Mat& y) const {
  const Index n = y.rows();
  Vec a = y.col(0);
  Vec tmp(n);
  const double r = std::numbers::sqrt2 / 2.0;
  for (Index len = 2; len <= n; len *= 2) {
    const Index half = len / 2;
    for (Index i = 0; i < half; ++i) {
      tmp[2 * i] = r * (a[i] + a[half + i]);
      tmp[2 * i + 1] = r * (a[i] - a[half + i]);
    }
    a.head(len) = tmp.head(len);
  }
  return a;
}

// ---------------------------------------------------------------- Conv1d

Conv1dOp::Conv1dOp(Vec kernel, Index n) : LinOp({n, 1}, {n, 1}), kernel_(std::move(kernel)) {
  if (n <= 0) throw DimensionError("Conv1dOp: n must be positive");
  if (kernel_.size() == 0 || kernel_.size() > n) throw ArgumentError("Conv1dOp: kernel length must be in [1, n]");
}

Mat Conv1dOp::raw_forward(const Mat& x) const {
  Mat y(x.rows(), 1);
  kernels::circular_conv({kernel_.data(), static_cast<size_t>(kernel_.size())}, kernels::view(x),
                         kernels::view(y));
  return y;
}

Mat Conv1dOp::raw_adjoint(const Mat& y) const {
  Mat x(y.rows(), 1);
  kernels::circular_corr({kernel_.data(), static_cast<size_t>(kernel_.size())}, kernels::view(y),
                         kernels::view(x));
  return x;
}

// ---------------------------------------------------------------- Gaussian

namespace {

Mat gaussian_matrix(Index m, Index n, std::uint64_t seed) {
  if (m <= 0 || n <= 0) throw DimensionError("GaussianEnsembleOp: dimensions must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(m)));
  Mat A(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) A(i, j) = normal(rng);
  return A;
}

}  // namespace

GaussianEnsembleOp::GaussianEnsembleOp(Index m, Index n, std::uint64_t seed)
    : DenseOp(gaussian_matrix(m, n, seed)), seed_(seed) {}

// ---------------------------------------------------------------- Mask

EntryMaskOp::EntryMaskOp(std::vector<std::pair<Index, Index>> omega, Shape shape)
    : LinOp(shape, shape), omega_(std::move(omega)) {
  if (shape.rows <= 0 || shape.cols <= 0) throw DimensionError("EntryMaskOp: empty shape");
  std::sort(omega_.begin(), omega_.end());
  for (size_t t = 0; t < omega_.size(); ++t) {
    const auto [i, j] = omega_[t];
    if (i < 0 || i >= shape.rows || j < 0 || j >= shape.cols)
      throw ArgumentError("EntryMaskOp: index out of range");
    if (t > 0 && omega_[t - 1] == omega_[t]) throw ArgumentError("EntryMaskOp: duplicate index");
    linear_.push_back(i + j * shape.rows);
  }
}

Mat EntryMaskOp::raw_forward(const Mat& x) const {
  Mat y(x.rows(), x.cols());
  kernels::mask_copy(linear_, kernels::view(x), kernels::view(y));
  return y;
}

Mat EntryMaskOp::raw_forward_unit(Index i) const {
  const Shape s = in_shape();
  Mat y = Mat::Zero(s.rows, s.cols);
  if (std::binary_search(omega_.begin(), omega_.end(), std::pair<Index, Index>{i % s.rows, i / s.rows}))
    y.data()[i] = 1.0;
  return y;
}

// ---------------------------------------------------------------- Compose

ComposeOp::ComposeOp(LinOpPtr outer, LinOpPtr inner)
    : LinOp(inner->in_shape(), outer->out_shape()), outer_(std::move(outer)), inner_(std::move(inner)) {
  if (inner_->out_shape() != outer_->in_shape())
    throw DimensionError("ComposeOp: inner output " + to_string(inner_->out_shape()) +
                         " does not match outer input " + to_string(outer_->in_shape()));
}

Mat ComposeOp::raw_forward(const Mat& x) const { return outer_->raw_forward(inner_->raw_forward(x)); }

Mat ComposeOp::raw_adjoint(const Mat& y) const { return inner_->raw_adjoint(outer_->raw_adjoint(y)); }

// ---------------------------------------------------------------- HStack

namespace {

Shape hstack_in(const std::vector<LinOpPtr>& blocks) {
  if (blocks.empty()) throw DimensionError("HStackOp: no blocks");
  Index n = 0;
  for (const auto& b : blocks) {
    if (b->in_shape().cols != 1) throw DimensionError("HStackOp: blocks must act on vectors");
    if (b->out_shape() != blocks.front()->out_shape()) throw DimensionError("HStackOp: output shapes differ");
    n += b->in_shape().rows;
  }
  return {n, 1};
}

}  // namespace

HStackOp::HStackOp(std::vector<LinOpPtr> blocks)
    : LinOp(hstack_in(blocks), blocks.front()->out_shape()), blocks_(std::move(blocks)) {
  Index off = 0;
  for (const auto& b : blocks_) {
    offsets_.push_back(off);
    off += b->in_shape().rows;
  }
}

int HStackOp::leaf_count() const {
  int c = 0;
  for (const auto& b : blocks_) c += b->leaf_count();
  return c;
}

Mat HStackOp::raw_forward(const Mat& x) const {
  const Shape os = out_shape();
  Mat y = Mat::Zero(os.rows, os.cols);
  for (size_t b = 0; b < blocks_.size(); ++b)
    y += blocks_[b]->raw_forward(x.block(offsets_[b], 0, blocks_[b]->in_shape().rows, 1));
  return y;
}

Mat HStackOp::raw_adjoint(const Mat& y) const {
  Mat x(in_shape().rows, 1);
  for (size_t b = 0; b < blocks_.size(); ++b)
    x.block(offsets_[b], 0, blocks_[b]->in_shape().rows, 1) = blocks_[b]->raw_adjoint(y);
  return x;
}

Mat HStackOp::raw_forward_unit(Index i) const {
  size_t b = blocks_.size() - 1;
  while (offsets_[b] > i) --b;
  return blocks_[b]->raw_forward_unit(i - offsets_[b]);
}

// ---------------------------------------------------------------- helpers

double operator_norm_estimate(const LinOp& op, int iterations, std::uint64_t seed) {
  const Shape s = op.in_shape();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Mat v(s.rows, s.cols);
  for (Index i = 0; i < v.size(); ++i) v.data()[i] = normal(rng);
  v /= v.norm();
  double est = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Mat w = op.adjoint(op.forward(v));
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    est = std::sqrt(nw);
    v = w / nw;
  }
  return est;
}

}  // namespace atomret
