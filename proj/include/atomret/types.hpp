#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace atomret {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;

/// Every ambient object (vector or matrix) is stored as a column-major
/// matrix; an n-vector is an n x 1 matrix.
using Mat = Eigen::MatrixXd;

struct Shape {
  Index rows = 0;
  Index cols = 1;

  Index size() const { return rows * cols; }
  bool operator==(const Shape&) const = default;
};

inline Shape shape_of(const Mat& x) { return {x.rows(), x.cols()}; }

inline std::string to_string(Shape s) {
  return std::to_string(s.rows) + "x" + std::to_string(s.cols);
}

/// Frobenius inner product of two equally shaped ambient objects.
inline double inner(const Mat& a, const Mat& b) {
  return (a.array() * b.array()).sum();
}

// Error taxonomy. Everything derives from std::runtime_error so callers can
// catch broadly; the CLI maps ConfigError to exit status 2.
struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ArgumentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require_shape(const Mat& x, Shape expected, const char* what) {
  if (shape_of(x) != expected) {
    throw DimensionError(std::string(what) + ": expected shape " + to_string(expected) +
                         ", got " + to_string(shape_of(x)));
  }
}

/// A real number or +infinity. Infinite gauge values (points outside the
/// cone generated by a set) are represented explicitly, never as a float.
class ExtendedReal {
 public:
  ExtendedReal(double v) : value_(v) {}  // NOLINT: implicit from double is intended
  static ExtendedReal infinite() {
    ExtendedReal r(0.0);
    r.infinite_ = true;
    return r;
  }

  bool is_finite() const { return !infinite_; }
  bool is_infinite() const { return infinite_; }

  double value() const {
    if (infinite_) throw StateError("value() called on infinite ExtendedReal");
    return value_;
  }

 private:
  double value_;
  bool infinite_ = false;
};

/// Tolerances used across the library, stated once.
struct Tolerances {
  static constexpr double feasibility = 1e-9;
  static constexpr double containment = 1e-10;
  static constexpr double unit_norm = 1e-12;
  static constexpr double symmetry = 1e-10;
  static constexpr double monotone = 1e-12;
};

}  // namespace atomret
