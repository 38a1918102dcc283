#pragma once

#include <random>

#include "atomret/types.hpp"

namespace atomret::test {

inline Mat randn(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Mat A(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) A(i, j) = n(rng);
  return A;
}

inline Mat col(std::initializer_list<double> v) {
  Mat x(static_cast<Index>(v.size()), 1);
  Index i = 0;
  for (double e : v) x(i++, 0) = e;
  return x;
}

}  // namespace atomret::test
