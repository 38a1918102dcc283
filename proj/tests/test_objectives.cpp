#include <doctest.h>

#include <random>

#include "atomret/objectives.hpp"
#include "helpers.hpp"
#include "testkit.hpp"

using namespace atomret;

namespace {

ProblemSpec dense_spec(const Mat& A, const Mat& b, Formulation f) {
  ProblemSpec s;
  s.M = std::make_shared<DenseOp>(A);
  s.b = b;
  s.set = AtomicSet::signed_canonical(A.cols());
  s.formulation = f;
  s.lambda = 1.0;
  s.tau = 1.0;
  return s;
}

DualState at(const Mat& y) {
  DualState d;
  d.y = y;
  return d;
}

}  // namespace

TEST_SUITE("objectives") {
  TEST_CASE("loss and its conjugate") {
    Loss f;
    const Mat r = test::col({3, 4});
    CHECK(f.value(r) == 12.5);
    CHECK(f.gradient(r) == r);
    CHECK(f.conjugate(r) == 12.5);
    CHECK(f.value(Mat::Zero(2, 1)) == 0.0);
    // Fenchel-Young with equality at y = grad f(r)
    CHECK(f.value(r) + f.conjugate(r) == doctest::Approx(inner(r, r)));
    CHECK(f.best_beta(r, 0.0) == 0.0);
    CHECK(f.best_beta(r, 2.0) == doctest::Approx(5.0 / 2.0));
    CHECK(f.perspective(r, 2.5, 2.0) == doctest::Approx(2.5 * (12.5 / 6.25 + 2.0)));
  }

  TEST_CASE("dual objective examples") {
    std::mt19937_64 rng(1);
    const Mat b = test::randn(4, 1, rng);
    auto s1 = dense_spec(Mat::Identity(4, 4), b, Formulation::P1);
    CHECK(dual_objective(s1, at(Mat::Zero(4, 1))) == 0.0);
    auto s2 = dense_spec(Mat::Identity(4, 4), b, Formulation::P2);
    const double want = 0.5 * b.squaredNorm() - b.squaredNorm() + b.cwiseAbs().maxCoeff();
    CHECK(dual_objective(s2, at(b)) == doctest::Approx(want));
    auto s3 = dense_spec(Mat::Identity(4, 4), b, Formulation::P3);
    s3.alpha = 0.1;
    CHECK_THROWS_AS(dual_objective_d3(s3, b, 0.0), ArgumentError);
    // explicit beta vs the minimizing beta
    DualState d = at(0.1 * b);
    const double best = dual_objective(s3, d);
    d.beta = 0.7;
    CHECK(dual_objective(s3, d) >= best - 1e-14);
    CHECK(best == doctest::Approx(std::sqrt(2 * 0.1) * (0.1 * b).norm() - inner(b, 0.1 * b)));
  }

  TEST_CASE("dual feasibility") {
    auto s1 = dense_spec(Mat::Identity(3, 3), Mat::Ones(3, 1), Formulation::P1);
    CHECK(dual_feasible(s1, at(test::col({0.5, -0.2, 0}))));
    auto s3 = dense_spec(Mat::Identity(3, 3), Mat::Ones(3, 1), Formulation::P3);
    CHECK_FALSE(dual_feasible(s3, at(test::col({1 + 1e-6, 0, 0}))));
    CHECK(dual_feasible(s3, at(test::col({1 + 1e-10, 0, 0}))));
    auto s2 = dense_spec(Mat::Identity(3, 3), Mat::Ones(3, 1), Formulation::P2);
    CHECK(dual_feasible(s2, at(test::col({100, 0, 0}))));
  }

  TEST_CASE("epsilon bound formulas") {
    auto s1 = dense_spec(Mat::Identity(2, 2), test::col({1, 0}), Formulation::P1);
    const DualState y = at(test::col({0.5, 0}));
    const double d = dual_objective(s1, y);
    CHECK(epsilon_bound(s1, y, d, 1.0) == 0.0);
    CHECK(epsilon_bound(s1, y, d - 0.08, 1.0) == doctest::Approx(std::sqrt(2 * 0.08)));
    CHECK(epsilon_bound(s1, y, d + 5.0, 1.0) == 0.0);  // negative gap clamps
    auto s2 = dense_spec(Mat::Identity(2, 2), test::col({1, 0}), Formulation::P2);
    const double d2 = dual_objective(s2, y);
    CHECK(epsilon_bound(s2, y, d2 - 0.08, 1.0) == doctest::Approx(2 * std::sqrt(2 * 0.08)));
    auto s3 = dense_spec(Mat::Identity(2, 2), test::col({1, 0}), Formulation::P3);
    CHECK_THROWS_AS(epsilon_bound(s3, y, -1.0, 1.0), StateError);
    DualState y3 = y;
    y3.beta_bracket = std::pair{0.5, 2.0};
    const double top = std::max(dual_objective_d3(s3, y3.y, 0.5), dual_objective_d3(s3, y3.y, 2.0));
    CHECK(epsilon_bound(s3, y3, top - 0.1, 1.0) == doctest::Approx(2 * std::sqrt(2 * 2.0 * 0.1)));
  }

  TEST_CASE("epsilon bound is monotone along dual descent") {
    auto s1 = dense_spec(Mat::Identity(3, 3), test::col({2, 1, 0}), Formulation::P1);
    double prev = 1e300;
    for (double t = 0.0; t <= 1.0; t += 0.1) {
      // segment from 0 to the projection of b onto the box, d1 decreasing
      const DualState y = at(t * test::col({1, 1, 0}));
      const double e = epsilon_bound(s1, y, dual_objective(s1, at(test::col({1, 1, 0}))), 1.0);
      CHECK(e <= prev + 1e-15);
      prev = e;
    }
  }

  TEST_CASE("beta bracket examples") {
    ProblemSpec s;
    s.M = std::make_shared<IdentityOp>(1);
    s.b = test::col({2});
    s.set = AtomicSet::signed_canonical(1);
    const auto [lo, hi] = beta_bracket(s, Mat::Zero(1, 1), Mat::Zero(1, 1));
    CHECK(lo == 2.0);
    CHECK(hi == 2.0);
    const auto p = perspective_bracket({0.5, 2.0});
    CHECK(p.first == 0.5);
    CHECK(p.second == 2.0);
    CHECK_THROWS_AS(perspective_bracket({0.0, 1.0}), ArgumentError);
  }

  TEST_CASE("primal objectives and the infinite marker") {
    auto s = dense_spec(Mat::Identity(2, 2), test::col({1, 1}), Formulation::P2);
    s.tau = 1.0;
    CHECK(primal_objective(s, test::col({2, 0})).is_infinite());
    CHECK(primal_objective(s, test::col({0.5, 0.5})).value() == doctest::Approx(0.25));
    s.formulation = Formulation::P3;
    s.alpha = 0.1;
    CHECK(primal_objective(s, test::col({0, 0})).is_infinite());
    CHECK(primal_objective(s, test::col({1, 1})).value() == 2.0);
    ProblemSpec n = s;
    n.set = AtomicSet::nonneg_canonical(2);
    CHECK(solver_gauge(n.set, test::col({1, 2})).value() == 3.0);
    CHECK(solver_gauge(n.set, test::col({1, -2})).is_infinite());
  }

  TEST_CASE("validation") {
    auto s = dense_spec(Mat::Identity(2, 2), test::col({1, 1}), Formulation::P1);
    s.lambda = 0.0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.lambda = 1.0;
    s.b = Mat::Zero(3, 1);
    CHECK_THROWS_AS(s.validate(), DimensionError);
  }

  TEST_CASE("strong duality at reference optima and weak duality at random pairs") {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> dim(1, 5);
    for (int t = 0; t < 40; ++t) {
      const Index m = dim(rng), n = dim(rng);
      const Mat A = test::randn(m, n, rng);
      const Mat b = test::randn(m, 1, rng);
      for (Formulation f : {Formulation::P1, Formulation::P2, Formulation::P3}) {
        auto s = dense_spec(A, b, f);
        s.lambda = 0.3;
        s.tau = 0.8;
        // keep P3 feasible: alpha above the least-squares misfit
        const Vec x_ls = testkit::dense_least_squares(A, b.col(0));
        const double fit_ls = 0.5 * (b.col(0) - A * x_ls).squaredNorm();
        s.alpha = fit_ls + 0.1 * (0.5 * b.squaredNorm() - fit_ls);
        testkit::SmallProblem p{A, b, testkit::Dictionary::Signed,
                                f == Formulation::P1   ? testkit::Form::P1
                                : f == Formulation::P2 ? testkit::Form::P2
                                                       : testkit::Form::P3,
                                s.lambda, s.tau, s.alpha};
        const auto ref = testkit::small_instance_reference_solve(p);
        const double pv = primal_objective(s, ref.x).value();
        const double dv = dual_objective(s, at(ref.y));
        CHECK(std::abs(pv + dv) <= 1e-6 * std::max(1.0, std::abs(pv)));
        // random feasible pairs
        for (int r = 0; r < 5; ++r) {
          Mat x = test::randn(n, 1, rng);
          Mat y = test::randn(m, 1, rng);
          const double sy = support_value(s.set, A.transpose() * y);
          if (f == Formulation::P1) y *= s.lambda / std::max(sy, 1e-300);
          if (f == Formulation::P3) y /= std::max(sy, 1e-300);
          if (f == Formulation::P2) x *= s.tau / x.cwiseAbs().sum();
          if (f == Formulation::P3) x = ref.x;  // feasible point
          const auto px = primal_objective(s, x);
          if (px.is_finite()) CHECK(px.value() + dual_objective(s, at(y)) >= -1e-9);
        }
      }
    }
  }
}
