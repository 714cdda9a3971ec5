#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "localgd/errors.hpp"
#include "localgd/libsvm_io.hpp"
#include "localgd/synthetic.hpp"
#include "support.hpp"

using namespace localgd;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ObjectiveSuite quadratics(std::initializer_list<Vector> targets) {
  std::vector<LocalFunction> fs;
  for (const auto& b : targets) fs.emplace_back(make_quadratic(b));
  return ObjectiveSuite(std::move(fs), targets.begin()->size());
}

LogisticL2 logistic(std::vector<SparseRow> rows, Vector labels, double lambda, std::size_t d) {
  return make_logistic(rows, std::move(labels), lambda, d);
}

// f_m written out densely, independent of the library's sparse code path.
double dense_logistic_value(const std::vector<oracle::Vec>& a, const oracle::Vec& y, double lambda,
                            const oracle::Vec& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double m = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) m += a[i][j] * x[j];
    s += std::log1p(std::exp(-y[i] * m));
  }
  return s / static_cast<double>(a.size()) + 0.5 * lambda * oracle::norm2(x);
}

}  // namespace

TEST_CASE("quadratic values and gradients") {
  const LocalFunction zero = make_quadratic({0.0, 0.0});
  CHECK(eval_value(zero, Vector{0.0, 0.0}) == 0.0);
  CHECK(eval_value(LocalFunction{make_quadratic({2.0})}, Vector{0.0}) == 2.0);
  CHECK(eval_grad(LocalFunction{make_quadratic({1.0, 2.0})}, Vector{1.0, 2.0}) == Vector{0.0, 0.0});
  CHECK(eval_grad(LocalFunction{make_quadratic({0.0})}, Vector{3.0}) == Vector{3.0});
  CHECK_THROWS_AS(eval_value(zero, Vector{1.0}), ArgumentError);
}

TEST_CASE("logistic at zero margin is log 2") {
  const LocalFunction f = logistic({SparseRow{}}, {1.0}, 0.0, 3);
  CHECK(eval_value(f, Vector{1.0, -2.0, 5.0}) == std::log(2.0));
}

TEST_CASE("logistic stays finite for extreme margins") {
  const LocalFunction f = logistic({SparseRow{{0, 1.0}}}, {1.0}, 0.0, 1);
  CHECK(eval_value(f, Vector{1e4}) >= 0.0);
  CHECK_THAT(eval_value(f, Vector{-1e4}), WithinRel(1e4, 1e-15));
  CHECK(std::isfinite(eval_grad(f, Vector{-1e300})[0]));
}

TEST_CASE("logistic value matches a dense evaluation") {
  std::mt19937_64 rng(3);
  const std::vector<oracle::Vec> a{{1.0, 0.0, -2.0}, {0.5, 0.25, 0.0}, {0.0, 0.0, 3.0}};
  const oracle::Vec y{1.0, -1.0, -1.0};
  std::vector<SparseRow> rows;
  for (const auto& r : a) {
    SparseRow s;
    for (std::uint32_t j = 0; j < r.size(); ++j)
      if (r[j] != 0.0) s.push_back({j, r[j]});
    rows.push_back(s);
  }
  const LocalFunction f = logistic(rows, y, 0.3, 3);
  for (int k = 0; k < 20; ++k) {
    const auto x = oracle::random_point(rng, 3);
    CHECK_THAT(eval_value(f, x), WithinRel(dense_logistic_value(a, y, 0.3, x), 1e-13));
  }
}

TEST_CASE("gradients match central finite differences") {
  std::mt19937_64 rng(11);
  for (auto variant : {Variant::Quadratic, Variant::Logistic}) {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      const ObjectiveSuite suite = variant == Variant::Quadratic
                                       ? make_quadratic_suite(3, 6, seed)
                                       : make_logistic_suite(3, 6, seed);
      for (const auto& fm : suite.functions()) {
        const auto x = oracle::random_point(rng, suite.dim());
        const auto g = eval_grad(fm, x);
        const auto fd = oracle::fd_gradient([&](const oracle::Vec& z) { return eval_value(fm, z); }, x);
        double diff = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) diff += (g[i] - fd[i]) * (g[i] - fd[i]);
        CHECK(std::sqrt(diff) <= 1e-6 * std::max(1.0, std::sqrt(oracle::norm2(fd))));
      }
    }
  }
}

TEST_CASE("smoothness constants") {
  SECTION("quadratic is exactly 1") {
    CHECK(quadratics({{1.0}, {2.0}}).smoothness() == 1.0);
  }
  SECTION("single row (2, 0)") {
    const LocalFunction f = logistic({SparseRow{{0, 2.0}}}, {1.0}, 0.0, 2);
    CHECK_THAT(local_smoothness(f), WithinRel(1.0 * (1 + kSmoothnessInflation), 1e-12));
  }
  SECTION("identity rows with lambda 0.1") {
    const LocalFunction f = logistic({SparseRow{{0, 1.0}}, SparseRow{{1, 1.0}}}, {1.0, -1.0}, 0.1, 2);
    CHECK_THAT(oracle::jacobi_max_eigenvalue({{1.0, 0.0}, {0.0, 1.0}}) / 8.0 + 0.1,
               WithinRel(0.225, 1e-15));
    CHECK_THAT(local_smoothness(f), WithinRel(0.225 * (1 + kSmoothnessInflation), 1e-12));
  }
  SECTION("power iteration agrees with Jacobi on random dense matrices") {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 10; ++k) {
      const std::size_t n = 7, d = 4;
      std::vector<SparseRow> rows(n);
      std::vector<oracle::Vec> dense(n, oracle::Vec(d));
      for (std::size_t i = 0; i < n; ++i) {
        dense[i] = oracle::random_point(rng, d);
        for (std::uint32_t j = 0; j < d; ++j) rows[i].push_back({j, dense[i][j]});
      }
      std::vector<oracle::Vec> gram(d, oracle::Vec(d, 0.0));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < d; ++p)
          for (std::size_t q = 0; q < d; ++q) gram[p][q] += dense[i][p] * dense[i][q];
      CHECK_THAT(largest_gram_eigenvalue(CsrMatrix(rows, d)),
                 WithinRel(oracle::jacobi_max_eigenvalue(gram), 1e-7));
    }
  }
  SECTION("iteration cap raises a numeric error") {
    const LocalFunction f = logistic({SparseRow{{0, 1.0}, {1, 1.0}}, SparseRow{{0, 1.0}, {1, 0.99}}},
                                     {1.0, 1.0}, 0.0, 2);
    CHECK_THROWS_AS(largest_gram_eigenvalue(std::get<LogisticL2>(f).features, {1e-300, 1}),
                    NumericError);
  }
}

TEST_CASE("smoothness and convexity certificates") {
  std::mt19937_64 rng(21);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ObjectiveSuite suite = make_logistic_suite(4, 5, seed);
    const double L = suite.smoothness();
    for (const auto& fm : suite.functions()) {
      for (int k = 0; k < 10; ++k) {
        const auto x = oracle::random_point(rng, 5, 3.0), y = oracle::random_point(rng, 5, 3.0);
        const auto gx = eval_grad(fm, x), gy = eval_grad(fm, y);
        double dg = 0.0, dx = 0.0, inner = 0.0;
        for (std::size_t i = 0; i < 5; ++i) {
          dg += (gx[i] - gy[i]) * (gx[i] - gy[i]);
          dx += (x[i] - y[i]) * (x[i] - y[i]);
          inner += gy[i] * (x[i] - y[i]);
        }
        CHECK(std::sqrt(dg) <= L * std::sqrt(dx) * (1 + 1e-9));
        const double fx = eval_value(fm, x);
        const double breg = fx - eval_value(fm, y) - inner;
        CHECK(breg >= -1e-12 * (1 + std::abs(fx)));
        CHECK(breg <= 0.5 * L * dx * (1 + 1e-9));
      }
    }
  }
}

TEST_CASE("reference solution of shifted quadratics") {
  SECTION("two workers") {
    const auto ref = solve_reference(quadratics({{0.0}, {2.0}}), 1e-12);
    CHECK_THAT(ref.x_star[0], WithinAbs(1.0, 1e-12));
    CHECK_THAT(ref.f_star, WithinAbs(0.5, 1e-12));
    CHECK_THAT(ref.sigma2, WithinAbs(1.0, 1e-10));
    CHECK(ref.grad_norm_residual <= 1e-12);
  }
  SECTION("three workers, closed-form mean and variance") {
    const Vector b{0.0, 3.0, 6.0};
    double mean = 0.0, var = 0.0;
    for (double v : b) mean += v / 3.0;
    for (double v : b) var += (mean - v) * (mean - v) / 3.0;
    const auto ref = solve_reference(quadratics({{0.0}, {3.0}, {6.0}}));
    CHECK_THAT(ref.x_star[0], WithinAbs(mean, 1e-10));
    CHECK_THAT(ref.sigma2, WithinAbs(var, 1e-9));
  }
  SECTION("iteration cap reports the partial solution") {
    try {
      solve_reference(make_logistic_suite(2, 3, 1), 1e-14, 3);
      FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
      CHECK(e.partial().iterations_used == 3);
      CHECK(e.partial().grad_norm_residual > 1e-14);
    }
  }
}

TEST_CASE("single worker has sigma2 near zero") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const double tol = 1e-10;
    const auto ref = solve_reference(make_logistic_suite(1, 4, seed), tol);
    CHECK(ref.sigma2 <= tol * tol);
  }
}

TEST_CASE("copies of one function have sigma2 near zero") {
  const double tol = 1e-10;
  for (auto v : {Variant::Quadratic, Variant::Logistic}) {
    const auto ref = solve_reference(make_homogeneous_suite(v, 4, 5, 9), tol);
    CHECK(ref.sigma2 <= 10 * tol * tol);
  }
}

TEST_CASE("sigma2 equals the mean of recomputed local gradient norms") {
  const ObjectiveSuite suite = make_logistic_suite(5, 4, 17);
  const auto ref = solve_reference(suite);
  double s = 0.0;
  for (const auto& fm : suite.functions()) s += oracle::norm2(eval_grad(fm, ref.x_star));
  CHECK_THAT(compute_sigma2(suite, ref.x_star), WithinRel(s / 5.0, 1e-14));
  CHECK_THROWS_AS(compute_sigma2(suite, Vector{1.0}), ArgumentError);
}

TEST_CASE("Bregman divergence") {
  const ObjectiveSuite q = quadratics({{0.0}, {3.0}, {6.0}});
  CHECK(bregman(q, Vector{5.0}, Vector{5.0}) == 0.0);
  CHECK_THAT(bregman(q, Vector{5.0}, Vector{3.0}), WithinAbs(2.0, 1e-14));
  std::mt19937_64 rng(8);
  const ObjectiveSuite q3 = make_quadratic_suite(3, 4, 2);
  for (int k = 0; k < 10; ++k) {
    const auto x = oracle::random_point(rng, 4), y = oracle::random_point(rng, 4);
    double d2 = 0.0;
    for (std::size_t i = 0; i < 4; ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
    CHECK_THAT(bregman(q3, x, y), WithinAbs(0.5 * d2, 1e-12 * (1 + d2)));
  }
  CHECK_THROWS_AS(bregman(q, Vector{1.0, 2.0}, Vector{1.0}), ArgumentError);
}

TEST_CASE("suite construction validates dimensions") {
  std::vector<LocalFunction> fs{make_quadratic({1.0}), make_quadratic({1.0, 2.0})};
  CHECK_THROWS_AS(ObjectiveSuite(fs, 1), ArgumentError);
  CHECK_THROWS_AS(ObjectiveSuite({}, 1), ArgumentError);
  CHECK_THROWS_AS(make_logistic(std::vector<SparseRow>{SparseRow{}}, {0.5}, 0.0, 1), ArgumentError);
  CHECK_THROWS_AS(make_logistic(std::vector<SparseRow>{SparseRow{}}, {1.0}, -1.0, 1), ArgumentError);
}
