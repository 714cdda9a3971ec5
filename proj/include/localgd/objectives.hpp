#pragma once

// Smooth convex local objectives f_m and the averaged problem
//
//   f(x) = (1/M) sum_m f_m(x)
//
// together with smoothness estimation, a reference solver for x*, the
// heterogeneity measure sigma^2 and the Bregman divergence of f.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "localgd/vector_ops.hpp"

namespace localgd {

struct SparseEntry {
  std::uint32_t index;
  double value;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

using SparseRow = std::vector<SparseEntry>;

/// Row-major compressed sparse matrix.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  /// Rows must have strictly ascending indices below `cols`.
  CsrMatrix(std::span<const SparseRow> rows, std::size_t cols);

  std::size_t rows() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return entries_.size(); }

  std::span<const SparseEntry> row(std::size_t i) const {
    return {entries_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }

  double row_dot(std::size_t i, std::span<const double> x) const;

  /// out = A^T A v, `scratch` must hold rows() doubles.
  void gram_apply(std::span<const double> v, std::span<double> scratch,
                  std::span<double> out) const;

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<SparseEntry> entries_;
  std::size_t cols_ = 0;
};

/// f_m(x) = 1/2 ||x - b_m||^2
struct QuadraticShift {
  Vector target;
};

/// f_m(x) = (1/n_m) sum_i log(1 + exp(-y_i <a_i, x>)) + (lambda/2) ||x||^2
struct LogisticL2 {
  CsrMatrix features;
  Vector labels;  // each entry is -1 or +1
  double lambda = 0.0;
};

using LocalFunction = std::variant<QuadraticShift, LogisticL2>;

QuadraticShift make_quadratic(Vector target);
/// Validates n >= 1, labels in {-1, +1}, lambda >= 0.
LogisticL2 make_logistic(std::span<const SparseRow> rows, Vector labels, double lambda,
                         std::size_t dim);

std::size_t function_dim(const LocalFunction& fm);

double eval_value(const LocalFunction& fm, std::span<const double> x);
Vector eval_grad(const LocalFunction& fm, std::span<const double> x);
/// Writes the gradient into `out` (size d) without allocating.
void eval_grad_into(const LocalFunction& fm, std::span<const double> x, std::span<double> out);

struct PowerIterationOptions {
  double relative_tolerance = 1e-9;
  std::size_t max_iterations = 10'000;
};

/// Largest eigenvalue of A^T A (i.e. s_max(A)^2) by power iteration from a fixed
/// pseudo-random start. Throws NumericError if the estimate has not settled.
double largest_gram_eigenvalue(const CsrMatrix& a, const PowerIterationOptions& opts = {});

/// Relative inflation applied to power-iteration smoothness estimates.
inline constexpr double kSmoothnessInflation = 1e-6;

/// L_m: exactly 1 for QuadraticShift; (s_max^2/(4 n_m) + lambda)(1 + 1e-6) for LogisticL2.
double local_smoothness(const LocalFunction& fm, const PowerIterationOptions& opts = {});

/// The M local functions with their shared dimension and global smoothness bound.
/// Construction validates dimensions and fills L = max_m L_m.
class ObjectiveSuite {
 public:
  ObjectiveSuite(std::vector<LocalFunction> functions, std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t workers() const noexcept { return functions_.size(); }
  double smoothness() const noexcept { return smoothness_; }
  const std::vector<LocalFunction>& functions() const noexcept { return functions_; }
  const LocalFunction& function(std::size_t m) const { return functions_.at(m); }

  double value(std::span<const double> x) const;
  Vector grad(std::span<const double> x) const;

  void check_dim(std::span<const double> x) const;

 private:
  std::vector<LocalFunction> functions_;
  std::size_t dim_;
  double smoothness_;
};

/// max_m L_m over the suite's functions.
double estimate_smoothness(const ObjectiveSuite& suite);

struct ReferenceSolution {
  Vector x_star;
  double f_star = 0.0;
  double sigma2 = 0.0;
  double grad_norm_residual = 0.0;
  std::size_t iterations_used = 0;
};

/// Thrown by solve_reference when the iteration cap is hit; carries the best
/// solution found so the caller may accept it.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, ReferenceSolution partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const ReferenceSolution& partial() const noexcept { return partial_; }

 private:
  ReferenceSolution partial_;
};

inline constexpr double kDefaultReferenceTolerance = 1e-10;
inline constexpr std::size_t kDefaultReferenceIterationCap = 10'000'000;

/// Gradient descent on f with stepsize 1/L from the origin until ||grad f|| <= tol.
ReferenceSolution solve_reference(const ObjectiveSuite& suite,
                                  double tol = kDefaultReferenceTolerance,
                                  std::size_t max_iterations = kDefaultReferenceIterationCap);

/// sigma^2 = (1/M) sum_m ||grad f_m(x_star)||^2
double compute_sigma2(const ObjectiveSuite& suite, std::span<const double> x_star);

/// D_f(x, y) = f(x) - f(y) - <grad f(y), x - y>
double bregman(const ObjectiveSuite& suite, std::span<const double> x, std::span<const double> y);

}  // namespace localgd
