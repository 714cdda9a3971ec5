#include "localgd/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "localgd/errors.hpp"

namespace localgd {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// log(1 + exp(z)) without overflow for large |z|.
double softplus(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void require_dim(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    throw ArgumentError(std::string(what) + ": dimension mismatch (expected " +
                        std::to_string(expected) + ", got " + std::to_string(got) + ")");
  }
}

// splitmix64, used for the deterministic power-iteration start vector.
std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

CsrMatrix::CsrMatrix(std::span<const SparseRow> rows, std::size_t cols) : cols_(cols) {
  offsets_.reserve(rows.size() + 1);
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (row[k].index >= cols) throw ArgumentError("CsrMatrix: column index out of range");
      if (k > 0 && row[k].index <= row[k - 1].index)
        throw ArgumentError("CsrMatrix: row indices must be strictly ascending");
      entries_.push_back(row[k]);
    }
    offsets_.push_back(entries_.size());
  }
}

double CsrMatrix::row_dot(std::size_t i, std::span<const double> x) const {
  double s = 0.0;
  for (const auto& e : row(i)) s += e.value * x[e.index];
  return s;
}

void CsrMatrix::gram_apply(std::span<const double> v, std::span<double> scratch,
                           std::span<double> out) const {
  for (std::size_t i = 0; i < rows(); ++i) scratch[i] = row_dot(i, v);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < rows(); ++i)
    for (const auto& e : row(i)) out[e.index] += scratch[i] * e.value;
}

QuadraticShift make_quadratic(Vector target) { return QuadraticShift{std::move(target)}; }

LogisticL2 make_logistic(std::span<const SparseRow> rows, Vector labels, double lambda,
                         std::size_t dim) {
  if (rows.empty()) throw ArgumentError("LogisticL2 needs at least one row");
  if (rows.size() != labels.size()) throw ArgumentError("LogisticL2: rows/labels size mismatch");
  for (double y : labels)
    if (y != 1.0 && y != -1.0) throw ArgumentError("LogisticL2: labels must be -1 or +1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ArgumentError("LogisticL2: lambda must be finite and >= 0");
  return LogisticL2{CsrMatrix(rows, dim), std::move(labels), lambda};
}

std::size_t function_dim(const LocalFunction& fm) {
  return std::visit(Overloaded{[](const QuadraticShift& q) { return q.target.size(); },
                               [](const LogisticL2& l) { return l.features.cols(); }},
                    fm);
}

double eval_value(const LocalFunction& fm, std::span<const double> x) {
  require_dim(function_dim(fm), x.size(), "eval_value");
  return std::visit(
      Overloaded{
          [&](const QuadraticShift& q) { return 0.5 * squared_distance(x, q.target); },
          [&](const LogisticL2& l) {
            const std::size_t n = l.features.rows();
            double loss = 0.0;
            for (std::size_t i = 0; i < n; ++i)
              loss += softplus(-l.labels[i] * l.features.row_dot(i, x));
            return loss / static_cast<double>(n) + 0.5 * l.lambda * squared_norm(x);
          }},
      fm);
}

void eval_grad_into(const LocalFunction& fm, std::span<const double> x, std::span<double> out) {
  require_dim(function_dim(fm), x.size(), "eval_grad");
  require_dim(x.size(), out.size(), "eval_grad output");
  std::visit(Overloaded{[&](const QuadraticShift& q) {
                          for (std::size_t j = 0; j < x.size(); ++j) out[j] = x[j] - q.target[j];
                        },
                        [&](const LogisticL2& l) {
                          const std::size_t n = l.features.rows();
                          const double inv_n = 1.0 / static_cast<double>(n);
                          for (std::size_t j = 0; j < x.size(); ++j) out[j] = 0.0;
                          for (std::size_t i = 0; i < n; ++i) {
                            const double y = l.labels[i];
                            const double coef =
                                -y * sigmoid(-y * l.features.row_dot(i, x)) * inv_n;
                            for (const auto& e : l.features.row(i)) out[e.index] += coef * e.value;
                          }
                          for (std::size_t j = 0; j < x.size(); ++j) out[j] += l.lambda * x[j];
                        }},
             fm);
}

Vector eval_grad(const LocalFunction& fm, std::span<const double> x) {
  Vector out(x.size());
  eval_grad_into(fm, x, out);
  return out;
}

double largest_gram_eigenvalue(const CsrMatrix& a, const PowerIterationOptions& opts) {
  const std::size_t d = a.cols();
  if (d == 0 || a.nnz() == 0) return 0.0;

  Vector v(d);
  std::uint64_t state = 0x5eedULL;
  for (auto& vi : v) vi = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53 + 0.5;
  const double v_norm = norm(v);
  for (auto& vi : v) vi /= v_norm;

  Vector w(d);
  Vector scratch(a.rows());
  double estimate = 0.0;
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    a.gram_apply(v, scratch, w);
    const double rayleigh = dot(v, w);
    const double w_norm = norm(w);
    if (w_norm == 0.0) return 0.0;
    for (std::size_t j = 0; j < d; ++j) v[j] = w[j] / w_norm;
    if (it > 0 && std::abs(rayleigh - estimate) <= opts.relative_tolerance * rayleigh) {
      // The norm of A^T A v over a unit v is also a lower bound on the top
      // eigenvalue and at least as large as the Rayleigh quotient.
      return std::max(rayleigh, w_norm);
    }
    estimate = rayleigh;
  }
  throw NumericError("power iteration did not converge within " +
                         std::to_string(opts.max_iterations) + " iterations",
                     v);
}

double local_smoothness(const LocalFunction& fm, const PowerIterationOptions& opts) {
  return std::visit(Overloaded{[](const QuadraticShift&) { return 1.0; },
                               [&](const LogisticL2& l) {
                                 const double s2 = largest_gram_eigenvalue(l.features, opts);
                                 const double n = static_cast<double>(l.features.rows());
                                 return (s2 / (4.0 * n) + l.lambda) * (1.0 + kSmoothnessInflation);
                               }},
                    fm);
}

ObjectiveSuite::ObjectiveSuite(std::vector<LocalFunction> functions, std::size_t dim)
    : functions_(std::move(functions)), dim_(dim), smoothness_(0.0) {
  if (functions_.empty()) throw ArgumentError("ObjectiveSuite needs at least one function");
  for (const auto& fm : functions_) require_dim(dim_, function_dim(fm), "ObjectiveSuite");
  smoothness_ = estimate_smoothness(*this);
}

void ObjectiveSuite::check_dim(std::span<const double> x) const {
  require_dim(dim_, x.size(), "ObjectiveSuite");
}

double ObjectiveSuite::value(std::span<const double> x) const {
  check_dim(x);
  double s = 0.0;
  for (const auto& fm : functions_) s += eval_value(fm, x);
  return s / static_cast<double>(functions_.size());
}

Vector ObjectiveSuite::grad(std::span<const double> x) const {
  check_dim(x);
  Vector total(dim_, 0.0);
  Vector local(dim_);
  for (const auto& fm : functions_) {
    eval_grad_into(fm, x, local);
    for (std::size_t j = 0; j < dim_; ++j) total[j] += local[j];
  }
  const double inv_m = 1.0 / static_cast<double>(functions_.size());
  for (auto& v : total) v *= inv_m;
  return total;
}

double estimate_smoothness(const ObjectiveSuite& suite) {
  double l = 0.0;
  for (const auto& fm : suite.functions()) l = std::max(l, local_smoothness(fm));
  return l;
}

double compute_sigma2(const ObjectiveSuite& suite, std::span<const double> x_star) {
  suite.check_dim(x_star);
  Vector g(suite.dim());
  double s = 0.0;
  for (const auto& fm : suite.functions()) {
    eval_grad_into(fm, x_star, g);
    s += squared_norm(g);
  }
  return s / static_cast<double>(suite.workers());
}

double bregman(const ObjectiveSuite& suite, std::span<const double> x, std::span<const double> y) {
  suite.check_dim(x);
  suite.check_dim(y);
  const Vector gy = suite.grad(y);
  const Vector diff = subtract(x, y);
  return suite.value(x) - suite.value(y) - dot(gy, diff);
}

ReferenceSolution solve_reference(const ObjectiveSuite& suite, double tol,
                                  std::size_t max_iterations) {
  if (!(tol > 0.0)) throw ArgumentError("solve_reference: tol must be > 0");
  const double step = 1.0 / suite.smoothness();
  Vector x(suite.dim(), 0.0);
  Vector g = suite.grad(x);
  double gnorm = norm(g);
  std::size_t it = 0;
  while (gnorm > tol && it < max_iterations) {
    axpy(-step, g, x);
    g = suite.grad(x);
    gnorm = norm(g);
    ++it;
    if (!std::isfinite(gnorm)) throw NumericError("solve_reference: non-finite gradient", x);
  }
  ReferenceSolution ref;
  ref.f_star = suite.value(x);
  ref.sigma2 = compute_sigma2(suite, x);
  ref.grad_norm_residual = gnorm;
  ref.iterations_used = it;
  ref.x_star = std::move(x);
  if (gnorm > tol) {
    throw ConvergenceError("solve_reference: iteration cap reached with residual " +
                               std::to_string(gnorm),
                           std::move(ref));
  }
  return ref;
}

}  // namespace localgd
