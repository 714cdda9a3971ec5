#include "localgd/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "localgd/errors.hpp"

namespace localgd {

std::string_view to_string(Variant v) {
  return v == Variant::Quadratic ? "quadratic" : "logistic";
}

Variant parse_variant(std::string_view name) {
  if (name == "quadratic") return Variant::Quadratic;
  if (name == "logistic") return Variant::Logistic;
  throw ArgumentError("unknown variant '" + std::string(name) + "'");
}

ObjectiveSuite make_quadratic_suite(std::size_t workers, std::size_t dim, std::uint64_t seed,
                                    double scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<LocalFunction> functions;
  for (std::size_t m = 0; m < workers; ++m) {
    Vector b(dim);
    for (auto& v : b) v = normal(rng);
    functions.emplace_back(make_quadratic(std::move(b)));
  }
  return ObjectiveSuite(std::move(functions), dim);
}

SparseDataset make_separable_dataset(std::size_t rows, std::size_t dim, std::uint64_t seed,
                                     bool sort_by_label) {
  if (rows == 0 || dim == 0) throw ArgumentError("make_separable_dataset: empty shape");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Vector planted(dim);
  for (auto& v : planted) v = normal(rng);

  SparseDataset ds;
  ds.d = dim;
  for (std::size_t i = 0; i < rows; ++i) {
    SparseRow row;
    double score = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      // Feature j has variance 1/(j+1).
      const double v = normal(rng) / std::sqrt(static_cast<double>(j + 1));
      row.push_back({static_cast<std::uint32_t>(j), v});
      score += planted[j] * v;
    }
    ds.labels.push_back(score > 0.0 ? 1.0 : -1.0);
    ds.rows.push_back(std::move(row));
  }

  if (sort_by_label) {
    std::vector<std::size_t> order(rows);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return ds.labels[a] < ds.labels[b]; });
    SparseDataset sorted;
    sorted.d = dim;
    for (std::size_t i : order) {
      sorted.rows.push_back(std::move(ds.rows[i]));
      sorted.labels.push_back(ds.labels[i]);
    }
    return sorted;
  }
  return ds;
}

ObjectiveSuite make_logistic_suite(std::size_t workers, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> shard_size(4, 24);
  std::uniform_real_distribution<double> reg(0.01, 0.1);

  PartitionSpec spec;
  spec.workers = workers;
  spec.boundaries.push_back(0);
  for (std::size_t m = 0; m < workers; ++m)
    spec.boundaries.push_back(spec.boundaries.back() + shard_size(rng));

  const SparseDataset ds = make_separable_dataset(spec.boundaries.back(), dim, rng(), true);
  return shards_to_suite(ds, spec, reg(rng));
}

ObjectiveSuite make_homogeneous_suite(Variant variant, std::size_t workers, std::size_t dim,
                                      std::uint64_t seed) {
  const ObjectiveSuite single = variant == Variant::Quadratic
                                    ? make_quadratic_suite(1, dim, seed)
                                    : make_logistic_suite(1, dim, seed);
  std::vector<LocalFunction> copies(workers, single.function(0));
  return ObjectiveSuite(std::move(copies), dim);
}

}  // namespace localgd
