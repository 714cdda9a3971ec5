#pragma once

// Seeded problem instances for the property sweep, the CLI default and tests.

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "localgd/libsvm_io.hpp"
#include "localgd/objectives.hpp"

namespace localgd {

enum class Variant { Quadratic, Logistic };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view name);

/// M quadratics with targets b_m ~ N(0, scale^2 I).
ObjectiveSuite make_quadratic_suite(std::size_t workers, std::size_t dim, std::uint64_t seed,
                                    double scale = 1.0);

/// Linearly separable data: dense Gaussian features whose variance decays as
/// 1/(j+1) across coordinates, labels from the sign of a planted direction.
/// With `sort_by_label` the -1 rows come first, so an index-based split gives
/// single-class shards.
SparseDataset make_separable_dataset(std::size_t rows, std::size_t dim, std::uint64_t seed,
                                     bool sort_by_label = true);

/// Small label-sorted logistic suite with random shard sizes in [4, 24] and
/// lambda drawn from [0.01, 0.1].
ObjectiveSuite make_logistic_suite(std::size_t workers, std::size_t dim, std::uint64_t seed);

/// M copies of the same function.
ObjectiveSuite make_homogeneous_suite(Variant variant, std::size_t workers, std::size_t dim,
                                      std::uint64_t seed);

}  // namespace localgd
