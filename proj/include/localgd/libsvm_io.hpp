#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "localgd/objectives.hpp"

namespace localgd {

/// Binary-labelled sparse data with 0-based, strictly ascending feature indices.
struct SparseDataset {
  std::vector<SparseRow> rows;
  std::vector<double> labels;  // -1 or +1
  std::size_t d = 0;           // max feature index + 1

  std::size_t n() const noexcept { return rows.size(); }
  friend bool operator==(const SparseDataset&, const SparseDataset&) = default;
};

/// Contiguous shards of a dataset: worker m owns rows [boundaries[m], boundaries[m+1]).
struct PartitionSpec {
  std::size_t workers = 0;
  std::vector<std::size_t> boundaries;
};

/// Parses LIBSVM text: `label idx:val idx:val ...` with 1-based indices.
/// Labels > 0 become +1, everything else -1. Text after '#' is a comment.
SparseDataset parse_libsvm(std::istream& in);
SparseDataset parse_libsvm(std::string_view text);

/// Reads a file, transparently decompressing it when the name ends in ".gz".
/// Parse errors are rethrown with the file name prepended.
SparseDataset load_libsvm(const std::filesystem::path& path);

/// Canonical text form: "+1"/"-1" labels, shortest round-trip values, 1-based indices.
std::string serialize_libsvm(const SparseDataset& ds);

/// M contiguous blocks in original order; the first n mod M blocks get one extra row.
PartitionSpec partition_by_index(const SparseDataset& ds, std::size_t workers);

/// One LogisticL2 per shard, each normalized by its own shard size.
/// `dim` pads the feature dimension beyond ds.d when given.
ObjectiveSuite shards_to_suite(const SparseDataset& ds, const PartitionSpec& spec, double lambda,
                               std::optional<std::size_t> dim = std::nullopt);

}  // namespace localgd
