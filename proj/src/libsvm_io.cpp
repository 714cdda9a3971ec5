#include "localgd/libsvm_io.hpp"

#include <zlib.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <system_error>

#include "localgd/errors.hpp"

namespace localgd {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

std::string_view trim_comment(std::string_view line) {
  if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  return line;
}

std::optional<double> parse_real(std::string_view tok) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  if (tok.empty() || tok.front() == '+') return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

class LineParser {
 public:
  void feed(std::string_view line) {
    ++line_no_;
    line = trim_comment(line);
    std::size_t pos = 0;
    auto next_token = [&]() -> std::string_view {
      while (pos < line.size() && is_space(line[pos])) ++pos;
      const std::size_t start = pos;
      while (pos < line.size() && !is_space(line[pos])) ++pos;
      return line.substr(start, pos - start);
    };

    const std::string_view label_tok = next_token();
    if (label_tok.empty()) return;
    const auto label = parse_real(label_tok);
    if (!label) fail("non-numeric label '" + std::string(label_tok) + "'");

    SparseRow row;
    for (std::string_view tok = next_token(); !tok.empty(); tok = next_token()) {
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos)
        fail("malformed pair '" + std::string(tok) + "' (missing ':')");
      const std::string_view idx_tok = tok.substr(0, colon);
      const std::string_view val_tok = tok.substr(colon + 1);

      long long idx = 0;
      const auto [ptr, ec] = std::from_chars(idx_tok.data(), idx_tok.data() + idx_tok.size(), idx);
      if (ec != std::errc{} || ptr != idx_tok.data() + idx_tok.size() || idx_tok.empty())
        fail("malformed feature index '" + std::string(idx_tok) + "'");
      if (idx < 1) fail("feature index " + std::to_string(idx) + " is below 1");
      if (idx > static_cast<long long>(std::numeric_limits<std::uint32_t>::max()))
        fail("feature index " + std::to_string(idx) + " is too large");

      const auto value = parse_real(val_tok);
      if (!value) fail("malformed feature value '" + std::string(val_tok) + "'");

      const auto zero_based = static_cast<std::uint32_t>(idx - 1);
      if (!row.empty() && zero_based <= row.back().index)
        fail("feature indices must be strictly ascending (index " + std::to_string(idx) + ")");
      row.push_back({zero_based, *value});
    }

    if (!row.empty()) ds_.d = std::max<std::size_t>(ds_.d, row.back().index + 1ULL);
    ds_.rows.push_back(std::move(row));
    ds_.labels.push_back(*label > 0.0 ? 1.0 : -1.0);
  }

  SparseDataset finish() && { return std::move(ds_); }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("line " + std::to_string(line_no_) + ": " + msg, line_no_);
  }

  SparseDataset ds_;
  std::size_t line_no_ = 0;
};

struct GzCloser {
  void operator()(gzFile_s* f) const { gzclose(f); }
};

SparseDataset parse_gz(const std::filesystem::path& path) {
  std::unique_ptr<gzFile_s, GzCloser> file(gzopen(path.c_str(), "rb"));
  if (!file) throw ArgumentError("cannot open " + path.string());
  LineParser parser;
  std::string line;
  char buf[1 << 16];
  bool pending = false;
  while (gzgets(file.get(), buf, sizeof buf) != nullptr) {
    std::string_view chunk(buf);
    line.append(chunk);
    pending = true;
    if (!chunk.empty() && chunk.back() == '\n') {
      line.pop_back();
      parser.feed(line);
      line.clear();
      pending = false;
    }
  }
  int err = 0;
  const char* msg = gzerror(file.get(), &err);
  if (err != Z_OK && err != Z_STREAM_END)
    throw ArgumentError("gzip error reading " + path.string() + ": " + msg);
  if (pending) parser.feed(line);
  return std::move(parser).finish();
}

}  // namespace

SparseDataset parse_libsvm(std::istream& in) {
  LineParser parser;
  std::string line;
  while (std::getline(in, line)) parser.feed(line);
  return std::move(parser).finish();
}

SparseDataset parse_libsvm(std::string_view text) {
  LineParser parser;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    parser.feed(text.substr(0, nl));
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return std::move(parser).finish();
}

SparseDataset load_libsvm(const std::filesystem::path& path) {
  try {
    if (path.extension() == ".gz") return parse_gz(path);
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open " + path.string());
    return parse_libsvm(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

std::string serialize_libsvm(const SparseDataset& ds) {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < ds.n(); ++i) {
    out += ds.labels[i] > 0.0 ? "+1" : "-1";
    for (const auto& e : ds.rows[i]) {
      out += ' ';
      out += std::to_string(static_cast<unsigned long long>(e.index) + 1);
      out += ':';
      const auto res = std::to_chars(buf, buf + sizeof buf, e.value);
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  return out;
}

PartitionSpec partition_by_index(const SparseDataset& ds, std::size_t workers) {
  const std::size_t n = ds.n();
  if (workers == 0) throw ArgumentError("partition_by_index: worker count must be >= 1");
  if (workers > n)
    throw ArgumentError("partition_by_index: " + std::to_string(workers) +
                        " workers but only " + std::to_string(n) + " rows");
  PartitionSpec spec;
  spec.workers = workers;
  spec.boundaries.reserve(workers + 1);
  spec.boundaries.push_back(0);
  const std::size_t base = n / workers;
  const std::size_t extra = n % workers;
  for (std::size_t m = 0; m < workers; ++m)
    spec.boundaries.push_back(spec.boundaries.back() + base + (m < extra ? 1 : 0));
  return spec;
}

ObjectiveSuite shards_to_suite(const SparseDataset& ds, const PartitionSpec& spec, double lambda,
                               std::optional<std::size_t> dim) {
  if (spec.boundaries.size() != spec.workers + 1 || spec.boundaries.front() != 0 ||
      spec.boundaries.back() != ds.n())
    throw ArgumentError("shards_to_suite: partition does not cover the dataset");
  const std::size_t d = dim.value_or(ds.d);
  if (d < ds.d) throw ArgumentError("shards_to_suite: dimension override smaller than data");

  std::vector<LocalFunction> functions;
  functions.reserve(spec.workers);
  for (std::size_t m = 0; m < spec.workers; ++m) {
    const std::size_t lo = spec.boundaries[m];
    const std::size_t hi = spec.boundaries[m + 1];
    if (hi <= lo) throw ArgumentError("shards_to_suite: empty shard");
    std::span<const SparseRow> rows(ds.rows.data() + lo, hi - lo);
    Vector labels(ds.labels.begin() + static_cast<std::ptrdiff_t>(lo),
                  ds.labels.begin() + static_cast<std::ptrdiff_t>(hi));
    functions.emplace_back(make_logistic(rows, std::move(labels), lambda, d));
  }
  return ObjectiveSuite(std::move(functions), d);
}

}  // namespace localgd
