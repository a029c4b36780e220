#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "graphrob/graph.hpp"
#include "graphrob/robustness.hpp"
#include "graphrob/spectral.hpp"

namespace graphrob {

// External integer ids, indexed by internal id (ascending external order).
struct IdMap {
  std::vector<std::int64_t> external;
  int size() const { return static_cast<int>(external.size()); }
  // -1 when unknown.
  int internal(std::int64_t id) const;
  static IdMap identity(int n);
};

struct IngestedGraph {
  Graph graph;
  IdMap ids;
};

// "u v [weight]" per line, '#' starts a comment, blank lines skipped.
// Ids are integers; they are remapped to 0..n-1 in ascending order. Throws
// DataError with the line number for malformed lines, negative weights,
// self-loops, repeated edges and files without edges.
IngestedGraph ingest_edge_list(const std::filesystem::path& path, bool directed);

// "node_id cluster_id" per line, in the graph's external ids. Cluster ids are
// compacted in ascending order. Every node must be labeled exactly once
// (repeating the same label is allowed).
Clustering ingest_labels(const std::filesystem::path& path, const IdMap& ids);

void write_edge_list(const std::filesystem::path& path, const Graph& g, const IdMap& ids);
void write_labels(const std::filesystem::path& path, const Clustering& c, const IdMap& ids);
void write_id_map(const std::filesystem::path& path, const IdMap& ids);

// Shortest round-trip decimal form; "nan" / "inf" / "-inf" for non-finite.
std::string format_number(double x);

// Minimal CSV writer with a fixed header; values are written verbatim.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);
  void close();

 private:
  std::filesystem::path path_;
  std::size_t columns_;
  std::string buffer_;
};

nlohmann::json to_json(const Quantiles& q);
nlohmann::json to_json(const Breakdown& b);
nlohmann::json to_json(const RobustnessReport& r);
nlohmann::json to_json(const ArgmaxReport& r);

// Long format: grid_index, level, trial, property, value. `prefix` cells go
// in front of every row (their names are prepended to the header by the
// caller).
void append_csv(CsvWriter& csv, const RobustnessReport& r, const std::vector<std::string>& prefix);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace graphrob
