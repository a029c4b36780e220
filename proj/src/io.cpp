#include "graphrob/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "graphrob/errors.hpp"

namespace graphrob {

namespace fs = std::filesystem;

int IdMap::internal(std::int64_t id) const {
  auto it = std::lower_bound(external.begin(), external.end(), id);
  if (it == external.end() || *it != id) return -1;
  return static_cast<int>(it - external.begin());
}

IdMap IdMap::identity(int n) {
  IdMap m;
  for (int i = 0; i < n; ++i) m.external.push_back(i);
  return m;
}

namespace {

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

// Tokens of a line with any '#' comment removed.
std::vector<std::string> tokenize(const std::string& line) {
  const std::string body = line.substr(0, line.find('#'));
  std::istringstream ss(body);
  std::vector<std::string> out;
  for (std::string tok; ss >> tok;) out.push_back(tok);
  return out;
}

bool parse_int(const std::string& s, std::int64_t& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_double(const std::string& s, double& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string where(const fs::path& path, long line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

}  // namespace

IngestedGraph ingest_edge_list(const fs::path& path, bool directed) {
  std::ifstream in = open_input(path);
  struct Raw {
    std::int64_t u, v;
    double w;
    long line;
  };
  std::vector<Raw> raw;
  std::string text;
  long lineno = 0;
  while (std::getline(in, text)) {
    ++lineno;
    const auto tok = tokenize(text);
    if (tok.empty()) continue;
    if (tok.size() < 2 || tok.size() > 3) {
      throw DataError(where(path, lineno) + "expected 'u v [weight]', got " +
                      std::to_string(tok.size()) + " fields");
    }
    Raw r{0, 0, 1.0, lineno};
    if (!parse_int(tok[0], r.u) || !parse_int(tok[1], r.v)) {
      throw DataError(where(path, lineno) + "node ids must be integers");
    }
    if (tok.size() == 3) {
      if (!parse_double(tok[2], r.w) || !std::isfinite(r.w)) {
        throw DataError(where(path, lineno) + "weight '" + tok[2] + "' is not a number");
      }
      if (r.w < 0.0) throw DataError(where(path, lineno) + "negative weight " + tok[2]);
    }
    if (r.u == r.v) throw DataError(where(path, lineno) + "self-loop on node " + tok[0]);
    raw.push_back(r);
  }

  IngestedGraph out;
  for (const Raw& r : raw) {
    out.ids.external.push_back(r.u);
    out.ids.external.push_back(r.v);
  }
  std::sort(out.ids.external.begin(), out.ids.external.end());
  out.ids.external.erase(std::unique(out.ids.external.begin(), out.ids.external.end()),
                         out.ids.external.end());

  if (raw.empty()) throw DataError(path.string() + ": no edges");
  std::map<std::pair<int, int>, long> seen;
  std::vector<Edge> edges;
  edges.reserve(raw.size());
  for (const Raw& r : raw) {
    int i = out.ids.internal(r.u), j = out.ids.internal(r.v);
    std::pair<int, int> key = directed ? std::make_pair(i, j) : std::make_pair(std::min(i, j), std::max(i, j));
    auto [it, fresh] = seen.emplace(key, r.line);
    if (!fresh) {
      throw DataError(where(path, r.line) + "edge " + std::to_string(r.u) + " " +
                      std::to_string(r.v) + " repeats line " + std::to_string(it->second));
    }
    edges.push_back({i, j, r.w});
  }
  out.graph = build_graph(out.ids.size(), edges, directed);
  return out;
}

Clustering ingest_labels(const fs::path& path, const IdMap& ids) {
  std::ifstream in = open_input(path);
  std::vector<std::int64_t> label(ids.size());
  std::vector<char> has(ids.size(), 0);
  std::string text;
  long lineno = 0;
  while (std::getline(in, text)) {
    ++lineno;
    const auto tok = tokenize(text);
    if (tok.empty()) continue;
    std::int64_t node = 0, cluster = 0;
    if (tok.size() != 2 || !parse_int(tok[0], node) || !parse_int(tok[1], cluster)) {
      throw DataError(where(path, lineno) + "expected 'node_id cluster_id'");
    }
    const int i = ids.internal(node);
    if (i < 0) throw DataError(where(path, lineno) + "unknown node id " + tok[0]);
    if (has[i] && label[i] != cluster) {
      throw DataError(where(path, lineno) + "node " + tok[0] + " labeled both " +
                      std::to_string(label[i]) + " and " + tok[1]);
    }
    has[i] = 1;
    label[i] = cluster;
  }
  std::vector<std::int64_t> missing;
  for (int i = 0; i < ids.size(); ++i) {
    if (!has[i]) missing.push_back(ids.external[i]);
  }
  if (!missing.empty()) {
    std::ostringstream os;
    os << path.string() << ": " << missing.size() << " unlabeled node(s):";
    for (std::size_t k = 0; k < std::min<std::size_t>(missing.size(), 20); ++k) os << ' ' << missing[k];
    if (missing.size() > 20) os << " ...";
    throw DataError(os.str());
  }
  std::set<std::int64_t> distinct(label.begin(), label.end());
  std::map<std::int64_t, int> compact;
  for (std::int64_t c : distinct) compact.emplace(c, static_cast<int>(compact.size()));
  std::vector<int> labels(ids.size());
  for (int i = 0; i < ids.size(); ++i) labels[i] = compact.at(label[i]);
  return Clustering(std::move(labels), std::max<int>(1, static_cast<int>(compact.size())));
}

void write_edge_list(const fs::path& path, const Graph& g, const IdMap& ids) {
  if (ids.size() != g.num_nodes()) throw std::invalid_argument("id map does not match graph");
  std::ofstream out = open_output(path);
  out << "# " << (g.directed() ? "directed" : "undirected") << " n=" << g.num_nodes()
      << " edges=" << g.num_edges() << '\n';
  for (const Edge& e : g.edges()) {
    out << ids.external[e.source] << ' ' << ids.external[e.target];
    if (e.weight != 1.0) out << ' ' << format_number(e.weight);
    out << '\n';
  }
}

void write_labels(const fs::path& path, const Clustering& c, const IdMap& ids) {
  if (ids.size() != c.size()) throw std::invalid_argument("id map does not match clustering");
  std::ofstream out = open_output(path);
  for (int i = 0; i < c.size(); ++i) out << ids.external[i] << ' ' << c.label(i) << '\n';
}

void write_id_map(const fs::path& path, const IdMap& ids) {
  std::ofstream out = open_output(path);
  out << "# internal external\n";
  for (int i = 0; i < ids.size(); ++i) out << i << ' ' << ids.external[i] << '\n';
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

CsvWriter::CsvWriter(const fs::path& path, std::vector<std::string> header)
    : path_(path), columns_(header.size()) {
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw std::logic_error("CSV row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += cells[i];
  }
  buffer_ += '\n';
}

void CsvWriter::close() {
  std::ofstream out = open_output(path_);
  out << buffer_;
}

nlohmann::json to_json(const Quantiles& q) {
  return {{"q05", q.q05}, {"q25", q.q25}, {"q50", q.q50}, {"q75", q.q75}, {"q95", q.q95}};
}

nlohmann::json to_json(const Breakdown& b) {
  nlohmann::json j{{"kind", b.kind == Breakdown::Kind::Value ? "value"
                            : b.kind == Breakdown::Kind::All ? "all"
                                                              : "none"}};
  if (b.kind != Breakdown::Kind::None) j["value"] = b.value;
  return j;
}

namespace {

// nlohmann writes NaN as null, which is what we want for failed trials.
nlohmann::json samples_json(const std::vector<double>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (double x : v) a.push_back(std::isfinite(x) ? nlohmann::json(x) : nlohmann::json());
  return a;
}

}  // namespace

nlohmann::json to_json(const RobustnessReport& r) {
  nlohmann::json points = nlohmann::json::array();
  for (const GridPoint& p : r.points) {
    nlohmann::json jp{{"level", p.level},
                      {"mean_weight", p.mean_weight},
                      {"valid", p.valid},
                      {"failures", p.failures},
                      {"rejections", p.rejections},
                      {"samples", samples_json(p.samples)}};
    if (std::isfinite(p.mean)) {
      jp["mean"] = p.mean;
      jp["quantiles"] = to_json(p.quantiles);
      jp["exceedance"] = p.exceedance;
    }
    if (!p.misclass_spc.empty()) jp["misclass_spc"] = samples_json(p.misclass_spc);
    if (!p.misclass_true.empty()) jp["misclass_true"] = samples_json(p.misclass_true);
    if (p.misclass_spc_quantiles) jp["misclass_spc_quantiles"] = to_json(*p.misclass_spc_quantiles);
    if (p.misclass_true_quantiles) jp["misclass_true_quantiles"] = to_json(*p.misclass_true_quantiles);
    points.push_back(std::move(jp));
  }
  return {{"property", r.property},
          {"baseline", r.baseline},
          {"epsilon_abs", std::isfinite(r.epsilon_abs) ? nlohmann::json(r.epsilon_abs) : nlohmann::json("inf")},
          {"points", points},
          {"smoothed_exceedance", r.smoothed_exceedance},
          {"breakdown", to_json(r.breakdown)},
          {"warnings", r.warnings}};
}

nlohmann::json to_json(const ArgmaxReport& r) {
  return {{"property", r.property},   {"baseline_K", r.baseline_K},
          {"grid", r.grid},           {"argmax", r.argmax},
          {"median_argmax", r.median_argmax}, {"breakdown", to_json(r.breakdown)}};
}

void append_csv(CsvWriter& csv, const RobustnessReport& r, const std::vector<std::string>& prefix) {
  for (std::size_t gi = 0; gi < r.points.size(); ++gi) {
    const GridPoint& p = r.points[gi];
    auto emit = [&](const std::string& name, const std::vector<double>& values) {
      for (std::size_t t = 0; t < values.size(); ++t) {
        std::vector<std::string> cells = prefix;
        cells.push_back(std::to_string(gi));
        cells.push_back(format_number(p.level));
        cells.push_back(std::to_string(t));
        cells.push_back(name);
        cells.push_back(format_number(values[t]));
        csv.row(cells);
      }
    };
    if (p.misclass_spc.empty()) {
      emit(r.property, p.samples);
    } else {
      emit("misclass_spc", p.misclass_spc);
      if (!p.misclass_true.empty()) emit("misclass_true", p.misclass_true);
    }
  }
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out = open_output(path);
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace graphrob
