#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "graphrob/dcsbm.hpp"
#include "graphrob/errors.hpp"
#include "graphrob/experiment.hpp"
#include "graphrob/io.hpp"

using namespace graphrob;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("graphrob_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// DataError message for a file, or "" when ingestion succeeds.
std::string ingest_error(const fs::path& p) {
  try {
    ingest_edge_list(p, false);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(GRAPHROB_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(EdgeList, PathGraph) {
  TempDir dir;
  write_file(dir / "p3.txt", "0 1\n1 2");
  const IngestedGraph g = ingest_edge_list(dir / "p3.txt", false);
  EXPECT_EQ(g.graph.num_nodes(), 3);
  EXPECT_EQ(g.graph.degrees(), (std::vector<double>{1, 2, 1}));
}

TEST(EdgeList, RemapsSparseIdsAndReadsWeights) {
  TempDir dir;
  write_file(dir / "g.txt", "# comment\n\n100 7 2.5\n7 -3   # trailing\n-3 100\n");
  const IngestedGraph g = ingest_edge_list(dir / "g.txt", false);
  EXPECT_EQ(g.ids.external, (std::vector<std::int64_t>{-3, 7, 100}));
  EXPECT_EQ(g.ids.internal(100), 2);
  EXPECT_EQ(g.ids.internal(5), -1);
  EXPECT_DOUBLE_EQ(g.graph.weight(1, 2), 2.5);
  EXPECT_DOUBLE_EQ(g.graph.weight(2, 1), 2.5);
  EXPECT_EQ(g.graph.num_edges(), 3u);
}

TEST(EdgeList, Directed) {
  TempDir dir;
  write_file(dir / "d.txt", "0 1\n1 0 2\n1 2\n");
  const IngestedGraph g = ingest_edge_list(dir / "d.txt", true);
  EXPECT_TRUE(g.graph.directed());
  EXPECT_DOUBLE_EQ(g.graph.weight(1, 0), 2.0);
  EXPECT_DOUBLE_EQ(g.graph.weight(2, 1), 0.0);
}

TEST(EdgeList, Errors) {
  TempDir dir;
  write_file(dir / "a.txt", "a b\n");
  EXPECT_NE(ingest_error(dir / "a.txt").find(":1:"), std::string::npos) << ingest_error(dir / "a.txt");
  write_file(dir / "w.txt", "0 1\n1 2 -1\n");
  EXPECT_NE(ingest_error(dir / "w.txt").find(":2:"), std::string::npos);
  write_file(dir / "f.txt", "0 1 2 3\n");
  EXPECT_FALSE(ingest_error(dir / "f.txt").empty());
  write_file(dir / "x.txt", "0 1 abc\n");
  EXPECT_FALSE(ingest_error(dir / "x.txt").empty());
  write_file(dir / "s.txt", "0 0\n");
  EXPECT_FALSE(ingest_error(dir / "s.txt").empty());
  write_file(dir / "r.txt", "0 1\n1 0\n");
  EXPECT_NE(ingest_error(dir / "r.txt").find(":2:"), std::string::npos);
  write_file(dir / "e.txt", "# nothing\n");
  EXPECT_FALSE(ingest_error(dir / "e.txt").empty());
  EXPECT_THROW(ingest_edge_list(dir / "missing.txt", false), DataError);
}

TEST(Labels, Barbell) {
  TempDir dir;
  write_file(dir / "b.txt", "0 1\n1 2\n0 2\n3 4\n4 5\n3 5\n2 3\n");
  write_file(dir / "b.labels", "0 10\n1 10\n2 10\n3 4\n4 4\n5 4\n5 4\n");
  const IngestedGraph g = ingest_edge_list(dir / "b.txt", false);
  const Clustering c = ingest_labels(dir / "b.labels", g.ids);
  EXPECT_EQ(c.num_clusters(), 2);
  // Ascending cluster ids: 4 -> 0, 10 -> 1.
  EXPECT_EQ(c.labels(), (std::vector<int>{1, 1, 1, 0, 0, 0}));
}

TEST(Labels, Errors) {
  TempDir dir;
  const IdMap ids = IdMap::identity(3);
  write_file(dir / "missing.labels", "0 1\n1 1\n");
  try {
    ingest_labels(dir / "missing.labels", ids);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos) << e.what();
  }
  write_file(dir / "twice.labels", "0 1\n1 1\n2 1\n1 5\n");
  try {
    ingest_labels(dir / "twice.labels", ids);
    FAIL();
  } catch (const DataError& e) {
    const std::string m = e.what();
    EXPECT_NE(m.find("node 1"), std::string::npos) << m;
    EXPECT_NE(m.find("5"), std::string::npos) << m;
  }
  write_file(dir / "unknown.labels", "0 1\n1 1\n2 1\n9 1\n");
  EXPECT_THROW(ingest_labels(dir / "unknown.labels", ids), DataError);
}

TEST(RoundTrip, GeneratedGraph) {
  TempDir dir;
  DcSbmSpec spec;
  spec.n = 60;
  spec.seed = 4;
  spec.block = block_matrix_from_target_gap(5, spec.proportions, 0.5, 0.05).block;
  const DcSbmSample s = generate_dcsbm(spec);
  IdMap ids;
  for (int i = 0; i < 60; ++i) ids.external.push_back(1000 + 3 * i);
  write_edge_list(dir / "g.edges", s.graph, ids);
  write_labels(dir / "g.labels", s.planted, ids);
  const IngestedGraph back = ingest_edge_list(dir / "g.edges", false);
  EXPECT_EQ(back.ids.external, ids.external);
  EXPECT_EQ(back.graph.dense_adjacency(), s.graph.dense_adjacency());
  EXPECT_EQ(ingest_labels(dir / "g.labels", back.ids), s.planted);
}

TEST(Numbers, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.3333333333333333");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  EXPECT_EQ(format_number(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(std::stod(format_number(4.0 / 49.0)), 4.0 / 49.0);
}

TEST(Csv, RowWidthChecked) {
  TempDir dir;
  CsvWriter csv(dir / "x.csv", {"a", "b"});
  csv.row({"1", "2"});
  EXPECT_THROW(csv.row({"1"}), std::logic_error);
  csv.close();
  EXPECT_EQ(read_file(dir / "x.csv"), "a,b\n1,2\n");
}

TEST(Json, ReadErrorsAreConfigErrors) {
  TempDir dir;
  write_file(dir / "bad.json", "{ not json");
  EXPECT_THROW(read_json(dir / "bad.json"), ConfigError);
  EXPECT_THROW(read_json(dir / "none.json"), ConfigError);
}

TEST(Config, DefaultsAndValidation) {
  TempDir dir;
  const ExperimentConfig c = parse_experiment_config(json{{"experiment", "bp-clustering"}, {"seed", 3}}, dir.path());
  EXPECT_EQ(c.kind, ExperimentKind::BpClustering);
  EXPECT_EQ(c.trials, 100);
  EXPECT_EQ(c.families.size(), 4u);
  ASSERT_TRUE(c.graph && c.graph->dcsbm);
  EXPECT_EQ(c.graph->dcsbm->n, 200);
  EXPECT_EQ(c.echo.count("output_dir"), 0u);
  // No weight family involved, none needed.
  for (const char* kind : {"if-histogram", "partial-wcut"}) {
    EXPECT_TRUE(parse_experiment_config(json{{"experiment", kind}, {"seed", 3}}, dir.path()).families.empty());
  }

  EXPECT_THROW(parse_experiment_config(json{{"experiment", "bias"}}, dir.path()), ConfigError);
  EXPECT_THROW(parse_experiment_config(json{{"experiment", "bias"}, {"seed", 1}, {"sede", 2}}, dir.path()),
               ConfigError);
  EXPECT_THROW(parse_experiment_config(json{{"experiment", "nope"}, {"seed", 1}}, dir.path()), ConfigError);
  EXPECT_THROW(parse_experiment_config(json{{"experiment", "custom-sweep"}, {"seed", 1}, {"grid", {0.3, 0.1}}},
                                       dir.path()),
               ConfigError);
  EXPECT_THROW(parse_experiment_config(
                   json{{"experiment", "custom-sweep"}, {"seed", 1}, {"graph", {{"edge_list", "nope.txt"}}}},
                   dir.path()),
               ConfigError);
  ConfigOverrides ov;
  ov.seed = 99;
  ov.threads = 2;
  const ExperimentConfig o = parse_experiment_config(json{{"experiment", "bias"}, {"seed", 1}}, dir.path(), ov);
  EXPECT_EQ(o.seed, 99u);
  EXPECT_EQ(o.threads, 2);
}

TEST(Experiment, CustomSweepBundleIsDeterministic) {
  TempDir dir;
  write_file(dir / "b.txt", "0 1\n1 2\n0 2\n3 4\n4 5\n3 5\n2 3\n");
  write_file(dir / "b.labels", "0 0\n1 0\n2 0\n3 1\n4 1\n5 1\n");
  json j{{"experiment", "custom-sweep"},
         {"seed", 5},
         {"graph", {{"edge_list", "b.txt"}, {"labels", "b.labels"}}},
         {"grid", {0.1, 0.3}},
         {"trials", 7}};
  ConfigOverrides ov;
  ov.output_dir = dir / "run1";
  run_experiment(parse_experiment_config(j, dir.path(), ov));
  ov.output_dir = dir / "run2";
  ov.threads = 3;
  run_experiment(parse_experiment_config(j, dir.path(), ov));
  for (const char* f : {"results.csv", "config.json", "report.json", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(dir / "run1" / f)) << f;
  }
  const std::string csv = read_file(dir / "run1" / "results.csv");
  EXPECT_EQ(csv, read_file(dir / "run2" / "results.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "grid_index,sigma_w,trial,property,value");
  // header + 2 points x 7 trials
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 15);
  EXPECT_EQ(read_file(dir / "run1" / "config.json"), read_file(dir / "run2" / "config.json"));
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  write_file(dir / "good.txt", "0 1\n1 2\n");
  write_file(dir / "bad.txt", "a b\n");
  EXPECT_EQ(run_cli("ingest-check --edges " + (dir / "good.txt").string()), 0);
  EXPECT_EQ(run_cli("ingest-check --edges " + (dir / "bad.txt").string()), 3);
  EXPECT_EQ(run_cli("ingest-check --edges " + (dir / "absent.txt").string()), 3);

  write_file(dir / "noseed.json", R"({"experiment": "bias"})");
  EXPECT_EQ(run_cli("bias --config " + (dir / "noseed.json").string() + " --out " + (dir / "o").string()), 2);
  EXPECT_TRUE(fs::exists(dir / "o" / "error.json") || !fs::exists(dir / "o"));
  write_file(dir / "wrong.json", R"({"experiment": "bias", "seed": 1})");
  EXPECT_EQ(run_cli("bp-clustering --config " + (dir / "wrong.json").string()), 2);

  write_file(dir / "bias.json", R"({"experiment": "bias", "seed": 1, "grid": [0.5], "trials": 3,
                                    "draws": 50, "families": ["gamma"]})");
  EXPECT_EQ(run_cli("bias --config " + (dir / "bias.json").string() + " --out " + (dir / "ok").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "ok" / "results.csv"));
}
