#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "raglog/cli.hpp"
#include "raglog/synthetic.hpp"

namespace fs = std::filesystem;
using namespace raglog;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "raglog");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("raglog_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::ofstream log(path("raw.log"));
    for (const auto& e : synthetic::corpus(600, 30, 5)) log << e.raw << '\n';
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, IngestWritesDataset) {
  const auto r = run_cli({"ingest", "--input", path("raw.log"), "--out", path("ds.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("entries=630"), std::string::npos);
  EXPECT_NE(r.out.find("anomalous=30"), std::string::npos);
  const auto ds = read_dataset(path("ds.jsonl"));
  EXPECT_EQ(ds.entries.size(), 630u);
  EXPECT_EQ(ds.source, "raw");
}

TEST_F(CliTest, SplitBuildClassifyProject) {
  ASSERT_EQ(run_cli({"ingest", "--input", path("raw.log"), "--out", path("ds.jsonl")}).code, 0);
  auto r = run_cli({"split", "--dataset", path("ds.jsonl"), "--test-fraction", "0.2", "--seed", "3", "--out-train",
                path("train.jsonl"), "--out-test", path("test.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto train = read_dataset(path("train.jsonl"));
  const auto test = read_dataset(path("test.jsonl"));
  EXPECT_EQ(test.entries.size(), 126u);
  for (const auto& e : train.entries) EXPECT_EQ(e.label, GroundTruth::Normal);

  r = run_cli({"build", "--dataset", path("train.jsonl"), "--strategy", "clustered", "--k", "auto", "--k-max", "6",
           "--per-cluster", "20", "--seed", "1", "--dim", "128", "--out", path("store.bin"), "--elbow-csv",
           path("elbow.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("strategy=clustered"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("store.bin.report.json")));
  EXPECT_EQ(slurp(path("elbow.csv")).substr(0, 7), "k,wcss\n");
  const auto report = nlohmann::json::parse(slurp(path("store.bin.report.json")));
  EXPECT_EQ(report["strategy"], "clustered");
  EXPECT_EQ(report["k_mode"], "auto");

  const std::string normal = synthetic::normal_message(0, 9);
  r = run_cli({"classify", "--store", path("store.bin"), "--line", normal, "--trace", path("trace.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "normal\n");
  const auto trace = nlohmann::json::parse(slurp(path("trace.json")));
  EXPECT_EQ(trace["verdict"], "normal");
  EXPECT_EQ(trace["query"], normal);
  EXPECT_EQ(trace["hits"].size(), 5u);

  r = run_cli({"classify", "--store", path("store.bin"), "--line", "ΔΣΩ λμν ξπρ"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "abnormal\n");

  r = run_cli({"project", "--store", path("store.bin"), "--out", path("map.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = slurp(path("map.csv"));
  EXPECT_EQ(csv.substr(0, 12), "x,y,cluster\n");
  const auto records = VectorStore::load(path("store.bin")).size();
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), records + 1);
}

TEST_F(CliTest, RandomBuildFromRawLog) {
  const auto r = run_cli({"build", "--dataset", path("raw.log"), "--format", "bgl", "--strategy", "random", "--n", "40",
                      "--dim", "64", "--out", path("r.bin")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto s = VectorStore::load(path("r.bin"));
  EXPECT_EQ(s.size(), 40u);
  EXPECT_EQ(s.header().embedder, "hash3-fnv1a64-d64");
}

TEST_F(CliTest, EvalIsReproducible) {
  ASSERT_EQ(run_cli({"ingest", "--input", path("raw.log"), "--out", path("ds.jsonl")}).code, 0);
  const std::vector<std::string> base = {"eval", "--dataset", path("ds.jsonl"), "--seed", "7", "--n", "60",
                                         "--k", "3", "--per-cluster", "20", "--dim", "128", "--traces"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out", path("a")});
  b.insert(b.end(), {"--out", path("b")});
  const auto ra = run_cli(a);
  ASSERT_EQ(ra.code, 0) << ra.err;
  const auto rb = run_cli(b);
  ASSERT_EQ(rb.code, 0) << rb.err;
  EXPECT_EQ(slurp(path("a/report.json")), slurp(path("b/report.json")));
  EXPECT_EQ(slurp(path("a/comparison.csv")), slurp(path("b/comparison.csv")));
  EXPECT_EQ(slurp(path("a/traces-raw-clustered.jsonl")), slurp(path("b/traces-raw-clustered.jsonl")));
  EXPECT_NE(ra.out.find("config_digest="), std::string::npos);

  const auto report = nlohmann::json::parse(slurp(path("a/report.json")));
  EXPECT_EQ(report["format"], "raglog-eval");
  EXPECT_EQ(report["comparison"]["rows"].size(), 2u);
  EXPECT_EQ(report["config_digest"], config_digest(report["config"]));

  const auto rc = run_cli({"eval", "--dataset", path("ds.jsonl"), "--seed", "8", "--n", "60", "--k", "3",
                       "--per-cluster", "20", "--dim", "128", "--out", path("c")});
  ASSERT_EQ(rc.code, 0) << rc.err;
  EXPECT_NE(nlohmann::json::parse(slurp(path("c/report.json")))["config_digest"], report["config_digest"]);
}

TEST_F(CliTest, ConfigFileAndFlagPrecedence) {
  ASSERT_EQ(run_cli({"ingest", "--input", path("raw.log"), "--out", path("ds.jsonl")}).code, 0);
  std::ofstream(path("cfg.json")) << nlohmann::json{{"datasets", {{{"path", path("ds.jsonl")}}}},
                                                    {"strategies", {"random"}},
                                                    {"random", {{"n", 30}}},
                                                    {"embedder", {{"dim", 64}}}}
                                         .dump();
  const auto r = run_cli({"eval", "--config", path("cfg.json"), "--n", "45", "--out", path("o")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = nlohmann::json::parse(slurp(path("o/report.json")));
  EXPECT_EQ(report["config"]["random"]["n"], 45);
  EXPECT_EQ(report["config"]["embedder"]["dim"], 64);
  EXPECT_EQ(report["comparison"]["rows"].size(), 1u);
}

TEST_F(CliTest, ExitCodes) {
  auto r = run_cli({});
  EXPECT_EQ(r.code, 2);
  r = run_cli({"build", "--dataset", path("raw.log")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--out"), std::string::npos);
  r = run_cli({"ingest", "--input", path("missing.log"), "--out", path("x.jsonl")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("IoError"), std::string::npos);
  r = run_cli({"classify", "--store", path("missing.bin"), "--line", "x"});
  EXPECT_EQ(r.code, 1);
  r = run_cli({"eval", "--dataset", path("raw.log"), "--format", "bgl", "--k", "lots", "--out", path("e")});
  EXPECT_EQ(r.code, 2);
}

TEST_F(CliTest, RemoteBackendWithoutCredentialFails) {
  ASSERT_EQ(run_cli({"build", "--dataset", path("raw.log"), "--format", "bgl", "--strategy", "random", "--n", "10",
                 "--dim", "64", "--out", path("r.bin")})
                .code,
            0);
  ::unsetenv("RAGLOG_API_KEY");
  const auto r = run_cli({"classify", "--store", path("r.bin"), "--line", "x", "--backend", "remote"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("RAGLOG_API_KEY"), std::string::npos);
}
