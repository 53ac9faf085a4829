#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "fixtures.hpp"
#include "ookgate/calibration.hpp"
#include "ookgate/cli.hpp"
#include "ookgate/ingest.hpp"
#include "ookgate/mock_endpoints.hpp"

namespace ookgate {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ookgate_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::mt19937_64 rng(71);
    testing::ClusterGeometry g;
    write(path("corpus.emb"), testing::cluster(g.center_a(), 1.0, 200, rng), "d");
    write(path("ik.emb"), testing::cluster(g.center_a(), 1.0, 120, rng), "q");
    write(path("ook.emb"), testing::cluster(g.center_b(4.0), 1.0, 120, rng), "o");
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static void write(const std::string& p, const std::vector<Embedding>& rows, const std::string& prefix) {
    EmbeddingSet set;
    set.dim = rows.empty() ? 64 : rows.front().size();
    set.vectors = rows;
    set.ids = testing::numbered_ids(rows.size(), prefix);
    write_embeddings(p, set);
  }

  void index_and_calibrate(const std::string& stat = "energy") {
    ASSERT_EQ(run({"index", "--embeddings", path("corpus.emb"), "--out", path("idx.emb")}).code, 0);
    const auto r = run({"calibrate", "--index", path("idx.emb"), "--queries", path("ik.emb"), "--stat",
                        stat, "--k", "8", "--out", path("cal.json")});
    ASSERT_EQ(r.code, 0) << r.err;
  }

  fs::path dir_;
};

TEST_F(CliTest, IndexWritesManifest) {
  const auto r = run({"index", "--embeddings", path("corpus.emb"), "--out", path("idx.emb")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("n=200 dim=64"), std::string::npos);
  const auto manifest = nlohmann::json::parse(slurp(path("idx.emb.manifest.json")));
  EXPECT_EQ(manifest["n"], 200);
  EXPECT_EQ(manifest["fingerprint"].get<std::string>().size(), 64u);
  EXPECT_EQ(read_embeddings(path("idx.emb")), read_embeddings(path("corpus.emb")));
}

TEST_F(CliTest, MissingInputIsExitTwoAndNamesPath) {
  const auto r = run({"index", "--embeddings", path("absent.emb"), "--out", path("idx.emb")});
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_NE(r.err.find("absent.emb"), std::string::npos);
  EXPECT_EQ(run({"frobnicate"}).code, kExitInput);
  EXPECT_EQ(run({}).code, kExitInput);
}

TEST_F(CliTest, ZeroVectorUnderCosineIsExitOne) {
  write(path("zero.emb"), {{1, 0}, {0, 0}}, "z");
  const auto r = run({"index", "--embeddings", path("zero.emb"), "--out", path("idx.emb")});
  EXPECT_EQ(r.code, kExitError);
  EXPECT_NE(r.err.find("ZeroVector"), std::string::npos);
}

TEST_F(CliTest, CalibrateGateAndStrict) {
  index_and_calibrate();
  const auto cal = load_calibration(path("cal.json"));
  EXPECT_EQ(cal.n_cal(), 120u);

  auto r = run({"gate", "--calibration", path("cal.json"), "--index", path("idx.emb"), "--queries",
                path("ik.emb")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::size_t count = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["reject"], j["p_value"].get<double>() <= 0.05);
    ++count;
  }
  EXPECT_EQ(count, 120u);

  // a single orthogonal query
  std::vector<Embedding> orth{Embedding(64, 0.0f)};
  orth[0][5] = -1.0f;
  write(path("orth.emb"), orth, "x");
  r = run({"gate", "--calibration", path("cal.json"), "--index", path("idx.emb"), "--queries",
           path("orth.emb")});
  ASSERT_EQ(r.code, kExitOk);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["reject"], true);
  EXPECT_EQ(j["p_value"], 0.0);
  EXPECT_EQ(j["query_id"], "x0");
  r = run({"gate", "--calibration", path("cal.json"), "--index", path("idx.emb"), "--queries",
           path("orth.emb"), "--strict"});
  EXPECT_EQ(r.code, kExitRejected);

  write(path("wrongdim.emb"), {Embedding(8, 1.0f)}, "w");
  r = run({"gate", "--calibration", path("cal.json"), "--index", path("idx.emb"), "--queries",
           path("wrongdim.emb")});
  EXPECT_EQ(r.code, kExitError);
}

TEST_F(CliTest, SimesCalibrationReloads) {
  index_and_calibrate("simes");
  const auto cal = load_calibration(path("cal.json"));
  EXPECT_EQ(cal.rank_pools.size(), 8u);
  EXPECT_EQ(cal.stat.kind, Statistic::Simes);
}

TEST_F(CliTest, DriftExitCodes) {
  index_and_calibrate();
  auto r = run({"drift", "--calibration", path("cal.json"), "--index", path("idx.emb"), "--batch",
                path("ik.emb")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out)["reject"], false);

  std::vector<Embedding> orth;
  for (int i = 0; i < 50; ++i) {
    Embedding v(64, 0.0f);
    v[2 + i % 60] = 1.0f;
    v[0] = -0.5f;
    orth.push_back(v);
  }
  write(path("orth.emb"), orth, "x");
  r = run({"drift", "--calibration", path("cal.json"), "--index", path("idx.emb"), "--batch",
           path("orth.emb"), "--strict"});
  EXPECT_EQ(r.code, kExitRejected);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["reject"], true);
  EXPECT_NEAR(j["threshold"].get<double>(), std::sqrt(-std::log(0.025) * 170.0 / (2.0 * 6000.0)), 1e-12);

  write(path("empty.emb"), {}, "e");
  r = run({"drift", "--calibration", path("cal.json"), "--index", path("idx.emb"), "--batch",
           path("empty.emb")});
  EXPECT_EQ(r.code, kExitInput);

  std::ofstream(path("garbage.emb")) << "not an embedding file";
  std::ofstream(path("garbage.emb.ids")) << "";
  r = run({"drift", "--calibration", path("cal.json"), "--index", path("idx.emb"), "--batch",
           path("garbage.emb")});
  EXPECT_EQ(r.code, kExitInput);
}

TEST_F(CliTest, EvalReportsAndPoolSize) {
  index_and_calibrate();
  const std::vector<std::string> base{"eval",       "--calibration", path("cal.json"), "--index",
                                      path("idx.emb"), "--ik",       path("ik.emb"),   "--ook",
                                      path("ook.emb")};
  auto args = base;
  EXPECT_EQ(run(args).code, kExitInput);  // 120 < 300 without replacement

  args.insert(args.end(), {"--n-per-class", "100", "--runs", "4", "--seed", "3", "--out-json",
                           path("r.json"), "--out-csv", path("r.csv")});
  auto r = run(args);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("auroc="), std::string::npos);
  const auto report = nlohmann::json::parse(slurp(path("r.json")));
  EXPECT_GE(report["auroc"].get<double>(), 0.99);
  const auto csv = slurp(path("r.csv"));
  ASSERT_EQ(run(args).code, kExitOk);
  EXPECT_EQ(slurp(path("r.csv")), csv);

  auto same = base;
  same[6] = path("ik.emb");
  same[8] = path("ik.emb");
  same.insert(same.end(), {"--with-replacement", "--out-json", path("s.json")});
  ASSERT_EQ(run(same).code, kExitOk);
  EXPECT_NEAR(nlohmann::json::parse(slurp(path("s.json")))["auroc"].get<double>(), 0.5, 0.06);
}

TEST_F(CliTest, ReportShapes) {
  index_and_calibrate();
  run({"gate", "--calibration", path("cal.json"), "--index", path("idx.emb"), "--queries",
       path("ik.emb"), "--out", path("ik.jsonl")});
  std::ofstream(path("plain.txt")) << "0.5\n-3.25\n\n1e-3\n";
  auto r = run({"report", "--calibration", path("cal.json"), "--scores", "ik=" + path("ik.jsonl"),
                "--scores", path("plain.txt"), "--out-dir", path("plots")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  auto hist = slurp(path("plots/histogram.csv"));
  EXPECT_EQ(hist.substr(0, hist.find('\n')), "kind,source,bin,lo,hi,count");
  EXPECT_EQ(std::count(hist.begin(), hist.end(), '\n'), 1 + 2 * 50 + 1);
  EXPECT_NE(hist.find("\ncritical_value,alpha=0.05,,"), std::string::npos);
  EXPECT_NE(hist.find("\nhistogram,plain,0,"), std::string::npos);
  const auto roc = slurp(path("plots/roc.csv"));
  EXPECT_EQ(roc.substr(0, roc.find('\n')), "source,fpr,tpr,threshold");

  r = run({"report", "--calibration", path("cal.json"), "--scores", path("plain.txt"), "--bins", "10",
           "--out-dir", path("plots")});
  ASSERT_EQ(r.code, kExitOk);
  hist = slurp(path("plots/histogram.csv"));
  EXPECT_EQ(std::count(hist.begin(), hist.end(), '\n'), 1 + 10 + 1);

  std::ofstream(path("empty.txt")) << "\n";
  r = run({"report", "--calibration", path("cal.json"), "--scores", path("empty.txt"), "--out-dir",
           path("plots")});
  EXPECT_EQ(r.code, kExitInput);
}

TEST_F(CliTest, ConfigFileUnderFlags) {
  ASSERT_EQ(run({"index", "--embeddings", path("corpus.emb"), "--out", path("idx.emb")}).code, 0);
  std::ofstream(path("run.toml")) << "# settings\n[calibrate]\nstat = \"mss\"\nk = 4\nout = \""
                                  << path("cfg.json") << "\"\nunknown = 1\n";
  auto r = run({"--config", path("run.toml"), "calibrate", "--index", path("idx.emb"), "--queries",
                path("ik.emb"), "--k", "6"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto cal = load_calibration(path("cfg.json"));
  EXPECT_EQ(cal.stat.kind, Statistic::Mss);
  EXPECT_EQ(cal.stat.k, 6u);

  r = run({"--config", path("absent.toml"), "calibrate", "--index", path("idx.emb")});
  EXPECT_EQ(r.code, kExitInput);
}

TEST_F(CliTest, TextPipelineWithMockEndpoints) {
  mock::MockServer server;
  std::ofstream docs(path("docs.jsonl"));
  for (int t = 0; t < 4; ++t) {
    for (int d = 0; d < 5; ++d) {
      nlohmann::json j{{"id", "d" + std::to_string(t) + "_" + std::to_string(d)},
                       {"text", "topic-t" + std::to_string(t) + " body " + std::string(300, 'a' + d)}};
      docs << j.dump() << "\n";
    }
  }
  docs.close();
  auto r = run({"index", "--docs", path("docs.jsonl"), "--chunk-size", "200", "--overlap", "50",
                "--embed-url", server.embed_url(), "--out", path("idx.emb")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(path("idx.emb.chunks.jsonl")));

  r = run({"calibrate", "--index", path("idx.emb"), "--synthesize", "--chunks", "30", "--per-chunk",
           "2", "--seed", "4", "--embed-url", server.embed_url(), "--chat-url", server.chat_url(),
           "--k", "8", "--out", path("cal.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("provenance=synthetic"), std::string::npos);
  EXPECT_EQ(load_calibration(path("cal.json")).n_cal(), 60u);
  EXPECT_TRUE(fs::exists(path("cal.json.synthetic.jsonl")));

  r = run({"gate", "--calibration", path("cal.json"), "--index", path("idx.emb"), "--text",
           "topic-t1 question", "--text", "unrelated words", "--embed-url", server.embed_url()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("\"query_id\":\"text-1\""), std::string::npos);

  r = run({"synthesize", "--chunk-file", path("idx.emb.chunks.jsonl"), "--chat-url", server.chat_url(),
           "--embed-url", server.embed_url(), "--out", path("q.jsonl"), "--emb-out", path("q.emb")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(read_embeddings(path("q.emb")).vectors.size(), read_jsonl_records(path("q.jsonl")).size());

  r = run({"calibrate", "--index", path("idx.emb"), "--synthesize", "--embed-url", server.embed_url(),
           "--out", path("cal2.json")});
  EXPECT_EQ(r.code, kExitError);  // no chat endpoint
}

}  // namespace
}  // namespace ookgate
