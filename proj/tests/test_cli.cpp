#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mflab/experiments.hpp"

using namespace mflab;
using namespace mflab::cli;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("mflab_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args, std::string* out = nullptr) {
  const auto log = fs::temp_directory_path() / "mflab_cli_stdout.txt";
  const std::string cmd = std::string(MFLAB_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (out) *out = read_file(log);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct WorkerEnv {
  explicit WorkerEnv(const char* n) { setenv("MFLAB_WORKERS", n, 1); }
  ~WorkerEnv() { unsetenv("MFLAB_WORKERS"); }
};

const char* kTomography = R"({
  "experiment": "mode_tomography",
  "spec": {"n": 6, "z_angle": "pi/8", "xx_angle": "pi/4"},
  "depth": 11,
  "omega": "both"
})";

}  // namespace

TEST(Csv, QuotingAndLineEnds) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_field("two\nlines"), "\"two\nlines\"");
  CsvTable t({"x", "label"});
  t.row({"1", "gamma^L_1,gamma^L_2"});
  EXPECT_EQ(t.str(), "x,label\r\n1,\"gamma^L_1,gamma^L_2\"\r\n");
  EXPECT_THROW(t.row({"1"}), Error);
  EXPECT_EQ(csv_number(0.1), "0.1");
  EXPECT_EQ(csv_number(std::nan("")), "nan");
  EXPECT_EQ(csv_number(-INFINITY), "-inf");
}

TEST(Config, UnknownKeyReportsPosition) {
  const std::string text = "{\n  \"experiment\": \"braid\",\n  \"spec\": {\"n\": 5},\n  \"alpah\": 0.3\n}";
  try {
    parse_config(text);
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("alpah"), std::string::npos);
    EXPECT_NE(msg.find("line 4"), std::string::npos) << msg;
  }
  EXPECT_THROW(parse_config("{\"experiment\": \"braid\",\n \"depth\": }"), ConfigError);
  EXPECT_THROW(parse_config("{\"experiment\": \"nope\"}"), ConfigError);
  EXPECT_THROW(parse_config("[1, 2]"), ConfigError);
  EXPECT_THROW(parse_config(R"({"experiment": "braid", "depth": "ten"})"), ConfigError);
}

TEST(Config, EngineResolution) {
  EXPECT_EQ(parse_config(kTomography).engine, Engine::FFSim);
  const auto inter = parse_config(R"({"experiment": "mode_tomography",
    "spec": {"n": 6, "z_angle": 0.1, "xx_angle": 0.7, "zz_angle": 0.1}})");
  EXPECT_EQ(inter.engine, Engine::SVSim);
  EXPECT_THROW(parse_config(R"({"experiment": "mode_tomography", "engine": "ffsim",
    "spec": {"n": 6, "z_angle": 0.1, "xx_angle": 0.7, "zz_angle": 0.1}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"experiment": "mode_tomography", "shots": 100,
    "spec": {"n": 6, "z_angle": 0.1, "xx_angle": 0.7}})"), ConfigError);
  EXPECT_NO_THROW(parse_config(R"({"experiment": "mode_tomography", "shots": 100, "engine": "svsim",
    "spec": {"n": 6, "z_angle": 0.1, "xx_angle": 0.7}})"));
  EXPECT_THROW(parse_config(R"({"experiment": "mode_tomography", "engine": "svsim",
    "spec": {"n": 30, "z_angle": 0.1, "xx_angle": 0.7}})"), CapacityError);
  EXPECT_THROW(parse_config(R"({"experiment": "mode_tomography", "depth": 0,
    "spec": {"n": 6, "z_angle": 0.1, "xx_angle": 0.7}})"), ConfigError);
}

TEST(Pool, OrderedResultsAndErrors) {
  const auto v = parallel_map<int>(50, [](std::size_t i) { return static_cast<int>(i * i); }, 4);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], static_cast<int>(i * i));
  EXPECT_THROW(parallel_map<int>(
                   10, [](std::size_t i) -> int { if (i == 7) throw ConfigError("boom"); return 0; }, 3),
               ConfigError);
  {
    WorkerEnv env("0");
    EXPECT_THROW(worker_count(), ConfigError);
  }
  {
    WorkerEnv env("3");
    EXPECT_EQ(worker_count(), 3);
  }
}

TEST(Runs, TomographyOutputsAndSchema) {
  const auto res = run_experiment(parse_config(kTomography));
  ASSERT_TRUE(res.files.count("series.csv"));
  ASSERT_TRUE(res.files.count("wavefunctions_0.csv"));
  ASSERT_TRUE(res.files.count("modes.json"));
  EXPECT_EQ(res.files.at("wavefunctions_0.csv").substr(0, 40), "mu,psi_L,psi_R,psi_theory,psi_theory_R\r\n");
  EXPECT_EQ(res.files.at("series.csv").rfind("cycle,observable_label,value,value_rescaled\r\n", 0), 0u);
}

TEST(Runs, DeterministicAcrossRunsAndWorkers) {
  const auto cfg = parse_config(R"({"experiment": "braid", "engine": "svsim", "shots": 256, "seed": 7,
    "repetitions": 4, "depth": 5, "spec": {"n": 5, "z_angle": "pi/16", "xx_angle": "pi/4"}})");
  std::map<std::string, std::string> first;
  {
    WorkerEnv env("1");
    first = run_experiment(cfg).files;
  }
  {
    WorkerEnv env("3");
    EXPECT_EQ(run_experiment(cfg).files, first);
  }
  EXPECT_EQ(run_experiment(cfg).files, first);

  const auto disc = parse_config(R"({"experiment": "discriminate", "seed": 3, "realizations": 4,
    "spec": {"n": 8, "z_angle": "pi/16", "xx_angle": "pi/4"}})");
  EXPECT_EQ(run_experiment(disc).files, run_experiment(disc).files);
}

TEST(Runs, ManifestWritten) {
  auto cfg = parse_config(kTomography);
  cfg.output_dir = scratch("manifest").string();
  run(cfg);
  const auto manifest = nlohmann::json::parse(read_file(fs::path(cfg.output_dir) / "manifest.json"));
  EXPECT_EQ(manifest.at("resolved_engine"), "ffsim");
  EXPECT_EQ(manifest.at("version"), kVersion);
  EXPECT_TRUE(fs::exists(fs::path(cfg.output_dir) / "wavefunctions_pi.csv"));
}

TEST(Binary, ExitCodesAndOutputs) {
  const auto dir = scratch("binary");
  std::string out;
  const auto good = dir / "good.json";
  std::ofstream(good) << R"({"experiment": "phase_diagram", "xx_points": 3, "z_points": 3, "n_probe": 20,
    "output_dir": ")" << (dir / "pd").string() << "\"}";
  EXPECT_EQ(run_cli("run " + good.string(), &out), 0) << out;
  EXPECT_TRUE(fs::exists(dir / "pd" / "phase_diagram.csv"));

  const auto bad = dir / "bad.json";
  std::ofstream(bad) << R"({"experiment": "braid", "colour": 1})";
  EXPECT_EQ(run_cli("run " + bad.string(), &out), 1);
  EXPECT_NE(out.find("colour"), std::string::npos);

  const auto big = dir / "big.json";
  std::ofstream(big) << R"({"experiment": "mode_tomography", "engine": "svsim",
    "spec": {"n": 40, "z_angle": 0.1, "xx_angle": 0.7}})";
  EXPECT_EQ(run_cli("run " + big.string(), &out), 2);

  EXPECT_EQ(run_cli("run " + (dir / "missing.json").string(), &out), 1);
  EXPECT_EQ(run_cli("braid --colour 3", &out), 1);
  EXPECT_EQ(run_cli("--version", &out), 0);
  EXPECT_NE(out.find(kVersion), std::string::npos);
  EXPECT_EQ(run_cli("circuit pair --n 3 --index 2 --format json", &out), 0);
  EXPECT_NE(out.find("\"rxy\""), std::string::npos);
  EXPECT_EQ(run_cli("braid --n 5 --z-angle pi/16 --xx-angle pi/4 --depth 0 --output-dir " + (dir / "b").string(), &out), 0)
      << out;
  EXPECT_TRUE(fs::exists(dir / "b" / "braid.csv"));
}
