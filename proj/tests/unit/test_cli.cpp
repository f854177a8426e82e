#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "factorpred/cli.hpp"
#include "factorpred/csv_io.hpp"

using namespace factorpred;
namespace fs = std::filesystem;

namespace {

const fs::path kData = FACTORPRED_TEST_DATA;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "factorpred_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunConfig parse(std::vector<std::string> args) {
  args.insert(args.begin(), "factorpred");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return parse_command_line(static_cast<int>(argv.size()), argv.data());
}

struct Outcome {
  int code = 0;
  std::string out;
  std::string log;
};

Outcome run_args(std::vector<std::string> args) {
  Outcome o;
  std::ostringstream out, log;
  try {
    o.code = run(parse(std::move(args)), out, log);
  } catch (const Error& e) {
    log << error_record(code_name(e.code()), exit_code(e.code()), e.what());
    o.code = exit_code(e.code());
  }
  o.out = out.str();
  o.log = log.str();
  return o;
}

std::string error_code_in(const std::string& log) {
  const auto line = log.substr(log.find('{'));
  return nlohmann::json::parse(line.substr(0, line.find('\n')))["error"]["code"];
}

double value_named(const std::string& csv, const std::string& name) {
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(name + ",", 0) == 0) return std::stod(line.substr(name.size() + 1));
  }
  ADD_FAILURE() << "no row " << name;
  return std::nan("");
}

}  // namespace

TEST(CommandLine, ParsesFlagsAndLists) {
  const RunConfig c = parse({"bench", "--T", "100,500", "--p=48,96", "--reps", "3", "--slope",
                             "rough", "--sigma-u", "5", "--format", "json", "--seed", "9"});
  EXPECT_EQ(c.command, Command::kBench);
  EXPECT_EQ(c.sim.T, (std::vector<int>{100, 500}));
  EXPECT_EQ(c.sim.p, (std::vector<int>{48, 96}));
  EXPECT_EQ(c.sim.replications, 3);
  EXPECT_EQ(c.sim.slope, SlopeKind::kRough);
  EXPECT_EQ(c.sim.sigma_u, 5.0);
  EXPECT_EQ(c.sim.sigma_eps, 2.0);
  EXPECT_EQ(c.sim.n_test, 100);
  EXPECT_EQ(c.l_max, 25);
  EXPECT_EQ(c.format, OutputFormat::kJson);
  EXPECT_EQ(c.sim.seed, 9u);
}

TEST(CommandLine, ConfigFileWithFlagOverride) {
  const fs::path dir = scratch("config");
  write_text_file(dir / "run.cfg", "reps = 7\nlmax = 12\nslope = rough\n");
  const RunConfig c = parse({"bench", "--config", (dir / "run.cfg").string(), "--lmax", "5"});
  EXPECT_EQ(c.sim.replications, 7);
  EXPECT_EQ(c.sim.slope, SlopeKind::kRough);
  EXPECT_EQ(c.l_max, 5);
}

TEST(CommandLine, RejectsUnknownInput) {
  EXPECT_THROW(parse({"bench", "--bogus", "1"}), Error);
  EXPECT_THROW(parse({"explode"}), Error);
  EXPECT_THROW(parse({"bench", "--slope", "wiggly"}), Error);
  EXPECT_THROW(parse({"bench", "--format", "xml"}), Error);
  EXPECT_EQ(run_args({"bench", "--reps", "0"}).code, 2);
  EXPECT_EQ(run_args({"bench", "--rho", "0.95"}).code, 2);
  const Outcome o = run_args({"fit", "--panel", "x.csv"});
  EXPECT_EQ(o.code, 2);
  EXPECT_EQ(error_code_in(o.log), "E_CONFIG");
}

TEST(Run, PredictNoiselessExample) {
  const Outcome o = run_args({"predict", "--panel", (kData / "noiseless/panel.csv").string(),
                              "--response", (kData / "noiseless/response.csv").string(),
                              "--order", "3"});
  ASSERT_EQ(o.code, 0) << o.log;
  const std::string expected = read_text_file(kData / "noiseless/expected.csv");
  EXPECT_NEAR(value_named(o.out, "prediction"), value_named(expected, "prediction"), 1e-8);
  EXPECT_EQ(value_named(o.out, "order_used"), 3.0);
}

TEST(Run, PredictJsonWithSelection) {
  const Outcome o = run_args({"predict", "--panel", (kData / "noiseless/panel.csv").string(),
                              "--response", (kData / "noiseless/response.csv").string(),
                              "--lmax", "3", "--format", "json"});
  ASSERT_EQ(o.code, 0) << o.log;
  const auto doc = nlohmann::json::parse(o.out);
  EXPECT_EQ(doc["order_used"], 3);
  EXPECT_EQ(doc["score_new"].size(), 3u);
  EXPECT_EQ(doc["gcv_trace"].size(), 3u);
}

TEST(Run, MissingPanelIsIoError) {
  const Outcome o = run_args({"predict", "--panel", "/nonexistent/panel.csv", "--response",
                              (kData / "noiseless/response.csv").string()});
  EXPECT_EQ(o.code, 3);
  EXPECT_EQ(error_code_in(o.log), "E_IO");
}

TEST(Run, NumericalFailureExitsWithFour) {
  const Outcome o = run_args({"predict", "--panel", (kData / "noiseless/panel.csv").string(),
                              "--response", (kData / "noiseless/response.csv").string(),
                              "--order", "5"});
  EXPECT_EQ(o.code, 4);
  EXPECT_EQ(error_code_in(o.log), "E_RANK");
}

TEST(Run, FitWritesTraceAndWarnsWhenCapped) {
  const fs::path dir = scratch("fit");
  const Outcome o = run_args({"fit", "--panel", (kData / "noiseless/panel.csv").string(),
                              "--response", (kData / "noiseless/response.csv").string(), "--lmax",
                              "3", "--out", (dir / "trace.csv").string()});
  ASSERT_EQ(o.code, 0) << o.log;
  const std::string text = read_text_file(dir / "trace.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "ell,gcv,residual_ss,selected");
  EXPECT_NE(text.find("\n3,"), std::string::npos);

  // 41 panel rows, 40 responses, p = 16: the cap is min(38, 15).
  const Outcome capped = run_args({"fit", "--panel", (kData / "noiseless/panel.csv").string(),
                                   "--response", (kData / "noiseless/response.csv").string()});
  EXPECT_NE(capped.log.find("capped"), std::string::npos);
}

TEST(Run, BenchSingleReplication) {
  const Outcome o = run_args({"bench", "--T", "20", "--p", "8", "--reps", "1", "--ntest", "3",
                              "--lmax", "4", "--threads", "1"});
  ASSERT_EQ(o.code, 0) << o.log;
  const auto rows = parse_report(o.out, OutputFormat::kCsv);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].T, 20);
  EXPECT_EQ(rows[0].p, 8);
  EXPECT_EQ(rows[0].replications_ok, 1);
}

TEST(Run, BenchFilesAreDeterministic) {
  const fs::path dir = scratch("bench");
  const std::vector<std::string> base = {"bench", "--T", "20,30", "--p", "8", "--reps", "3",
                                         "--ntest", "4", "--lmax", "5", "--threads", "2"};
  auto first = base;
  first.insert(first.end(), {"--out", (dir / "a.csv").string()});
  auto second = base;
  second.insert(second.end(), {"--out", (dir / "b.csv").string()});
  ASSERT_EQ(run_args(first).code, 0);
  ASSERT_EQ(run_args(second).code, 0);
  EXPECT_EQ(read_text_file(dir / "a.csv"), read_text_file(dir / "b.csv"));
  EXPECT_EQ(read_text_file(dir / "a_long.csv"), read_text_file(dir / "b_long.csv"));
  EXPECT_TRUE(fs::exists(dir / "a_meta.json"));
  const std::string long_csv = read_text_file(dir / "a_long.csv");
  EXPECT_EQ(std::count(long_csv.begin(), long_csv.end(), '\n'), 7);
}

TEST(Run, SimulateWritesDataset) {
  const fs::path dir = scratch("simulate");
  const Outcome o = run_args({"simulate", "--T", "30", "--p", "12", "--ntest", "5", "--seed", "4",
                              "--out", (dir / "ds").string()});
  ASSERT_EQ(o.code, 0) << o.log;
  for (const char* f : {"panel.csv", "signal.csv", "scores.csv", "loadings.csv", "response.csv",
                        "oracle.csv", "predict_panel.csv", "train_response.csv", "dataset.json"}) {
    EXPECT_TRUE(fs::exists(dir / "ds" / f)) << f;
  }
  const CurvePanel panel = load_panel_csv(dir / "ds/panel.csv");
  EXPECT_EQ(panel.n_obs(), 35);
  EXPECT_EQ(load_panel_csv(dir / "ds/predict_panel.csv").n_obs(), 31);
  EXPECT_EQ(load_vector_csv(dir / "ds/train_response.csv").size(), 30);

  // The written pair feeds straight into predict.
  const Outcome p = run_args({"predict", "--panel", (dir / "ds/predict_panel.csv").string(),
                              "--response", (dir / "ds/train_response.csv").string(), "--lmax", "5"});
  EXPECT_EQ(p.code, 0) << p.log;
}

TEST(Run, DiagnoseWritesSeries) {
  const fs::path dir = scratch("diagnose");
  const Outcome o = run_args({"diagnose", "--T", "30,60", "--p", "20", "--reps", "2", "--threads",
                              "1", "--out", (dir / "h.csv").string()});
  ASSERT_EQ(o.code, 0) << o.log;
  const std::string text = read_text_file(dir / "h.csv");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  EXPECT_TRUE(fs::exists(dir / "h_long.csv"));
}

TEST(ErrorRecord, IsSingleLineJson) {
  const std::string rec = error_record("E_IO", 3, "cannot open \"x\"\n");
  EXPECT_EQ(rec.find('\n'), std::string::npos);
  const auto doc = nlohmann::json::parse(rec);
  EXPECT_EQ(doc["error"]["code"], "E_IO");
  EXPECT_EQ(doc["error"]["exit_code"], 3);
}
