// Copyright 2026 The vfmh Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "vfmh/cli/config.hpp"
#include "vfmh/cli/experiment.hpp"
#include "vfmh/core/errors.hpp"
#include "vfmh/metrics/records.hpp"

namespace vfmh::cli {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  fs::path dir = fs::temp_directory_path() /
                 ("vfmh_cli_" + std::to_string(::getpid()) + "_" + info->name());
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

std::string small_config(const fs::path& out_dir) {
  return "data.source = blobs\n"
         "data.n = 500\n"
         "data.test_n = 100\n"
         "data.features = 32\n"
         "data.classes = 4\n"
         "session.passive = 3\n"
         "party.default.lr = 0.05\n"
         "training.epochs = 2\n"
         "training.batch_size = 64\n"
         "training.d_emb = 8\n"
         "output.dir = " + out_dir.string() + "\n";
}

std::string parse_error(const std::string& text) {
  try {
    parse_config(text, "t.cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, DefaultsAndOverrides) {
  const auto c = parse_config(
      "session.passive = 2  # two passive\n"
      "party.default.optimizer = momentum\n"
      "party.default.lr = 0.2\n"
      "party.2.arch = lenet\n"
      "party.2.optimizer = adam\n"
      "party.2.lr = 0.001\n"
      "method = aggvfl\n");
  ASSERT_EQ(c.parties.size(), 3u);
  EXPECT_EQ(c.parties[0].optimizer.kind, optim::Kind::kMomentum);
  EXPECT_EQ(c.parties[1].optimizer.learning_rate, 0.2);
  EXPECT_EQ(c.parties[2].arch, Architecture::kLenet);
  EXPECT_EQ(c.parties[2].optimizer.kind, optim::Kind::kAdam);
  EXPECT_EQ(c.parties[2].optimizer.learning_rate, 0.001);
  EXPECT_EQ(c.method, Method::kAggVfl);
  EXPECT_EQ(c.batch_size, 128u);
}

TEST(Config, ErrorsNameLineAndKey) {
  EXPECT_NE(parse_error("data.n = 10\ntraining.epoch = 3\n").find("t.cfg:2"), std::string::npos);
  EXPECT_NE(parse_error("training.epoch = 3\n").find("training.epoch"), std::string::npos);
  EXPECT_NE(parse_error("training.epochs = three\n").find("training.epochs"), std::string::npos);
  EXPECT_NE(parse_error("training.epochs = 1\ntraining.epochs = 2\n").find("duplicate"),
            std::string::npos);
  EXPECT_NE(parse_error("no equals sign\n").find("t.cfg:1"), std::string::npos);
  EXPECT_NE(parse_error("session.passive = 2\nparty.3.arch = mlp3\n").find("party.3.arch"),
            std::string::npos);
  EXPECT_NE(parse_error("secure.group = rsa\n").find("secure.group"), std::string::npos);
  EXPECT_NE(parse_error("party.1.arch = custom\n").find("layers"), std::string::npos);
}

TEST(Config, DataPathsResolveAgainstTheConfigDirectory) {
  const auto c = parse_config("data.source = csv\ndata.csv = sub/rows.csv\n", "x",
                              "/srv/configs");
  EXPECT_EQ(c.csv, fs::path("/srv/configs/sub/rows.csv"));
  const auto abs = parse_config("data.csv = /abs/rows.csv\n", "x", "/srv/configs");
  EXPECT_EQ(abs.csv, fs::path("/abs/rows.csv"));
}

TEST(Config, ParsingIsDeterministic) {
  const std::string text = small_config("o");
  const auto a = parse_config(text);
  const auto b = parse_config(text);
  EXPECT_EQ(summary_json(a, RunOutcome{}), summary_json(b, RunOutcome{}));
  EXPECT_FALSE(known_keys().empty());
}

TEST(CmdRun, WritesOneRowPerPartyPerEpoch) {
  const auto dir = scratch_dir();
  const auto cfg = write_file(dir / "run.cfg", small_config(dir / "out"));
  std::ostringstream out, err;
  ASSERT_EQ(cmd_run(cfg, std::nullopt, out, err), 0) << err.str();
  const auto rows = metrics::parse_csv(slurp(dir / "out" / "metrics.csv"));
  EXPECT_EQ(rows.size(), 4u * 2);
  EXPECT_TRUE(fs::exists(dir / "out" / "summary.json"));
}

TEST(CmdRun, MalformedKeyExitsTwoWithItsName) {
  const auto dir = scratch_dir();
  const auto cfg =
      write_file(dir / "bad.cfg", small_config(dir / "out") + "training.bach_size = 8\n");
  std::ostringstream out, err;
  EXPECT_EQ(cmd_run(cfg, std::nullopt, out, err), 2);
  EXPECT_NE(err.str().find("training.bach_size"), std::string::npos);
  EXPECT_EQ(cmd_run(dir / "missing.cfg", std::nullopt, out, err), 2);
}

TEST(CmdRun, RuntimeFailureExitsThree) {
  const auto dir = scratch_dir();
  auto text = small_config(dir / "out");
  text.replace(text.find("blobs"), 5, "csv");
  const auto cfg = write_file(dir / "csv.cfg", text + "data.csv = absent.csv\n");
  std::ostringstream out, err;
  EXPECT_EQ(cmd_run(cfg, std::nullopt, out, err), 3);
}

TEST(CmdRun, SummaryIsBitIdenticalAcrossRuns) {
  const auto dir = scratch_dir();
  std::ostringstream out, err;
  const auto a = write_file(dir / "a.cfg", small_config(dir / "a"));
  const auto b = write_file(dir / "b.cfg", small_config(dir / "b"));
  ASSERT_EQ(cmd_run(a, std::nullopt, out, err), 0);
  ASSERT_EQ(cmd_run(b, std::nullopt, out, err), 0);
  EXPECT_EQ(slurp(dir / "a" / "summary.json"), slurp(dir / "b" / "summary.json"));
  EXPECT_EQ(slurp(dir / "a" / "metrics.csv"), slurp(dir / "b" / "metrics.csv"));
}

TEST(CmdRun, OutputDirectoryEnvironmentOverride) {
  const auto dir = scratch_dir();
  const auto cfg = write_file(dir / "run.cfg", small_config(dir / "ignored"));
  ::setenv("VFMH_OUTPUT_DIR", (dir / "env").c_str(), 1);
  std::ostringstream out, err;
  const int code = cmd_run(cfg, std::nullopt, out, err);
  ::unsetenv("VFMH_OUTPUT_DIR");
  EXPECT_EQ(code, 0);
  EXPECT_TRUE(fs::exists(dir / "env" / "metrics.csv"));
  EXPECT_FALSE(fs::exists(dir / "ignored"));
}

TEST(RunExperiment, TransportsAndMethodsAgree) {
  auto c = parse_config(small_config("unused"));
  const auto inmem = run_experiment(c);
  c.transport = TransportKind::kTcp;
  const auto tcp = run_experiment(c);
  EXPECT_EQ(inmem.records, tcp.records);
  EXPECT_EQ(inmem.models, tcp.models);

  // One party per thread, each with its own TCP endpoint, as separate
  // processes would run them.
  c.port = static_cast<std::uint16_t>(42000 + ::getpid() % 8000);
  std::vector<RunOutcome> parts(4);
  std::vector<std::thread> threads;
  for (std::size_t k = 0; k < 4; ++k) {
    threads.emplace_back([&, k] { parts[k] = run_tcp_party(c, k); });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(parts[0].records, inmem.records);
  for (std::size_t k = 1; k < 4; ++k) EXPECT_EQ(parts[k].models.at(0), inmem.models[k]);

  c.transport = TransportKind::kInMemory;
  c.method = Method::kLocal;
  const auto local = run_experiment(c);
  EXPECT_EQ(local.records.size(), 2u);
  EXPECT_FALSE(local.ledger.has_value());
  c.method = Method::kAggVfl;
  const auto agg = run_experiment(c);
  EXPECT_EQ(agg.records.size(), 8u);
  EXPECT_EQ(agg.joint_accuracy.size(), 2u);
}

TEST(CmdBoundCheck, QuadraticHasNoViolations) {
  const auto dir = scratch_dir();
  const auto cfg = write_file(dir / "q.cfg",
                              "bound.problem = quadratic\n"
                              "bound.curvature = 0.5, 1, 2, 4\n"
                              "bound.seeds = 20\n");
  std::ostringstream out, err;
  EXPECT_EQ(cmd_bound_check(cfg, out, err), 0) << err.str();
  EXPECT_NE(out.str().find("violations 0 /"), std::string::npos) << out.str();
  EXPECT_NE(out.str().find("fixed point"), std::string::npos);
}

TEST(CmdBoundCheck, ExpansiveStepIsNonInformative) {
  const auto dir = scratch_dir();
  const auto cfg = write_file(dir / "q.cfg",
                              "bound.problem = quadratic\n"
                              "bound.curvature = 1\n"
                              "bound.lr = 3\n"
                              "bound.seeds = 2\n");
  std::ostringstream out, err;
  EXPECT_EQ(cmd_bound_check(cfg, out, err), 0);
  EXPECT_NE(out.str().find("non-informative"), std::string::npos);
  EXPECT_NE(err.str().find("warning"), std::string::npos);
}

TEST(CmdBoundCheck, NonConvexDecisionNetExitsTwo) {
  const auto dir = scratch_dir();
  const auto cfg = write_file(dir / "nc.cfg",
                              small_config(dir / "out") +
                                  "party.default.arch = custom\n"
                                  "party.default.layers = dense:8|dense:8,relu,dense:4\n"
                                  "bound.seeds = 1\n");
  std::ostringstream out, err;
  EXPECT_EQ(cmd_bound_check(cfg, out, err), 2) << err.str();
}

TEST(CmdBoundCheck, LogisticCalibrationHolds) {
  const auto dir = scratch_dir();
  const auto cfg = write_file(dir / "l.cfg", small_config(dir / "out") +
                                                 "bound.problem = logistic\n"
                                                 "bound.seeds = 3\n"
                                                 "bound.steps = 50\n"
                                                 "bound.rows = 200\n");
  std::ostringstream out, err;
  EXPECT_EQ(cmd_bound_check(cfg, out, err), 0) << out.str() << err.str();
  EXPECT_NE(out.str().find("bound holds"), std::string::npos);
}

TEST(CmdSynth, DeterministicAndReloadable) {
  const auto dir = scratch_dir();
  SynthOptions opt;
  opt.blobs.n = 120;
  opt.blobs.classes = 3;
  opt.blobs.features = 7;
  opt.blobs.seed = 9;
  std::ostringstream out, err;
  opt.out_dir = dir / "a";
  ASSERT_EQ(cmd_synth(opt, out, err), 0);
  opt.out_dir = dir / "b";
  ASSERT_EQ(cmd_synth(opt, out, err), 0);
  EXPECT_EQ(slurp(dir / "a" / "blobs.csv"), slurp(dir / "b" / "blobs.csv"));

  const auto loaded = data::load_csv(dir / "a" / "blobs.csv");
  const auto fresh = data::synth_blobs(opt.blobs);
  EXPECT_EQ(loaded.labels, fresh.labels);
  EXPECT_EQ(loaded.features, fresh.features);
}

TEST(CmdLedger, EchoesRoundFormulas) {
  const auto dir = scratch_dir();
  auto text = small_config(dir / "out");
  text.replace(text.find("training.epochs = 2"), 19, "training.epochs = 20");
  text += "training.evaluate = false\n";
  const auto cfg = write_file(dir / "run.cfg", text);
  std::ostringstream out, err;
  ASSERT_EQ(cmd_run(cfg, std::nullopt, out, err), 0) << err.str();
  std::ostringstream report;
  // 400 training rows in batches of 64: 7 rounds per epoch.
  EXPECT_EQ(cmd_ledger(dir / "out" / "summary.json", 3, report, err), 0);
  EXPECT_NE(report.str().find("1 x 4 x 20 = 80"), std::string::npos) << report.str();
  EXPECT_NE(report.str().find("3 x 2 x 20 = 120"), std::string::npos);
  EXPECT_NE(report.str().find("expected messages per passive party: 560"), std::string::npos);
  EXPECT_EQ(cmd_ledger(dir / "nothing.json", std::nullopt, report, err), 2);
}

}  // namespace
}  // namespace vfmh::cli
