// Copyright 2026 The fnlgen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "commands.h"
#include "fnlgen/errors.h"
#include "fnlgen/rng.h"
#include "json.hpp"
#include "run_config.h"

namespace fnlgen::cli {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small cohorts and a short run so the full pipeline takes well under a second.
const std::vector<std::string> kSmall = {
    "--set", "cohort.train_exams=12",
    "--set", "cohort.internal_exams=4",
    "--set", "cohort.shifted_exams=4",
    "--set", "cohort.candidates_per_exam=60",
    "--set", R"(cohort.positives_per_exam={"max":5,"decay":3})",
    "--set", "train.max_steps=60",
    "--set", "sampler.batch_size=32",
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fnlgen_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args, bool small = true) {
    out_.str("");
    err_.str("");
    if (small) args.insert(args.end(), kSmall.begin(), kSmall.end());
    return run_cli(args, out_, err_);
  }

  std::string p(const std::string& name) const { return (dir_ / name).string(); }

  void generate_and_train() {
    ASSERT_EQ(run({"generate", "--out", dir_.string()}), kExitOk) << err_.str();
    ASSERT_EQ(run({"train", "--cohort", p("train.cohort.json"), "--out", dir_.string()}), kExitOk)
        << err_.str();
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST(RunConfigTest, ShippedDefaultMatchesEmbedded) {
  const auto shipped = nlohmann::json::parse(slurp(fs::path(FNLGEN_CONFIG_DIR) / "default.json"));
  EXPECT_EQ(shipped, nlohmann::json::parse(default_config_text()));
}

TEST(RunConfigTest, Defaults) {
  const RunConfig rc = load_run_config({});
  EXPECT_EQ(rc.seed, 20260101u);
  EXPECT_EQ(rc.train.weights.w_bce, 0.9);
  EXPECT_EQ(rc.train.weights.w_fnl, 0.1);
  EXPECT_EQ(rc.train.net.latent_dim, 4u);
  EXPECT_EQ(rc.train.target_sensitivity, 0.9);
  EXPECT_EQ(rc.generate.train.feature_dim, 4u);
  EXPECT_EQ(rc.generate.test_shifted.site, SiteTag::kShifted);
  EXPECT_TRUE(rc.generate.test_internal.shift.is_identity());
  EXPECT_FALSE(rc.generate.test_shifted.shift.is_identity());
  EXPECT_NE(rc.generate.train.seed, rc.generate.test_internal.seed);
  EXPECT_EQ(rc.alarm_low_rate, 0.15);
  EXPECT_TRUE(nlohmann::json::accept(rc.effective_text));
}

TEST(RunConfigTest, SetOverridesAndSeed) {
  ConfigSources src;
  src.sets = {"loss.w_fnl=0", "net.activation=tanh", "net.hidden_dims=[8]"};
  src.seed = 5;
  const RunConfig rc = load_run_config(src);
  EXPECT_EQ(rc.train.weights.w_fnl, 0.0);
  EXPECT_EQ(rc.train.net.activation, Activation::kTanh);
  EXPECT_EQ(rc.train.net.hidden_dims, std::vector<std::size_t>{8});
  EXPECT_EQ(rc.seed, 5u);
  EXPECT_EQ(rc.train.seed, 5u);
  EXPECT_EQ(rc.generate.train.seed, derive_seed(5, "cohort/train"));
  EXPECT_EQ(nlohmann::json::parse(rc.effective_text)["seed"], 5);
}

TEST(RunConfigTest, FileThenSetPrecedence) {
  const fs::path f = fs::temp_directory_path() / ("fnlgen_cfg_" + std::to_string(::getpid()) + ".json");
  std::ofstream(f) << R"({"loss": {"w_fnl": 0.3}, "train": {"max_steps": 10}})";
  ConfigSources src;
  src.file = f;
  src.sets = {"train.max_steps=20"};
  const RunConfig rc = load_run_config(src);
  fs::remove(f);
  EXPECT_EQ(rc.train.weights.w_fnl, 0.3);
  EXPECT_EQ(rc.train.weights.w_bce, 0.9);
  EXPECT_EQ(rc.train.max_steps, 20u);
}

TEST(RunConfigTest, Rejections) {
  auto with = [](std::vector<std::string> sets) {
    ConfigSources src;
    src.sets = std::move(sets);
    return load_run_config(src);
  };
  EXPECT_THROW(with({"loss.w_nope=1"}), ConfigError);
  EXPECT_THROW(with({"nosuch.key=1"}), ConfigError);
  EXPECT_THROW(with({"no_equals"}), ConfigError);
  EXPECT_THROW(with({"sampler.batch_size=3"}), ConfigError);
  EXPECT_THROW(with({"net.activation=swish"}), ConfigError);
  EXPECT_THROW(with({"loss.w_bce=-1"}), ConfigError);
  EXPECT_THROW(with({"score.alarm_low_rate=2"}), ConfigError);
  EXPECT_THROW(with({"cohort.feature_dim=\"four\""}), ConfigError);

  const fs::path f = fs::temp_directory_path() / ("fnlgen_bad_" + std::to_string(::getpid()) + ".json");
  std::ofstream(f) << R"({"loss": {"typo": 1}})";
  ConfigSources src;
  src.file = f;
  EXPECT_THROW(load_run_config(src), ConfigError);
  std::ofstream(f) << "{not json";
  EXPECT_THROW(load_run_config(src), ConfigError);
  fs::remove(f);
  EXPECT_THROW(load_run_config(src), IoError);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}, false), kExitValidation);
  EXPECT_EQ(run({"frobnicate"}, false), kExitValidation);
  EXPECT_EQ(run({"train"}, false), kExitValidation);
  EXPECT_EQ(run({"--workers", "0", "generate"}, false), kExitValidation);
  EXPECT_EQ(run({"--help"}, false), kExitOk);
  EXPECT_NE(out_.str().find("generate"), std::string::npos);
  EXPECT_EQ(run({"generate", "--out", dir_.string(), "--set", "loss.bogus=1"}), kExitValidation);
  EXPECT_TRUE(fs::is_empty(dir_));
}

TEST_F(CliTest, MissingInputsAreIoErrors) {
  EXPECT_EQ(run({"train", "--cohort", p("absent.cohort.json"), "--out", dir_.string()}), kExitIo);
  EXPECT_EQ(run({"generate", "--config", p("absent.json")}), kExitIo);
  std::ofstream(p("blocker")) << "x";
  EXPECT_EQ(run({"generate", "--out", p("blocker/sub")}), kExitIo);
}

TEST_F(CliTest, FullPipeline) {
  generate_and_train();
  for (const char* f : {"train.cohort.json", "train.csv", "test_internal.cohort.json",
                        "test_shifted.cohort.json", "generate.config.json", "bundle.json",
                        "train_log.csv", "train.config.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / f)) << f;
  }
  EXPECT_NE(out_.str().find("psi"), std::string::npos);
  EXPECT_EQ(nlohmann::json::parse(slurp(dir_ / "train.config.json"))["train"]["max_steps"], 60);

  for (const char* c : {"test_internal", "test_shifted"}) {
    ASSERT_EQ(run({"score", "--bundle", p("bundle.json"), "--cohort", p(std::string(c) + ".cohort.json"),
                   "--out", dir_.string(), "--workers", "2"}),
              kExitOk)
        << err_.str();
    EXPECT_TRUE(fs::exists(dir_ / (std::string(c) + ".reports.csv")));
    EXPECT_NE(out_.str().find(std::string(c) + ": 4 exams"), std::string::npos) << out_.str();
  }
  ASSERT_EQ(run({"evaluate", "--bundle", p("bundle.json"), "--cohort", p("test_internal.cohort.json"),
                 "--cohort", p("test_shifted.cohort.json"), "--reports",
                 p("test_internal.reports.json"), "--reports", p("test_shifted.reports.json"),
                 "--out", dir_.string()}),
            kExitOk)
      << err_.str();
  EXPECT_EQ(out_.str(), slurp(dir_ / "table.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "curve_all.csv"));

  // Reports for only one of the two cohorts.
  EXPECT_EQ(run({"evaluate", "--bundle", p("bundle.json"), "--cohort", p("test_internal.cohort.json"),
                 "--cohort", p("test_shifted.cohort.json"), "--reports",
                 p("test_internal.reports.json"), "--out", dir_.string()}),
            kExitValidation);
}

TEST_F(CliTest, ScoreAlarmLine) {
  generate_and_train();
  ASSERT_EQ(run({"score", "--bundle", p("bundle.json"), "--cohort", p("test_internal.cohort.json"),
                 "--out", dir_.string(), "--set", "score.alarm_low_rate=0"}),
            kExitOk);
  const bool alarmed = out_.str().find("ALARM") != std::string::npos;
  const bool any_low = out_.str().find("low 0 ") == std::string::npos;
  EXPECT_EQ(alarmed, any_low) << out_.str();
}

TEST_F(CliTest, DiagnoseAlarmAndInputs) {
  generate_and_train();
  EXPECT_EQ(run({"diagnose", "--bundle", p("bundle.json"), "--positives", p("train.csv"),
                 "--out", dir_.string(), "--set", "diagnose.fnl_alarm=1e9"}),
            kExitOk);
  const auto diag = nlohmann::json::parse(slurp(dir_ / "diagnostics.json"));
  EXPECT_FALSE(diag["alarm"].get<bool>());
  EXPECT_EQ(run({"diagnose", "--bundle", p("bundle.json"), "--positives", p("train.cohort.json"),
                 "--out", dir_.string(), "--set", "diagnose.fnl_alarm=0"}),
            kExitAlarm);
  EXPECT_NE(out_.str().find("ALARM"), std::string::npos);

  std::ofstream(p("neg.csv")) << slurp(dir_ / "train.csv").substr(0, slurp(dir_ / "train.csv").find('\n') + 1);
  EXPECT_EQ(run({"diagnose", "--bundle", p("bundle.json"), "--positives", p("neg.csv"),
                 "--out", dir_.string()}),
            kExitValidation);
}

TEST_F(CliTest, RejectsBadBundlesAndCohorts) {
  generate_and_train();
  std::ofstream(p("broken.json")) << "{\"format\": ";
  EXPECT_EQ(run({"score", "--bundle", p("broken.json"), "--cohort", p("test_internal.cohort.json"),
                 "--out", dir_.string()}),
            kExitValidation);

  // A cohort of a different feature dimension.
  const fs::path other = dir_ / "wide";
  ASSERT_EQ(run({"generate", "--out", other.string(), "--set", "cohort.feature_dim=3", "--set",
                 "cohort.positive.mean=[1,0,0]", "--set",
                 R"(cohort.negative=[{"weight":1,"mean":[-1,0,0],"cov":0.5}])", "--set",
                 "cohort.shift.mean_shift=[0,2,0]"}),
            kExitOk)
      << err_.str();
  EXPECT_EQ(run({"score", "--bundle", p("bundle.json"), "--cohort",
                 (other / "test_internal.cohort.json").string(), "--out", dir_.string()}),
            kExitValidation);

  // A cohort file with no exams.
  auto doc = nlohmann::ordered_json::parse(slurp(dir_ / "test_internal.cohort.json"));
  doc["exams"] = nlohmann::json::array();
  std::ofstream(p("empty.cohort.json")) << doc.dump();
  EXPECT_EQ(run({"score", "--bundle", p("bundle.json"), "--cohort", p("empty.cohort.json"),
                 "--out", dir_.string()}),
            kExitValidation);
}

TEST_F(CliTest, BinaryExitCodes) {
  auto status = [](const std::string& args) {
    const int raw = std::system((std::string("'") + FNLGEN_BINARY + "' " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  EXPECT_EQ(status("--help"), 0);
  EXPECT_EQ(status("generate --set cohort.nothing=1"), 2);
  EXPECT_EQ(status("score --bundle '" + p("none.json") + "' --cohort '" + p("none.json") + "'"), 3);
  EXPECT_EQ(status("generate --out '" + dir_.string() + "' --set cohort.train_exams=2 --set "
                   "cohort.internal_exams=1 --set cohort.shifted_exams=1"),
            0);
  EXPECT_TRUE(fs::exists(dir_ / "train.cohort.json"));
}

TEST_F(CliTest, SeedChangesData) {
  ASSERT_EQ(run({"generate", "--out", p("a"), "--seed", "1"}), kExitOk);
  ASSERT_EQ(run({"generate", "--out", p("b"), "--seed", "1"}), kExitOk);
  ASSERT_EQ(run({"generate", "--out", p("c"), "--seed", "2"}), kExitOk);
  EXPECT_EQ(slurp(dir_ / "a/train.csv"), slurp(dir_ / "b/train.csv"));
  EXPECT_NE(slurp(dir_ / "a/train.csv"), slurp(dir_ / "c/train.csv"));
}

}  // namespace
}  // namespace fnlgen::cli
