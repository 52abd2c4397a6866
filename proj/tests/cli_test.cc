/* Copyright 2026 The IdleNet Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cli.h"

namespace idlenet {
namespace {

const std::string kConfigs = IDLENET_CONFIG_DIR;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun Cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

TEST(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(Cli({}).code, kExitUsage);
  EXPECT_EQ(Cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(Cli({"cost"}).code, kExitUsage);
  EXPECT_EQ(Cli({"cost", "--config", "/nonexistent.json"}).code, kExitUsage);
  EXPECT_EQ(Cli({"cost", "--config", kConfigs + "/toy-hc4.json", "--format",
                 "xml"}).code,
            kExitUsage);
  EXPECT_EQ(Cli({"--help"}).code, kExitOk);
}

TEST(CliTest, MalformedConfigExitsTwoAndNamesFile) {
  const auto path = std::filesystem::temp_directory_path() / "idlenet_bad.json";
  std::ofstream(path) << R"({"name": "bad", "blocks": []})";
  const CliRun r = Cli({"cost", "--config", path.string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("idlenet_bad.json"), std::string::npos) << r.err;
  std::filesystem::remove(path);
}

TEST(CliTest, CostCsvIsStable) {
  const std::vector<std::string> args = {
      "cost", "--config", kConfigs + "/mbv3-hc-15-10.json", "--format", "csv"};
  const CliRun a = Cli(args), b = Cli(args);
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.substr(0, a.out.find('\n')),
            "index,kind,analytic_madds,analytic_params,oracle_madds");
}

TEST(CliTest, CostTableShowsTotal) {
  const CliRun r = Cli({"cost", "--config", kConfigs + "/mbv3-hc-15-10.json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("297.1"), std::string::npos) << r.out;
}

TEST(CliTest, CostVerifyPasses) {
  const CliRun r = Cli({"cost", "--config", kConfigs + "/toy-hc4.json",
                     "--verify", "--format", "csv"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
}

TEST(CliTest, RfProbeAgrees) {
  const CliRun r = Cli({"rf", "--config", kConfigs + "/rf-two-idler.json",
                     "--probe", "--format", "csv"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("0,0,4,1,1\n1,4,8,5,1"), std::string::npos) << r.out;
}

TEST(CliTest, VerifyAlphaDomain) {
  EXPECT_EQ(Cli({"verify", "--alpha", "0.99"}).code, kExitOk);
  EXPECT_EQ(Cli({"verify", "--alpha", "0.1"}).code, kExitUsage);
}

TEST(CliTest, GradcheckConfig) {
  const CliRun r = Cli({"gradcheck", "--config", kConfigs + "/toy-hc4.json"});
  EXPECT_EQ(r.code, kExitOk) << r.out << r.err;
}

TEST(CliTest, TrainSmokeExpectation) {
  EXPECT_EQ(Cli({"train-smoke", "--steps", "60", "--expect-accuracy", "0.95"}).code,
            kExitOk);
  EXPECT_EQ(Cli({"train-smoke", "--steps", "0", "--expect-accuracy", "0.99"}).code,
            kExitCheckFailed);
}

TEST(CliTest, BenchSingleRepeat) {
  const CliRun r = Cli({"bench", "--config", kConfigs + "/toy-hc4.json",
                     "--repeat", "1", "--threads", "2"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("median"), std::string::npos) << r.out;
}

}  // namespace
}  // namespace idlenet
