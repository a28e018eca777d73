//
// Copyright 2026 The DALab Authors
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
//

#include "dalab/harness/experiment.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace dalab {
namespace {

using ::testing::HasSubstr;

std::vector<uint64_t> Seeds(int n) {
  std::vector<uint64_t> seeds;
  for (int s = 1; s <= n; ++s) seeds.push_back(s);
  return seeds;
}

double Mae(const ExperimentResult& r, size_t arm, GeoLevel level,
           Statistic statistic) {
  const AccuracyRow* row = FindRow(r.accuracy[arm], level, statistic);
  return row == nullptr ? -1.0 : row->mae;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(ArmTest, NamesRoundTrip) {
  for (int a = 0; a < kNumArms; ++a) {
    const auto arm = static_cast<Arm>(a);
    EXPECT_EQ(*ParseArm(ArmName(arm)), arm);
  }
  EXPECT_EQ(*ParseArm("bottomup"), Arm::kBottomUp);
  EXPECT_FALSE(ParseArm("laplace").ok());
}

TEST(ConfigTest, KeysOverrideDefaults) {
  const KeyValueConfig kv = *KeyValueConfig::Parse(
      "experiment.arms = swap, topdown\n"
      "experiment.seeds = 4, 9\n"
      "swap.rate = 0.2\n"
      "topdown.person_rho = 1.5\n"
      "attack.enabled = false\n");
  const ExperimentConfig c = *ExperimentConfigFromKeys(kv);
  EXPECT_THAT(c.arms, ::testing::ElementsAre(Arm::kSwap, Arm::kTopDown));
  EXPECT_THAT(c.seeds, ::testing::ElementsAre(4, 9));
  EXPECT_DOUBLE_EQ(c.swap.target_rate, 0.2);
  EXPECT_DOUBLE_EQ(c.person_rho, 1.5);
  EXPECT_FALSE(c.attack);
  EXPECT_EQ(c.canonical, kv.Canonical());
  const TopDownConfig td = *c.TopDown(9);
  EXPECT_EQ(td.seed, 9u);
  EXPECT_NEAR(td.allocation.GlobalRho(), 1.57, 1e-12);
}

TEST(ConfigTest, RejectsUnknownKeysAndEmptyLists) {
  EXPECT_EQ(ExperimentConfigFromKeys(*KeyValueConfig::Parse("swap.rat = 1\n"))
                .status()
                .code(),
            absl::StatusCode::kInvalidArgument);
  ExperimentConfig c;
  c.seeds.clear();
  EXPECT_FALSE(c.Validate().ok());
  c = ExperimentConfig{};
  c.arms.clear();
  EXPECT_FALSE(c.Validate().ok());
  c = ExperimentConfig{};
  c.person_rho = 0.0;
  EXPECT_FALSE(c.Validate().ok());
  EXPECT_FALSE(RunExperiment(c).ok());
}

TEST(ExperimentTest, NoneArmIsExactEverywhere) {
  ExperimentConfig c;
  c.arms = {Arm::kNone};
  c.seeds = Seeds(2);
  const ExperimentResult r = *RunExperiment(c);
  for (const AccuracyRow& row : r.accuracy[0]) {
    EXPECT_EQ(row.mae, 0.0);
    EXPECT_EQ(row.relative_mae, 0.0);
  }
  for (const BiasRow& row : r.block_bias[0]) EXPECT_EQ(row.mean_error, 0.0);
  for (const ArmRun& run : r.runs) {
    EXPECT_TRUE(run.status.ok());
    EXPECT_EQ(run.ledger_rho, 0.0);
    ASSERT_TRUE(run.attack.has_value()) << run.attack_status;
  }
}

TEST(ExperimentTest, ArmsShareOneTruthPerSeed) {
  ExperimentConfig c;
  c.arms = {Arm::kSwap, Arm::kTopDown};
  c.seeds = {7};
  c.attack = false;
  const ExperimentResult r = *RunExperiment(c);
  ASSERT_EQ(r.runs.size(), 2u);
  EXPECT_TRUE(r.runs[0].status.ok());
  EXPECT_TRUE(r.runs[1].status.ok());
  EXPECT_NEAR(r.runs[1].ledger_rho, 2.63, 1e-9);
  // The truth column of the detail files must agree line by line.
  auto truth_column = [](const std::string& detail) {
    std::vector<std::string> out;
    std::istringstream in(detail);
    std::string line;
    while (std::getline(in, line)) {
      out.push_back(line.substr(0, line.rfind(',', line.rfind(',') - 1)));
    }
    return out;
  };
  EXPECT_EQ(truth_column(r.accuracy_detail[0]),
            truth_column(r.accuracy_detail[1]));
}

TEST(ExperimentTest, AttackFailureLeavesAccuracyAndOtherArms) {
  ExperimentConfig c;
  c.arms = {Arm::kNone, Arm::kTopDown};
  c.seeds = {3};
  c.reconstruction.joint_node_limit = 1;
  c.reconstruction.block_node_limit = 1;
  const ExperimentResult r = *RunExperiment(c);
  for (const ArmRun& run : r.runs) {
    EXPECT_TRUE(run.status.ok());
    EXPECT_EQ(run.attack_status.code(), absl::StatusCode::kResourceExhausted);
    EXPECT_FALSE(run.released.empty());
  }
  EXPECT_EQ(Mae(r, 0, GeoLevel::kBlock, Statistic::kTotal), 0.0);
  EXPECT_GT(Mae(r, 1, GeoLevel::kBlock, Statistic::kTotal), 0.0);
}

TEST(ExperimentTest, MoreRhoLowersCountyError) {
  ExperimentConfig c;
  c.arms = {Arm::kTopDown};
  c.seeds = Seeds(20);
  c.attack = false;
  ExperimentConfig more = c;
  more.person_rho *= 4;
  more.housing_rho *= 4;
  const ExperimentResult base = *RunExperiment(c);
  const ExperimentResult rich = *RunExperiment(more);
  EXPECT_LE(Mae(rich, 0, GeoLevel::kCounty, Statistic::kTotal),
            Mae(base, 0, GeoLevel::kCounty, Statistic::kTotal));
  EXPECT_LT(Mae(rich, 0, GeoLevel::kBlock, Statistic::kTotal),
            Mae(base, 0, GeoLevel::kBlock, Statistic::kTotal));
}

TEST(ExperimentTest, RelativeErrorShrinksWithPopulation) {
  ExperimentConfig c;
  c.arms = {Arm::kTopDown, Arm::kBottomUp};
  c.seeds = Seeds(20);
  c.attack = false;
  const ExperimentResult r = *RunExperiment(c);
  auto rel = [&](size_t arm, GeoLevel level) {
    return FindRow(r.accuracy[arm], level, Statistic::kTotal)->relative_mae;
  };
  EXPECT_GT(rel(0, GeoLevel::kBlock), rel(0, GeoLevel::kCounty));
  EXPECT_GT(rel(0, GeoLevel::kCounty), rel(0, GeoLevel::kState));
  EXPECT_GT(rel(1, GeoLevel::kCounty), rel(0, GeoLevel::kCounty));
}

TEST(ExperimentTest, SmallBlocksAreBiasedUpward) {
  ExperimentConfig c;
  c.arms = {Arm::kTopDown};
  c.seeds = Seeds(20);
  c.attack = false;
  const ExperimentResult r = *RunExperiment(c);
  const std::vector<BiasRow>& rows = r.block_bias[0];
  ASSERT_EQ(rows.size(), 10u);
  EXPECT_GE(rows.front().mean_error, rows.back().mean_error);
}

TEST(ExperimentTest, UnconstrainedEstimatesAreUnbiased) {
  std::vector<double> truth;
  std::vector<double> estimate;
  for (uint64_t seed : Seeds(20)) {
    PopulationConfig pc;
    pc.seed = seed;
    const Population pop = *GeneratePopulation(pc);
    TopDownConfig td;
    td.diagnostic = true;
    td.seed = seed;
    const TopDownResult run = *TopDownRun(pop, td);
    const std::vector<StatisticVector> stats = GeounitStatistics(pop);
    for (int b : pop.hierarchy.blocks()) {
      truth.push_back(static_cast<double>(stats[b][0]));
      estimate.push_back(run.estimates[b].RealTotal());
    }
  }
  for (const BiasRow& row : SmallAreaBias(truth, estimate)) {
    EXPECT_LE(std::abs(row.mean_error), 2 * row.se) << row.group;
  }
}

TEST(ExperimentTest, OutputsAreByteIdenticalAcrossRuns) {
  ExperimentConfig c;
  c.seeds = {2, 5};
  const std::filesystem::path root =
      std::filesystem::path(::testing::TempDir()) / "experiment_determinism";
  std::filesystem::remove_all(root);
  for (const char* dir : {"a", "b"}) {
    const ExperimentResult r = *RunExperiment(c);
    ASSERT_TRUE(WriteExperiment(r, (root / dir).string()).ok());
  }
  int files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(root / "a")) {
    const std::filesystem::path name = entry.path().filename();
    EXPECT_EQ(ReadFile(root / "a" / name), ReadFile(root / "b" / name))
        << name;
    ++files;
  }
  EXPECT_EQ(files, 8);
  const std::string summary = ReadFile(root / "a" / "summary.csv");
  EXPECT_THAT(summary, HasSubstr("\nnone,ok,2,NA,0.000000,"));
  EXPECT_THAT(summary, HasSubstr("\ntopdown,ok,2,2.630000000,"));
  EXPECT_THAT(ReadFile(root / "a" / "manifest.txt"),
              HasSubstr("config_hash=" + ConfigHash(c.canonical)));
}

}  // namespace
}  // namespace dalab
