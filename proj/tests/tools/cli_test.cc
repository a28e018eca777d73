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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace {

namespace fs = std::filesystem;
using ::testing::HasSubstr;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::path(::testing::TempDir()) /
            ::testing::UnitTest::GetInstance()->current_test_info()->name();
    fs::remove_all(root_);
    fs::create_directories(root_);
  }

  std::string Dir(const std::string& name) const {
    return (root_ / name).string();
  }

  int Run(const std::string& args) const {
    const std::string command = std::string(DALAB_CLI) + " " + args + " > " +
                                Dir("stdout.txt") + " 2>&1";
    const int raw = std::system(command.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  }

  static std::string Read(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  void WriteText(const std::string& name, const std::string& text) const {
    std::ofstream(root_ / name) << text;
  }

  fs::path root_;
};

TEST_F(CliTest, PipelineRunsEveryStage) {
  ASSERT_EQ(Run("generate --seed 3 --out " + Dir("truth")), 0);
  EXPECT_THAT(Read(root_ / "truth" / "manifest.txt"),
              HasSubstr("seed=3\nledger_rho=NA\n"));
  ASSERT_EQ(Run("tabulate --in " + Dir("truth") + " --out " + Dir("tab")), 0);
  ASSERT_EQ(Run("protect --arm topdown --seed 3 --in " + Dir("truth") +
                " --out " + Dir("td")),
            0);
  const std::string manifest = Read(root_ / "td" / "manifest.txt");
  EXPECT_THAT(manifest, HasSubstr("ledger_rho=2.630000000\n"));
  EXPECT_THAT(manifest, HasSubstr("config_hash="));
  EXPECT_TRUE(fs::exists(root_ / "td" / "ledger.csv"));
  ASSERT_EQ(Run("protect --arm suppress --in " + Dir("truth") + " --out " +
                Dir("sup")),
            0);
  EXPECT_FALSE(fs::exists(root_ / "sup" / "microdata.csv"));
  EXPECT_THAT(Read(root_ / "sup" / "tables.csv"), HasSubstr(",S\n"));
  ASSERT_EQ(Run("attack --in " + Dir("tab") + " --truth " + Dir("truth") +
                " --out " + Dir("att")),
            0);
  EXPECT_THAT(Read(root_ / "att" / "attack.csv"),
              HasSubstr("universe,persons,putative,confirmed"));
  ASSERT_EQ(Run("report --in " + Dir("td") + " --truth " + Dir("truth") +
                " --out " + Dir("rep")),
            0);
  EXPECT_THAT(Read(root_ / "rep" / "accuracy.csv"),
              HasSubstr("state,total,2,0.000000,"));
  EXPECT_TRUE(fs::exists(root_ / "rep" / "moe.csv"));
}

TEST_F(CliTest, ConfigErrorsExitWithTwo) {
  WriteText("bad.cfg", "swap.rat = 0.1\n");
  EXPECT_EQ(Run("generate --config " + Dir("bad.cfg") + " --out " + Dir("o")),
            2);
  WriteText("worse.cfg", "swap.rate = lots\n");
  EXPECT_EQ(
      Run("generate --config " + Dir("worse.cfg") + " --out " + Dir("o")), 2);
  EXPECT_EQ(Run("generate --config " + Dir("missing.cfg")), 2);
  EXPECT_EQ(Run("protect --in " + Dir("o") + " --arm laplace"), 2);
  EXPECT_EQ(Run(""), 2);
}

TEST_F(CliTest, InconsistentTablesExitWithThree) {
  ASSERT_EQ(Run("generate --out " + Dir("truth")), 0);
  ASSERT_EQ(Run("tabulate --in " + Dir("truth") + " --out " + Dir("tab")), 0);
  std::string tables = Read(root_ / "tab" / "tables.csv");
  const size_t row = tables.find("\nT1,block,");
  ASSERT_NE(row, std::string::npos);
  const size_t end = tables.find('\n', row + 1);
  tables.insert(end, "0");  // multiplies one block total by ten
  WriteText("tab/tables.csv", tables);
  EXPECT_EQ(Run("attack --in " + Dir("tab") + " --out " + Dir("att")), 3);
  EXPECT_THAT(Read(root_ / "stdout.txt"), HasSubstr("admit no solution"));
}

TEST_F(CliTest, AuditPasses) {
  WriteText("audit.cfg", "audit.trials = 20000\n");
  ASSERT_EQ(Run("audit --config " + Dir("audit.cfg") + " --out " + Dir("a")),
            0);
  EXPECT_THAT(Read(root_ / "a" / "manifest.txt"), HasSubstr("violations=0"));
  EXPECT_TRUE(fs::exists(root_ / "a" / "renyi_audit.csv"));
}

TEST_F(CliTest, ExperimentIsByteIdentical) {
  WriteText("exp.cfg",
            "experiment.arms = none, swap, topdown\n"
            "experiment.seeds = 1, 2\n");
  for (const char* out : {"x", "y"}) {
    ASSERT_EQ(Run("experiment --config " + Dir("exp.cfg") + " --out " +
                  Dir(out)),
              0);
  }
  int files = 0;
  for (const auto& entry : fs::directory_iterator(root_ / "x")) {
    const fs::path name = entry.path().filename();
    EXPECT_EQ(Read(root_ / "x" / name), Read(root_ / "y" / name)) << name;
    ++files;
  }
  EXPECT_EQ(files, 8);
}

}  // namespace
