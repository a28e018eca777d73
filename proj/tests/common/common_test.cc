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

#include <set>

#include "dalab/common/csv.h"
#include "dalab/common/key_value_config.h"
#include "dalab/common/rng.h"
#include "dalab/common/strings.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace dalab {
namespace {

using ::testing::ElementsAre;

TEST(RngTest, StreamsAreReproducibleAndDistinct) {
  RngStream a = RngStream::For(7, "noise", "01");
  RngStream b = RngStream::For(7, "noise", "01");
  RngStream c = RngStream::For(7, "noise", "02");
  const uint64_t a0 = a();
  EXPECT_EQ(a0, b());
  EXPECT_NE(a0, c());
}

TEST(RngTest, UniformBelowStaysInRange) {
  RngStream r(42);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[r.UniformBelow(7)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(CsvTest, RoundTripsQuotedFields) {
  const std::string line = CsvJoin({"a", "b,c", "say \"hi\""});
  EXPECT_EQ(line, "a,\"b,c\",\"say \"\"hi\"\"\"");
  auto fields = CsvSplit(line);
  ASSERT_TRUE(fields.ok());
  EXPECT_THAT(*fields, ElementsAre("a", "b,c", "say \"hi\""));
  EXPECT_FALSE(CsvSplit("\"open").ok());
}

TEST(CsvTest, FixedFormattingHasNoNegativeZero) {
  EXPECT_EQ(FormatFixed(-0.0000001, 3), "0.000");
  EXPECT_EQ(FormatFixed(1.5, 2), "1.50");
}

TEST(KeyValueConfigTest, ParsesAndRejectsDuplicates) {
  auto c = KeyValueConfig::Parse("# comment\n a = 1 \nb=x,y\n");
  ASSERT_TRUE(c.ok());
  EXPECT_EQ(*c->GetInt("a", 0), 1);
  EXPECT_THAT(*c->GetStringList("b", {}), ElementsAre("x", "y"));
  EXPECT_EQ(*c->GetInt("missing", 5), 5);
  EXPECT_FALSE(c->GetDouble("b", 0).ok());
  EXPECT_FALSE(KeyValueConfig::Parse("a=1\na=2\n").ok());
  EXPECT_FALSE(c->CheckKnownKeys({"a"}).ok());
  EXPECT_TRUE(c->CheckKnownKeys({"a", "b"}).ok());
}

TEST(StringsTest, ParsesNumbersStrictly) {
  int64_t i;
  double d;
  EXPECT_TRUE(ParseInt("-12", &i));
  EXPECT_EQ(i, -12);
  EXPECT_FALSE(ParseInt("12x", &i));
  EXPECT_TRUE(ParseDouble("2.5e-1", &d));
  EXPECT_DOUBLE_EQ(d, 0.25);
  EXPECT_THAT(Split("a,,b", ','), ElementsAre("a", "", "b"));
}

}  // namespace
}  // namespace dalab
