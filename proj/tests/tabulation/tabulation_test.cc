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

#include <map>

#include "dalab/geo/population.h"
#include "dalab/tabulation/histogram.h"
#include "dalab/tabulation/schema.h"
#include "dalab/tabulation/tables.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace dalab {
namespace {

PersonRecord Person(int block, int sex, int age, int race, int eth) {
  static int next = 0;
  PersonRecord p;
  p.person_id = "P" + std::to_string(++next);
  p.household_id = "H" + std::to_string(next);
  p.block = block;
  p.sex = sex;
  p.age = age;
  p.race = race;
  p.ethnicity = eth;
  return p;
}

Population OneBlockWorld(std::vector<PersonRecord> persons) {
  Population pop;
  pop.hierarchy = *GeoHierarchy::Regular(kDefaultGeoWidths, {1, 1, 1, 1, 1, 1});
  const int block = pop.hierarchy.blocks()[0];
  for (PersonRecord& p : persons) p.block = block;
  pop.persons = std::move(persons);
  pop.households = *DeriveHouseholds(pop.persons);
  return pop;
}

TEST(SchemaTest, VotingAgeRaceEthnicityHas252Cells) {
  const CellSchema schema(AgeGranularity::kVotingAge, 63);
  auto t = MarginalTable(schema, "VA", false, AgeAxis::kVotingAge, true, true,
                         {GeoLevel::kBlock});
  ASSERT_TRUE(t.ok());
  EXPECT_EQ(t->num_cells(), 252);
}

TEST(SchemaTest, CellIndexRoundTrips) {
  const CellSchema schema(AgeGranularity::kAgeBin, 6);
  EXPECT_EQ(schema.num_cells(), 2 * 38 * 6 * 2);
  for (int c = 0; c < schema.num_cells(); ++c) {
    const auto a = schema.Decompose(c);
    EXPECT_EQ(schema.Cell(a.sex, a.age_level, a.race, a.ethnicity), c);
  }
}

TEST(TabulateTest, EmptyAndSingleRecord) {
  Population pop = OneBlockWorld({});
  const CellSchema schema(AgeGranularity::kAgeBin, 6);
  auto empty = Tabulate({}, pop.hierarchy, pop.hierarchy.root(), schema);
  ASSERT_TRUE(empty.ok());
  EXPECT_EQ(empty->Total(), 0);
  pop = OneBlockWorld({Person(0, 1, 30, 2, 1)});
  auto one = Tabulate(pop.persons, pop.hierarchy, pop.hierarchy.root(), schema);
  ASSERT_TRUE(one.ok());
  int ones = 0;
  for (int64_t v : one->counts) ones += v == 1;
  EXPECT_EQ(ones, 1);
  EXPECT_EQ(one->counts[schema.CellOf(pop.persons[0])], 1);
}

TEST(TabulateTest, RecordOutsideGeounitIsDomainError) {
  auto geo = *GeoHierarchy::Regular(kDefaultGeoWidths, {1, 1, 1, 1, 1, 2});
  PersonRecord p = Person(geo.blocks()[1], 0, 20, 0, 0);
  const CellSchema schema(AgeGranularity::kAgeBin, 6);
  EXPECT_EQ(Tabulate({p}, geo, geo.blocks()[0], schema).status().code(),
            absl::StatusCode::kOutOfRange);
}

TEST(TabulateTest, BlocksSumToTract) {
  PopulationConfig config;
  config.seed = 5;
  auto pop = GeneratePopulation(config);
  ASSERT_TRUE(pop.ok());
  const CellSchema schema(AgeGranularity::kSingleYear, pop->num_races);
  const auto all = TabulateAll(pop->persons, pop->hierarchy, schema);
  for (int tract : pop->hierarchy.AtLevel(GeoLevel::kTract)) {
    // Re-count from scratch over the tract's persons.
    std::vector<int64_t> expected(schema.num_cells(), 0);
    for (const PersonRecord& p : pop->persons) {
      if (pop->hierarchy.AncestorAt(p.block, GeoLevel::kTract) == tract) {
        ++expected[schema.CellOf(p)];
      }
    }
    std::vector<int64_t> blocks(schema.num_cells(), 0);
    for (int b : pop->hierarchy.blocks()) {
      if (pop->hierarchy.AncestorAt(b, GeoLevel::kTract) != tract) continue;
      for (int c = 0; c < schema.num_cells(); ++c) blocks[c] += all[b].counts[c];
    }
    EXPECT_EQ(blocks, expected);
    EXPECT_EQ(all[tract].counts, expected);
  }
}

TEST(ApplyTableTest, IdentityTotalAndHandCount) {
  // Five people: adults (race 0, eth 0) x2, adult (race 1, eth 1), children
  // (race 0, eth 0) and (race 1, eth 0).
  Population pop = OneBlockWorld({Person(0, 0, 40, 0, 0), Person(0, 1, 35, 0, 0),
                                  Person(0, 0, 70, 1, 1), Person(0, 1, 5, 0, 0),
                                  Person(0, 0, 12, 1, 0)});
  const CellSchema schema(AgeGranularity::kSingleYear, 2);
  auto hist = Tabulate(pop.persons, pop.hierarchy, pop.hierarchy.root(), schema);
  ASSERT_TRUE(hist.ok());

  auto identity = MarginalTable(schema, "ID", true, AgeAxis::kExact, true, true,
                                {GeoLevel::kBlock});
  ASSERT_TRUE(identity.ok());
  auto id_table = ApplyTable(*hist, schema, *identity);
  ASSERT_TRUE(id_table.ok());
  EXPECT_EQ(id_table->values, hist->counts);

  auto total = MarginalTable(schema, "TOT", false, AgeAxis::kDrop, false, false,
                             {GeoLevel::kBlock});
  EXPECT_THAT(ApplyTable(*hist, schema, *total)->values, ::testing::ElementsAre(5));

  auto va = MarginalTable(schema, "VA", false, AgeAxis::kVotingAge, true, true,
                          {GeoLevel::kBlock});
  ASSERT_TRUE(va.ok());
  auto va_table = ApplyTable(*hist, schema, *va);
  ASSERT_TRUE(va_table.ok());
  std::map<std::string, int64_t> by_label;
  for (int c = 0; c < va->num_cells(); ++c) by_label[va->labels[c]] = va_table->values[c];
  EXPECT_EQ(by_label["age=0-17;race=0;eth=0"], 1);
  EXPECT_EQ(by_label["age=0-17;race=1;eth=0"], 1);
  EXPECT_EQ(by_label["age=18+;race=0;eth=0"], 2);
  EXPECT_EQ(by_label["age=18+;race=1;eth=1"], 1);
  EXPECT_EQ(by_label["age=18+;race=1;eth=0"], 0);
}

TEST(ApplyTableTest, IncompatibleSchemaIsDomainError) {
  const CellSchema coarse(AgeGranularity::kVotingAge, 6);
  EXPECT_FALSE(MarginalTable(coarse, "T4", true, AgeAxis::kAgeBin, false, false,
                             {GeoLevel::kBlock})
                   .ok());
  const CellSchema fine(AgeGranularity::kSingleYear, 6);
  auto spec = MarginalTable(fine, "T1", false, AgeAxis::kDrop, false, false,
                            {GeoLevel::kBlock});
  CellHistogram h;
  h.counts.assign(coarse.num_cells(), 0);
  EXPECT_FALSE(ApplyTable(h, coarse, *spec).ok());
}

TEST(ApplyTableTest, Linearity) {
  const CellSchema schema(AgeGranularity::kSingleYear, 3);
  auto specs = DefaultTableSpecs(schema);
  ASSERT_TRUE(specs.ok());
  CellHistogram a, b, sum;
  a.counts.assign(schema.num_cells(), 0);
  b.counts = a.counts;
  for (int c = 0; c < schema.num_cells(); ++c) {
    a.counts[c] = c % 3;
    b.counts[c] = (c * 7) % 5;
  }
  sum.counts = a.counts;
  for (int c = 0; c < schema.num_cells(); ++c) sum.counts[c] += b.counts[c];
  for (const TableSpec& spec : *specs) {
    auto ta = ApplyTable(a, schema, spec);
    auto tb = ApplyTable(b, schema, spec);
    auto ts = ApplyTable(sum, schema, spec);
    for (int c = 0; c < spec.num_cells(); ++c) {
      EXPECT_EQ(ts->values[c], ta->values[c] + tb->values[c]);
    }
  }
}

class PublishTest : public ::testing::Test {
 protected:
  void SetUp() override {
    PopulationConfig config;
    config.seed = 11;
    config.empty_block_probability = 0.3;
    pop_ = *GeneratePopulation(config);
    schema_ = CellSchema(AgeGranularity::kSingleYear, pop_.num_races);
    auto specs = DefaultTableSpecs(schema_);
    ASSERT_TRUE(specs.ok());
    auto set = PublishTables(pop_, *specs);
    ASSERT_TRUE(set.ok()) << set.status();
    set_ = *set;
  }
  Population pop_;
  CellSchema schema_{AgeGranularity::kSingleYear, 6};
  PublishedTableSet set_;
};

TEST_F(PublishTest, ChildTablesSumToParents) {
  const GeoHierarchy& geo = pop_.hierarchy;
  std::map<std::pair<int, int>, const PublishedTable*> by_key;
  for (const PublishedTable& t : set_.tables) by_key[{t.spec, t.geounit}] = &t;
  int checked = 0;
  for (const auto& [key, table] : by_key) {
    const GeoUnit& unit = geo.unit(key.second);
    if (unit.children.empty()) continue;
    const TableSpec& spec = set_.specs[key.first];
    if (!spec.PublishedAt(geo.unit(unit.children[0]).level)) continue;
    std::vector<int64_t> sum(spec.num_cells(), 0);
    for (int child : unit.children) {
      const PublishedTable* ct = by_key.at({key.first, child});
      for (int c = 0; c < spec.num_cells(); ++c) sum[c] += ct->values[c];
    }
    EXPECT_EQ(sum, table->values);
    ++checked;
  }
  EXPECT_GT(checked, 0);
}

TEST_F(PublishTest, OrderedByGeocodeThenName) {
  for (size_t i = 1; i < set_.tables.size(); ++i) {
    const auto& a = set_.tables[i - 1];
    const auto& b = set_.tables[i];
    const auto ka = std::make_pair(pop_.hierarchy.unit(a.geounit).code,
                                   set_.specs[a.spec].name);
    const auto kb = std::make_pair(pop_.hierarchy.unit(b.geounit).code,
                                   set_.specs[b.spec].name);
    EXPECT_LT(ka, kb);
  }
}

TEST_F(PublishTest, ZeroBlocksGetExplicitZeros) {
  const auto pops = BlockPopulations(pop_);
  int empty_blocks = 0;
  for (const PublishedTable& t : set_.tables) {
    const GeoUnit& unit = pop_.hierarchy.unit(t.geounit);
    if (unit.level != GeoLevel::kBlock) continue;
    if (pops[pop_.hierarchy.OrdinalInLevel(t.geounit)] != 0) continue;
    ++empty_blocks;
    EXPECT_EQ(static_cast<int>(t.values.size()), set_.specs[t.spec].num_cells());
    for (int64_t v : t.values) EXPECT_EQ(v, 0);
  }
  EXPECT_GT(empty_blocks, 0);
}

TEST_F(PublishTest, HouseholdMetadataBoundsCounts) {
  for (const PublishedTable& t : set_.tables) {
    for (size_t c = 0; c < t.values.size(); ++c) {
      EXPECT_LE(t.households[c], t.values[c]);
      EXPECT_EQ(t.households[c] == 0, t.values[c] == 0);
    }
  }
}

TEST_F(PublishTest, CsvRoundTrip) {
  const std::string text = FormatPublishedTables(set_, pop_.hierarchy);
  auto back = ParsePublishedTables(text, pop_.hierarchy, set_.specs);
  ASSERT_TRUE(back.ok()) << back.status();
  ASSERT_EQ(back->tables.size(), set_.tables.size());
  for (size_t i = 0; i < set_.tables.size(); ++i) {
    EXPECT_EQ(back->tables[i].values, set_.tables[i].values);
  }
}

TEST(PublishSingleBlockTest, MatchesTabulate) {
  Population pop = OneBlockWorld({Person(0, 0, 40, 0, 0), Person(0, 1, 3, 1, 1)});
  pop.num_races = 2;
  const CellSchema schema(AgeGranularity::kSingleYear, 2);
  auto set = PublishTables(pop, *DefaultTableSpecs(schema));
  ASSERT_TRUE(set.ok());
  auto hist = Tabulate(pop.persons, pop.hierarchy, pop.hierarchy.blocks()[0], schema);
  for (const PublishedTable& t : set->tables) {
    if (t.geounit != pop.hierarchy.blocks()[0]) continue;
    EXPECT_EQ(t.values, ApplyTable(*hist, schema, set->specs[t.spec])->values);
  }
}

}  // namespace
}  // namespace dalab
