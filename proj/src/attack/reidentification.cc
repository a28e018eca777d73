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

#include "dalab/attack/reidentification.h"

#include <algorithm>
#include <map>
#include <tuple>
#include <unordered_map>
#include <utility>

#include "absl/status/status.h"
#include "dalab/common/rng.h"
#include "dalab/geo/age.h"
#include "fmt/format.h"

namespace dalab {
namespace {

using LinkKey = std::tuple<int, int, int>;  // block, sex, age bin

std::string FormatRate(std::optional<double> v) {
  return v.has_value() ? fmt::format("{:.6f}", *v) : "NA";
}

// Per person: unique flag and whether their race/ethnicity is the block mode.
struct PersonClass {
  std::vector<char> unique;
  std::vector<char> modal;
};

PersonClass Classify(const Population& truth) {
  const int n = static_cast<int>(truth.persons.size());
  std::map<LinkKey, int> key_count;
  std::map<int, std::map<std::pair<int, int>, int>> groups;
  for (const PersonRecord& p : truth.persons) {
    ++key_count[{p.block, p.sex, AgeBinOf(p.age)}];
    ++groups[p.block][{p.race, p.ethnicity}];
  }
  std::map<int, std::pair<int, int>> mode;
  for (const auto& [block, g] : groups) {
    int best = -1;
    for (const auto& [re, count] : g) {
      // Ties go to the smallest (race, ethnicity).
      if (count > best) {
        best = count;
        mode[block] = re;
      }
    }
  }
  PersonClass c;
  c.unique.assign(n, 0);
  c.modal.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    const PersonRecord& p = truth.persons[i];
    c.unique[i] = key_count[{p.block, p.sex, AgeBinOf(p.age)}] == 1;
    c.modal[i] = mode[p.block] == std::make_pair(p.race, p.ethnicity);
  }
  return c;
}

std::array<bool, kNumUniverses> Membership(const PersonClass& c, int i) {
  return {true, c.unique[i] != 0, c.unique[i] && c.modal[i],
          c.unique[i] && !c.modal[i]};
}

}  // namespace

absl::Status ExternalFileConfig::Validate() const {
  if (!(dropout >= 0.0 && dropout <= 1.0)) {
    return absl::InvalidArgumentError(
        fmt::format("external dropout must be in [0, 1], got {}", dropout));
  }
  if (!(age_error >= 0.0 && age_error <= 1.0)) {
    return absl::InvalidArgumentError(fmt::format(
        "external age error must be in [0, 1], got {}", age_error));
  }
  if (max_age_shift < 1) {
    return absl::InvalidArgumentError("external age shift must be positive");
  }
  return absl::OkStatus();
}

std::vector<ExternalRow> ExternalFromTruth(const Population& truth) {
  std::vector<ExternalRow> rows;
  rows.reserve(truth.persons.size());
  for (const PersonRecord& p : truth.persons) {
    rows.push_back({p.person_id, p.block, p.sex, p.age});
  }
  return rows;
}

absl::StatusOr<std::vector<ExternalRow>> MakeExternalFile(
    const Population& truth, const ExternalFileConfig& config) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  RngStream rng = RngStream::For(config.seed, "external");
  std::vector<ExternalRow> rows;
  for (const PersonRecord& p : truth.persons) {
    const bool drop = rng.Bernoulli(config.dropout);
    const bool wrong = rng.Bernoulli(config.age_error);
    int shift = static_cast<int>(rng.UniformInt(1, config.max_age_shift));
    if (rng.Bernoulli(0.5)) shift = -shift;
    if (drop) continue;
    ExternalRow row{p.person_id, p.block, p.sex, p.age};
    if (wrong) {
      int age = p.age + shift;
      if (age < 0 || age > kMaxAge) age = p.age - shift;
      row.age = std::clamp(age, 0, kMaxAge);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::string> PopulationUniques(const Population& truth) {
  const PersonClass c = Classify(truth);
  std::vector<std::string> ids;
  for (size_t i = 0; i < truth.persons.size(); ++i) {
    if (c.unique[i]) ids.push_back(truth.persons[i].person_id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::string_view UniverseName(Universe u) {
  switch (u) {
    case Universe::kAll:
      return "all";
    case Universe::kUniques:
      return "uniques";
    case Universe::kModalUniques:
      return "modal_uniques";
    case Universe::kNonmodalUniques:
      return "nonmodal_uniques";
  }
  return "";
}

std::array<std::optional<double>, kNumUniverses> ModalRaceBaseline(
    const Population& truth) {
  const PersonClass c = Classify(truth);
  std::array<int64_t, kNumUniverses> size{}, hits{};
  for (size_t i = 0; i < truth.persons.size(); ++i) {
    const auto in = Membership(c, static_cast<int>(i));
    for (int u = 0; u < kNumUniverses; ++u) {
      if (!in[u]) continue;
      ++size[u];
      hits[u] += c.modal[i];
    }
  }
  std::array<std::optional<double>, kNumUniverses> out;
  for (int u = 0; u < kNumUniverses; ++u) {
    if (size[u] > 0) {
      out[u] = static_cast<double>(hits[u]) / static_cast<double>(size[u]);
    }
  }
  return out;
}

double UniverseStats::PutativeRate() const {
  return persons == 0 ? 0.0
                      : static_cast<double>(putative) /
                            static_cast<double>(persons);
}

double UniverseStats::ConfirmedRate() const {
  return persons == 0 ? 0.0
                      : static_cast<double>(confirmed) /
                            static_cast<double>(persons);
}

std::optional<double> UniverseStats::Precision() const {
  if (putative == 0) return std::nullopt;
  return static_cast<double>(confirmed) / static_cast<double>(putative);
}

AttackReport Reidentify(const std::vector<PersonRecord>& reconstructed,
                        const std::vector<ExternalRow>& external,
                        const Population& truth) {
  AttackReport report;
  report.agreement = AgreementRate(reconstructed, truth);
  const PersonClass c = Classify(truth);
  const auto baseline = ModalRaceBaseline(truth);
  std::unordered_map<std::string, int> index;
  for (size_t i = 0; i < truth.persons.size(); ++i) {
    index.emplace(truth.persons[i].person_id, static_cast<int>(i));
    const auto in = Membership(c, static_cast<int>(i));
    for (int u = 0; u < kNumUniverses; ++u) report.universes[u].persons += in[u];
  }
  for (int u = 0; u < kNumUniverses; ++u) {
    report.universes[u].baseline = baseline[u];
  }

  std::map<LinkKey, std::vector<const PersonRecord*>> records;
  for (const PersonRecord& r : reconstructed) {
    records[{r.block, r.sex, AgeBinOf(r.age)}].push_back(&r);
  }
  std::map<LinkKey, std::vector<const ExternalRow*>> rows;
  for (const ExternalRow& row : external) {
    if (!index.contains(row.person_id)) continue;
    rows[{row.block, row.sex, AgeBinOf(row.age)}].push_back(&row);
  }
  auto by_id = [](const auto* a, const auto* b) {
    return a->person_id < b->person_id;
  };
  for (auto& [k, v] : rows) {
    auto it = records.find(k);
    if (it == records.end()) continue;
    std::vector<const PersonRecord*>& linked = it->second;
    std::sort(linked.begin(), linked.end(), by_id);
    std::sort(v.begin(), v.end(), by_id);
    // Exact ages link first, then the rest in id order; surplus rows cycle
    // through all records of the key.
    std::vector<const PersonRecord*> link(v.size(), nullptr);
    std::vector<char> used(linked.size(), 0);
    for (size_t j = 0; j < v.size(); ++j) {
      for (size_t i = 0; i < linked.size(); ++i) {
        if (!used[i] && linked[i]->age == v[j]->age) {
          used[i] = 1;
          link[j] = linked[i];
          break;
        }
      }
    }
    size_t next = 0, cycle = 0;
    for (size_t j = 0; j < v.size(); ++j) {
      if (link[j] != nullptr) continue;
      while (next < linked.size() && used[next]) ++next;
      if (next < linked.size()) {
        used[next] = 1;
        link[j] = linked[next];
      } else {
        link[j] = linked[cycle++ % linked.size()];
      }
    }
    for (size_t j = 0; j < v.size(); ++j) {
      const int i = index[v[j]->person_id];
      const PersonRecord& p = truth.persons[i];
      const bool confirmed =
          link[j]->race == p.race && link[j]->ethnicity == p.ethnicity;
      const auto in = Membership(c, i);
      for (int u = 0; u < kNumUniverses; ++u) {
        if (!in[u]) continue;
        ++report.universes[u].putative;
        report.universes[u].confirmed += confirmed;
      }
    }
  }
  return report;
}

std::string FormatReidentification(const AttackReport& report) {
  std::string out =
      "universe,persons,putative,confirmed,putative_rate,confirmed_rate,"
      "precision,modal_baseline\n";
  for (int u = 0; u < kNumUniverses; ++u) {
    const UniverseStats& s = report.universes[u];
    out += fmt::format("{},{},{},{},{:.6f},{:.6f},{},{}\n",
                       UniverseName(static_cast<Universe>(u)), s.persons,
                       s.putative, s.confirmed, s.PutativeRate(),
                       s.ConfirmedRate(), FormatRate(s.Precision()),
                       FormatRate(s.baseline));
  }
  return out;
}

}  // namespace dalab
