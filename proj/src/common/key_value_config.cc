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

#include "dalab/common/key_value_config.h"

#include "dalab/common/csv.h"
#include "dalab/common/strings.h"
#include "fmt/format.h"

namespace dalab {

absl::StatusOr<KeyValueConfig> KeyValueConfig::Parse(std::string_view text) {
  KeyValueConfig config;
  int line_number = 0;
  for (std::string_view raw : Split(text, '\n')) {
    ++line_number;
    std::string_view line = StripWhitespace(raw);
    if (line.empty() || line.front() == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      return absl::InvalidArgumentError(
          fmt::format("config line {}: expected key=value", line_number));
    }
    std::string key(StripWhitespace(line.substr(0, eq)));
    std::string value(StripWhitespace(line.substr(eq + 1)));
    if (key.empty()) {
      return absl::InvalidArgumentError(
          fmt::format("config line {}: empty key", line_number));
    }
    if (config.entries_.count(key) > 0) {
      return absl::InvalidArgumentError(fmt::format(
          "config line {}: duplicate key '{}'", line_number, key));
    }
    config.entries_.emplace(std::move(key), std::move(value));
  }
  return config;
}

absl::StatusOr<KeyValueConfig> KeyValueConfig::Load(const std::string& path) {
  auto text = ReadFile(path);
  if (!text.ok()) {
    return absl::InvalidArgumentError(std::string(text.status().message()));
  }
  return Parse(*text);
}

bool KeyValueConfig::Has(std::string_view key) const {
  return entries_.find(key) != entries_.end();
}

void KeyValueConfig::Set(std::string key, std::string value) {
  entries_[std::move(key)] = std::move(value);
}

absl::Status KeyValueConfig::CheckKnownKeys(
    const std::set<std::string>& allowed) const {
  for (const auto& [key, value] : entries_) {
    if (allowed.count(key) == 0) {
      return absl::InvalidArgumentError(
          fmt::format("unknown config key '{}'", key));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<std::string> KeyValueConfig::GetString(
    std::string_view key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    return absl::InvalidArgumentError(
        fmt::format("missing config key '{}'", key));
  }
  return it->second;
}

namespace {

absl::Status BadValue(std::string_view key, std::string_view value) {
  return absl::InvalidArgumentError(
      fmt::format("config key '{}': malformed value '{}'", key, value));
}

}  // namespace

absl::StatusOr<int64_t> KeyValueConfig::GetInt(std::string_view key,
                                               int64_t fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  int64_t value;
  if (!ParseInt(it->second, &value)) return BadValue(key, it->second);
  return value;
}

absl::StatusOr<uint64_t> KeyValueConfig::GetUint(std::string_view key,
                                                 uint64_t fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  uint64_t value;
  if (!ParseUint(it->second, &value)) return BadValue(key, it->second);
  return value;
}

absl::StatusOr<double> KeyValueConfig::GetDouble(std::string_view key,
                                                 double fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  double value;
  if (!ParseDouble(it->second, &value)) return BadValue(key, it->second);
  return value;
}

absl::StatusOr<bool> KeyValueConfig::GetBool(std::string_view key,
                                             bool fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  bool value;
  if (!ParseBool(it->second, &value)) return BadValue(key, it->second);
  return value;
}

absl::StatusOr<std::vector<double>> KeyValueConfig::GetDoubleList(
    std::string_view key, std::vector<double> fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::vector<double> out;
  for (std::string_view part : Split(it->second, ',')) {
    double value;
    if (!ParseDouble(StripWhitespace(part), &value)) {
      return BadValue(key, it->second);
    }
    out.push_back(value);
  }
  return out;
}

absl::StatusOr<std::vector<int64_t>> KeyValueConfig::GetIntList(
    std::string_view key, std::vector<int64_t> fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::vector<int64_t> out;
  for (std::string_view part : Split(it->second, ',')) {
    int64_t value;
    if (!ParseInt(StripWhitespace(part), &value)) {
      return BadValue(key, it->second);
    }
    out.push_back(value);
  }
  return out;
}

absl::StatusOr<std::vector<std::string>> KeyValueConfig::GetStringList(
    std::string_view key, std::vector<std::string> fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::vector<std::string> out;
  for (std::string_view part : Split(it->second, ',')) {
    std::string_view item = StripWhitespace(part);
    if (item.empty()) return BadValue(key, it->second);
    out.emplace_back(item);
  }
  return out;
}

std::string KeyValueConfig::Canonical() const {
  std::string out;
  for (const auto& [key, value] : entries_) {
    out += fmt::format("{}={}\n", key, value);
  }
  return out;
}

}  // namespace dalab
