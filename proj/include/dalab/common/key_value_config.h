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

#ifndef DALAB_COMMON_KEY_VALUE_CONFIG_H_
#define DALAB_COMMON_KEY_VALUE_CONFIG_H_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace dalab {

// Flat "key=value" configuration text. Blank lines and lines starting with
// '#' are ignored; whitespace around keys and values is trimmed. A repeated
// key is an error.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static absl::StatusOr<KeyValueConfig> Parse(std::string_view text);
  static absl::StatusOr<KeyValueConfig> Load(const std::string& path);

  bool Has(std::string_view key) const;
  void Set(std::string key, std::string value);

  // Every key must appear in 'allowed'; otherwise InvalidArgument naming the
  // first unknown key.
  absl::Status CheckKnownKeys(const std::set<std::string>& allowed) const;

  // Typed accessors. The overloads with a fallback return it when the key is
  // absent; malformed values are always InvalidArgument.
  absl::StatusOr<std::string> GetString(std::string_view key) const;
  absl::StatusOr<int64_t> GetInt(std::string_view key, int64_t fallback) const;
  absl::StatusOr<uint64_t> GetUint(std::string_view key,
                                   uint64_t fallback) const;
  absl::StatusOr<double> GetDouble(std::string_view key,
                                   double fallback) const;
  absl::StatusOr<bool> GetBool(std::string_view key, bool fallback) const;
  absl::StatusOr<std::vector<double>> GetDoubleList(
      std::string_view key, std::vector<double> fallback) const;
  absl::StatusOr<std::vector<int64_t>> GetIntList(
      std::string_view key, std::vector<int64_t> fallback) const;
  absl::StatusOr<std::vector<std::string>> GetStringList(
      std::string_view key, std::vector<std::string> fallback) const;

  // Canonical "key=value\n" text in key order; used for config hashing.
  std::string Canonical() const;

  const std::map<std::string, std::string, std::less<>>& entries() const {
    return entries_;
  }

 private:
  std::map<std::string, std::string, std::less<>> entries_;
};

}  // namespace dalab

#endif  // DALAB_COMMON_KEY_VALUE_CONFIG_H_
