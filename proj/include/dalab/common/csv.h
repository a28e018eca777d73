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

#ifndef DALAB_COMMON_CSV_H_
#define DALAB_COMMON_CSV_H_

#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace dalab {

// Minimal comma-separated text support. Fields containing a comma, quote or
// newline are quoted with doubled inner quotes.
std::string CsvEscape(std::string_view field);
std::string CsvJoin(const std::vector<std::string>& fields);

// Splits one line into fields. Fails on an unterminated quote.
absl::StatusOr<std::vector<std::string>> CsvSplit(std::string_view line);

// Formats a double with enough digits to round-trip, without locale effects.
std::string FormatDouble(double value);
// Fixed six-decimal formatting used in reports.
std::string FormatFixed(double value, int decimals = 6);

absl::StatusOr<std::string> ReadFile(const std::string& path);
absl::Status WriteFile(const std::string& path, std::string_view contents);

}  // namespace dalab

#endif  // DALAB_COMMON_CSV_H_
