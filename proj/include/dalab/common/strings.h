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

#ifndef DALAB_COMMON_STRINGS_H_
#define DALAB_COMMON_STRINGS_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dalab {

// Splits on every occurrence of sep; empty pieces are kept.
std::vector<std::string_view> Split(std::string_view text, char sep);
std::string_view StripWhitespace(std::string_view text);

// Whole-string numeric parsing; surrounding whitespace is not accepted.
bool ParseInt(std::string_view text, int64_t* value);
bool ParseUint(std::string_view text, uint64_t* value);
bool ParseDouble(std::string_view text, double* value);
// Accepts true/false/1/0/yes/no (case-insensitive).
bool ParseBool(std::string_view text, bool* value);

std::string Join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace dalab

#endif  // DALAB_COMMON_STRINGS_H_
