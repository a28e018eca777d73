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

#include "dalab/privacy/accounting.h"

#include <cmath>

#include "dalab/common/csv.h"
#include "fmt/format.h"

namespace dalab {

absl::StatusOr<double> RhoForNoise(double sigma2, double l2_sensitivity) {
  if (!(sigma2 > 0.0) || !(l2_sensitivity > 0.0)) {
    return absl::OutOfRangeError(
        "noise variance and sensitivity must be positive");
  }
  return l2_sensitivity * l2_sensitivity / (2.0 * sigma2);
}

absl::StatusOr<double> NoiseForRho(double rho, double l2_sensitivity) {
  if (!(rho > 0.0) || !(l2_sensitivity > 0.0)) {
    return absl::OutOfRangeError("rho and sensitivity must be positive");
  }
  return l2_sensitivity * l2_sensitivity / (2.0 * rho);
}

absl::StatusOr<double> ZcdpToApproxDp(double rho, double delta) {
  if (!(rho > 0.0) || !(delta > 0.0 && delta < 1.0)) {
    return absl::OutOfRangeError("need rho > 0 and 0 < delta < 1");
  }
  return rho + 2.0 * std::sqrt(rho * std::log(1.0 / delta));
}

absl::Status RhoAllocation::Add(std::string geolevel, std::string query_group,
                                double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    return absl::InvalidArgumentError(fmt::format(
        "rho for {}/{} must be positive, got {}", geolevel, query_group, rho));
  }
  if (Find(geolevel, query_group) >= 0.0) {
    return absl::InvalidArgumentError(fmt::format(
        "duplicate allocation for {}/{}", geolevel, query_group));
  }
  entries_.push_back({std::move(geolevel), std::move(query_group), rho});
  return absl::OkStatus();
}

double RhoAllocation::Find(const std::string& geolevel,
                           const std::string& query_group) const {
  for (const RhoAllocationEntry& e : entries_) {
    if (e.geolevel == geolevel && e.query_group == query_group) return e.rho;
  }
  return -1.0;
}

double RhoAllocation::GlobalRho() const {
  double total = 0.0;
  for (const RhoAllocationEntry& e : entries_) total += e.rho;
  return total;
}

PrivacyLedger::PrivacyLedger(const PrivacyLedger& other) {
  std::lock_guard<std::mutex> lock(other.mu_);
  budget_ = other.budget_;
  entries_ = other.entries_;
}

PrivacyLedger& PrivacyLedger::operator=(const PrivacyLedger& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mu_, other.mu_);
  budget_ = other.budget_;
  entries_ = other.entries_;
  return *this;
}

absl::Status PrivacyLedger::Charge(LedgerEntry entry) {
  if (!(entry.rho > 0.0) || !std::isfinite(entry.rho)) {
    return absl::FailedPreconditionError(fmt::format(
        "ledger rejects rho {} for {}/{}", entry.rho, entry.geolevel,
        entry.query_group));
  }
  std::lock_guard<std::mutex> lock(mu_);
  if (budget_ > 0.0) {
    double total = entry.rho;
    for (const LedgerEntry& e : entries_) total += e.rho;
    if (total > budget_ * (1.0 + 1e-12)) {
      return absl::ResourceExhaustedError(fmt::format(
          "charge of {} for {}/{} exceeds the budget {}", entry.rho,
          entry.geolevel, entry.query_group, budget_));
    }
  }
  entries_.push_back(std::move(entry));
  return absl::OkStatus();
}

double PrivacyLedger::Total() const {
  std::lock_guard<std::mutex> lock(mu_);
  double total = 0.0;
  for (const LedgerEntry& e : entries_) total += e.rho;
  return total;
}

std::vector<LedgerEntry> PrivacyLedger::entries() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_;
}

std::string PrivacyLedger::ExportCsv() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::string out = "geolevel,query_group,sigma2,sensitivity,rho\n";
  for (const LedgerEntry& e : entries_) {
    out += CsvJoin({e.geolevel, e.query_group, FormatDouble(e.sigma2),
                    FormatDouble(e.sensitivity), FormatDouble(e.rho)});
    out += "\n";
  }
  return out;
}

}  // namespace dalab
