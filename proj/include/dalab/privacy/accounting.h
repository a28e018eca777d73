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

#ifndef DALAB_PRIVACY_ACCOUNTING_H_
#define DALAB_PRIVACY_ACCOUNTING_H_

#include <mutex>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace dalab {

// rho = sensitivity^2 / (2 sigma2).
absl::StatusOr<double> RhoForNoise(double sigma2, double l2_sensitivity);
// sigma2 = sensitivity^2 / (2 rho).
absl::StatusOr<double> NoiseForRho(double rho, double l2_sensitivity);

// epsilon = rho + 2 sqrt(rho ln(1/delta)).
absl::StatusOr<double> ZcdpToApproxDp(double rho, double delta);

struct RhoAllocationEntry {
  std::string geolevel;
  std::string query_group;
  double rho = 0.0;
};

class RhoAllocation {
 public:
  absl::Status Add(std::string geolevel, std::string query_group, double rho);
  // -1 when absent.
  double Find(const std::string& geolevel,
              const std::string& query_group) const;
  double GlobalRho() const;
  const std::vector<RhoAllocationEntry>& entries() const { return entries_; }

 private:
  std::vector<RhoAllocationEntry> entries_;
};

struct LedgerEntry {
  std::string mechanism;
  std::string geolevel;
  std::string query_group;
  double sensitivity = 1.0;
  double sigma2 = 0.0;
  double rho = 0.0;
};

// Append-only record of every privacy charge. Charges are serialized.
class PrivacyLedger {
 public:
  PrivacyLedger() = default;
  // A positive budget makes charges that would exceed it fail with
  // ResourceExhausted; the ledger is left unchanged.
  explicit PrivacyLedger(double budget) : budget_(budget) {}
  PrivacyLedger(const PrivacyLedger& other);
  PrivacyLedger& operator=(const PrivacyLedger& other);

  absl::Status Charge(LedgerEntry entry);
  // Sum of entry rho in insertion order.
  double Total() const;
  std::vector<LedgerEntry> entries() const;
  // "geolevel,query_group,sigma2,sensitivity,rho".
  std::string ExportCsv() const;

 private:
  mutable std::mutex mu_;
  double budget_ = 0.0;
  std::vector<LedgerEntry> entries_;
};

// Global rho of a ledger.
inline double Compose(const PrivacyLedger& ledger) { return ledger.Total(); }

}  // namespace dalab

#endif  // DALAB_PRIVACY_ACCOUNTING_H_
