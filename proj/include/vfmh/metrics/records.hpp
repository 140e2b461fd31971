// Copyright 2026 The vfmh Authors
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

#ifndef VFMH_METRICS_RECORDS_HPP_
#define VFMH_METRICS_RECORDS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace vfmh::metrics {

struct EpochRecord {
  std::size_t party = 0;
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double test_acc = 0.0;
  std::uint64_t msgs_up = 0;
  std::uint64_t msgs_down = 0;
  std::uint64_t bytes = 0;
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

// Append-only per-epoch log.
class RunTracker {
 public:
  void append(const EpochRecord& record) { records_.push_back(record); }
  const std::vector<EpochRecord>& records() const { return records_; }
  bool empty() const { return records_.empty(); }
  // Records of the final epoch, one per party, in party order.
  std::vector<EpochRecord> final_epoch() const;

 private:
  std::vector<EpochRecord> records_;
};

inline constexpr const char* kCsvHeader =
    "party,epoch,train_loss,test_acc,msgs_up,msgs_down,bytes";

// Reals use shortest round-trip formatting, so parse_csv(to_csv(r)) == r.
std::string to_csv(const std::vector<EpochRecord>& records);
std::vector<EpochRecord> parse_csv(const std::string& text);
void write_csv(const std::filesystem::path& path,
               const std::vector<EpochRecord>& records);

}  // namespace vfmh::metrics

#endif  // VFMH_METRICS_RECORDS_HPP_
