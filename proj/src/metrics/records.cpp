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

#include "vfmh/metrics/records.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "vfmh/core/errors.hpp"

namespace vfmh::metrics {
namespace {

void put_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

template <typename T>
T parse_field(std::string_view s, std::size_t line) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError("metrics csv line " + std::to_string(line) +
                    ": bad field '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::vector<EpochRecord> RunTracker::final_epoch() const {
  std::vector<EpochRecord> out;
  if (records_.empty()) return out;
  const std::size_t last = records_.back().epoch;
  for (const auto& r : records_) {
    if (r.epoch == last) out.push_back(r);
  }
  return out;
}

std::string to_csv(const std::vector<EpochRecord>& records) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : records) {
    out += std::to_string(r.party) + ',' + std::to_string(r.epoch) + ',';
    put_double(out, r.train_loss);
    out += ',';
    put_double(out, r.test_acc);
    out += ',' + std::to_string(r.msgs_up) + ',' + std::to_string(r.msgs_down) +
           ',' + std::to_string(r.bytes) + '\n';
  }
  return out;
}

std::vector<EpochRecord> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw DataError("metrics csv: missing header");
  }
  std::vector<EpochRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest = line;
    while (true) {
      auto pos = rest.find(',');
      f.push_back(rest.substr(0, pos));
      if (pos == std::string_view::npos) break;
      rest.remove_prefix(pos + 1);
    }
    if (f.size() != 7) {
      throw DataError("metrics csv line " + std::to_string(line_no) +
                      ": expected 7 fields");
    }
    EpochRecord r;
    r.party = parse_field<std::size_t>(f[0], line_no);
    r.epoch = parse_field<std::size_t>(f[1], line_no);
    r.train_loss = parse_field<double>(f[2], line_no);
    r.test_acc = parse_field<double>(f[3], line_no);
    r.msgs_up = parse_field<std::uint64_t>(f[4], line_no);
    r.msgs_down = parse_field<std::uint64_t>(f[5], line_no);
    r.bytes = parse_field<std::uint64_t>(f[6], line_no);
    out.push_back(r);
  }
  return out;
}

void write_csv(const std::filesystem::path& path,
               const std::vector<EpochRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_csv(records);
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace vfmh::metrics
