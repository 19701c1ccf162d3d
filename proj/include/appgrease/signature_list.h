/*
 * Copyright (C) 2026 The appgrease Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace appgrease {

enum class PatternKind { kHostname, kClassPrefix };

struct TrackerSignature {
  std::string tracker;
  PatternKind kind = PatternKind::kHostname;
  std::string pattern;

  friend bool operator==(const TrackerSignature&, const TrackerSignature&) = default;
};

// One signature per line: "tracker name,kind,pattern" where kind is
// "hostname" or "class-prefix". Blank lines and '#' comments are ignored.
struct SignatureList {
  std::vector<TrackerSignature> entries;

  static SignatureList Parse(std::string_view text);  // throws InvalidManifest
  static SignatureList Load(const std::string& path);

  std::vector<std::string> Hostnames() const;
};

struct DetectionHit {
  std::string tracker;
  std::string pattern;
  std::string dex_path;
  uint32_t string_index = 0;

  friend bool operator==(const DetectionHit&, const DetectionHit&) = default;
};

// Distinct tracker names in first-seen order.
std::vector<std::string> SummarizeTrackers(const std::vector<DetectionHit>& hits);

}  // namespace appgrease
