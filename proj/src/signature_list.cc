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

#include "appgrease/signature_list.h"

#include <fstream>
#include <sstream>

#include "appgrease/error.h"

namespace appgrease {
namespace {

std::string Trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

SignatureList SignatureList::Parse(std::string_view text) {
  SignatureList list;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string trimmed = Trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    size_t c1 = trimmed.find(',');
    size_t c2 = c1 == std::string::npos ? std::string::npos : trimmed.find(',', c1 + 1);
    if (c2 == std::string::npos) {
      throw Error(ErrorCode::kInvalidManifest,
                  "signature line " + std::to_string(line_no) + ": expected name,kind,pattern");
    }
    TrackerSignature sig;
    sig.tracker = Trim(std::string_view(trimmed).substr(0, c1));
    std::string kind = Trim(std::string_view(trimmed).substr(c1 + 1, c2 - c1 - 1));
    sig.pattern = Trim(std::string_view(trimmed).substr(c2 + 1));
    if (kind == "hostname") {
      sig.kind = PatternKind::kHostname;
    } else if (kind == "class-prefix") {
      sig.kind = PatternKind::kClassPrefix;
    } else {
      throw Error(ErrorCode::kInvalidManifest,
                  "signature line " + std::to_string(line_no) + ": unknown kind '" + kind + "'");
    }
    if (sig.tracker.empty() || sig.pattern.empty()) {
      throw Error(ErrorCode::kInvalidManifest,
                  "signature line " + std::to_string(line_no) + ": empty name or pattern");
    }
    list.entries.push_back(std::move(sig));
  }
  return list;
}

SignatureList SignatureList::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read signature list " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return Parse(ss.str());
}

std::vector<std::string> SignatureList::Hostnames() const {
  std::vector<std::string> out;
  for (const TrackerSignature& s : entries) {
    if (s.kind == PatternKind::kHostname) out.push_back(s.pattern);
  }
  return out;
}

std::vector<std::string> SummarizeTrackers(const std::vector<DetectionHit>& hits) {
  std::vector<std::string> out;
  for (const DetectionHit& h : hits) {
    bool seen = false;
    for (const std::string& t : out) seen |= t == h.tracker;
    if (!seen) out.push_back(h.tracker);
  }
  return out;
}

}  // namespace appgrease
