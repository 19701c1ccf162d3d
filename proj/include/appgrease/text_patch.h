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

#include <memory>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "appgrease/decoded_app.h"

namespace appgrease {

struct DiffHunk {
  size_t old_start = 0;
  size_t old_count = 0;
  size_t new_start = 0;
  size_t new_count = 0;
  // (' ' | '-' | '+', line text without newline)
  std::vector<std::pair<char, std::string>> lines;
  bool old_missing_newline = false;
  bool new_missing_newline = false;
};

struct UnifiedDiff {
  std::string old_path;
  std::string new_path;
  std::vector<DiffHunk> hunks;

  // Throws InvalidManifest when hunk headers and bodies disagree.
  static UnifiedDiff Parse(std::string_view text);
};

// Shell-style glob over '/'-separated paths: '*' and '?' stay within one
// path segment, '**' spans segments.
bool GlobMatch(std::string_view pattern, std::string_view path);

struct TextPatchOutcome {
  DecodedTree tree;
  int changes = 0;
  int files_matched = 0;
};

// Regex replacement in every file matching `glob`; changes counts replaced
// occurrences.
TextPatchOutcome ApplyRegexPatch(const DecodedTree& tree, std::string_view glob,
                                 const std::regex& find, std::string_view replace);

// Applies every hunk with exact context; changes counts hunks. A missing
// target file yields files_matched == 0 and no changes.
// Throws PatchContextMismatch.
TextPatchOutcome ApplyUnifiedDiff(const DecodedTree& tree, const std::string& path,
                                  const UnifiedDiff& diff);

}  // namespace appgrease
