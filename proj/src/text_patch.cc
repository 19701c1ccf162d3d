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

#include "appgrease/text_patch.h"

#include <cstdlib>
#include <iterator>

#include "appgrease/error.h"

namespace appgrease {

namespace {

std::vector<std::string_view> SplitLines(std::string_view text, bool* final_newline) {
  std::vector<std::string_view> lines;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(pos));
      pos = text.size();
      break;
    }
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  *final_newline = text.empty() || text.back() == '\n';
  return lines;
}

[[noreturn]] void BadDiff(const std::string& why) {
  throw Error(ErrorCode::kInvalidManifest, "malformed unified diff: " + why);
}

// Parses "start[,count]".
void ParseRange(std::string_view s, size_t* start, size_t* count) {
  size_t comma = s.find(',');
  std::string first(s.substr(0, comma));
  std::string second = comma == std::string_view::npos ? "1" : std::string(s.substr(comma + 1));
  if (first.empty() || second.empty()) BadDiff("empty hunk range");
  char* end = nullptr;
  *start = std::strtoul(first.c_str(), &end, 10);
  if (*end != '\0') BadDiff("bad hunk range '" + std::string(s) + "'");
  *count = std::strtoul(second.c_str(), &end, 10);
  if (*end != '\0') BadDiff("bad hunk range '" + std::string(s) + "'");
}

std::string_view StripPathPrefix(std::string_view path) {
  size_t tab = path.find('\t');
  if (tab != std::string_view::npos) path = path.substr(0, tab);
  if (path.size() > 2 && (path.substr(0, 2) == "a/" || path.substr(0, 2) == "b/")) {
    path = path.substr(2);
  }
  return path;
}

bool GlobMatchAt(std::string_view p, std::string_view s) {
  while (!p.empty()) {
    if (p.substr(0, 2) == "**") {
      std::string_view rest = p.substr(2);
      if (!rest.empty() && rest[0] == '/') {
        // "**/" also matches zero segments.
        if (GlobMatchAt(rest.substr(1), s)) return true;
      }
      for (size_t i = 0; i <= s.size(); ++i) {
        if (GlobMatchAt(rest, s.substr(i))) return true;
      }
      return false;
    }
    if (p[0] == '*') {
      std::string_view rest = p.substr(1);
      for (size_t i = 0; i <= s.size(); ++i) {
        if (GlobMatchAt(rest, s.substr(i))) return true;
        if (i < s.size() && s[i] == '/') break;
      }
      return false;
    }
    if (s.empty()) return false;
    if (p[0] == '?') {
      if (s[0] == '/') return false;
    } else if (p[0] != s[0]) {
      return false;
    }
    p.remove_prefix(1);
    s.remove_prefix(1);
  }
  return s.empty();
}

}  // namespace

UnifiedDiff UnifiedDiff::Parse(std::string_view text) {
  UnifiedDiff diff;
  bool final_newline = true;
  std::vector<std::string_view> lines = SplitLines(text, &final_newline);
  size_t i = 0;
  while (i < lines.size() && lines[i].substr(0, 4) != "--- " && lines[i].substr(0, 3) != "@@ ") {
    ++i;  // leading "diff ..." / "index ..." noise
  }
  if (i < lines.size() && lines[i].substr(0, 4) == "--- ") {
    diff.old_path = std::string(StripPathPrefix(lines[i].substr(4)));
    ++i;
    if (i >= lines.size() || lines[i].substr(0, 4) != "+++ ") BadDiff("missing '+++' line");
    diff.new_path = std::string(StripPathPrefix(lines[i].substr(4)));
    ++i;
  }
  while (i < lines.size()) {
    std::string_view header = lines[i];
    if (header.empty()) {
      ++i;
      continue;
    }
    if (header.substr(0, 3) != "@@ ") BadDiff("expected hunk header, got '" + std::string(header) + "'");
    size_t close = header.find(" @@", 3);
    if (close == std::string_view::npos) BadDiff("unterminated hunk header");
    std::string_view ranges = header.substr(3, close - 3);
    size_t space = ranges.find(' ');
    if (space == std::string_view::npos || ranges[0] != '-' || ranges[space + 1] != '+') {
      BadDiff("bad hunk header '" + std::string(header) + "'");
    }
    DiffHunk hunk;
    ParseRange(ranges.substr(1, space - 1), &hunk.old_start, &hunk.old_count);
    ParseRange(ranges.substr(space + 2), &hunk.new_start, &hunk.new_count);
    ++i;
    size_t old_seen = 0;
    size_t new_seen = 0;
    while (i < lines.size() && (old_seen < hunk.old_count || new_seen < hunk.new_count ||
                                (i < lines.size() && !lines[i].empty() && lines[i][0] == '\\'))) {
      std::string_view line = lines[i];
      if (!line.empty() && line[0] == '\\') {
        if (hunk.lines.empty()) BadDiff("stray no-newline marker");
        char last = hunk.lines.back().first;
        if (last != '+') hunk.old_missing_newline = true;
        if (last != '-') hunk.new_missing_newline = true;
        ++i;
        continue;
      }
      char tag = line.empty() ? ' ' : line[0];
      std::string body = line.empty() ? std::string() : std::string(line.substr(1));
      if (tag == ' ') {
        ++old_seen;
        ++new_seen;
      } else if (tag == '-') {
        ++old_seen;
      } else if (tag == '+') {
        ++new_seen;
      } else {
        BadDiff("unexpected line '" + std::string(line) + "'");
      }
      hunk.lines.emplace_back(tag, std::move(body));
      ++i;
    }
    if (old_seen != hunk.old_count || new_seen != hunk.new_count) {
      BadDiff("hunk body does not match its header");
    }
    diff.hunks.push_back(std::move(hunk));
  }
  if (diff.hunks.empty()) BadDiff("no hunks");
  return diff;
}

bool GlobMatch(std::string_view pattern, std::string_view path) {
  return GlobMatchAt(pattern, path);
}

TextPatchOutcome ApplyRegexPatch(const DecodedTree& tree, std::string_view glob,
                                 const std::regex& find, std::string_view replace) {
  TextPatchOutcome out;
  out.tree = tree;
  std::string fmt(replace);
  for (auto& [path, text] : out.tree) {
    if (!GlobMatch(glob, path)) continue;
    ++out.files_matched;
    auto begin = std::sregex_iterator(text.begin(), text.end(), find);
    int matches = static_cast<int>(std::distance(begin, std::sregex_iterator()));
    if (matches == 0) continue;
    std::string replaced = std::regex_replace(text, find, fmt);
    if (replaced == text) continue;
    text = std::move(replaced);
    out.changes += matches;
  }
  return out;
}

TextPatchOutcome ApplyUnifiedDiff(const DecodedTree& tree, const std::string& path,
                                  const UnifiedDiff& diff) {
  TextPatchOutcome out;
  out.tree = tree;
  auto it = out.tree.find(path);
  if (it == out.tree.end()) return out;
  out.files_matched = 1;

  bool final_newline = true;
  std::vector<std::string_view> views = SplitLines(it->second, &final_newline);
  std::vector<std::string> lines(views.begin(), views.end());
  std::vector<std::string> result;
  size_t cursor = 0;  // next unconsumed line of the original
  for (size_t h = 0; h < diff.hunks.size(); ++h) {
    const DiffHunk& hunk = diff.hunks[h];
    size_t start = hunk.old_count == 0 ? hunk.old_start : hunk.old_start - 1;
    if (hunk.old_count != 0 && hunk.old_start == 0) {
      throw Error(ErrorCode::kPatchContextMismatch, "hunk " + std::to_string(h + 1) + " starts at line 0");
    }
    if (start < cursor || start > lines.size()) {
      throw Error(ErrorCode::kPatchContextMismatch,
                  "hunk " + std::to_string(h + 1) + " out of range in " + path);
    }
    result.insert(result.end(), lines.begin() + cursor, lines.begin() + start);
    size_t pos = start;
    for (const auto& [tag, body] : hunk.lines) {
      if (tag == '+') {
        result.push_back(body);
        continue;
      }
      if (pos >= lines.size() || lines[pos] != body) {
        throw Error(ErrorCode::kPatchContextMismatch,
                    "hunk " + std::to_string(h + 1) + " does not match " + path + " at line " +
                        std::to_string(pos + 1));
      }
      if (tag == ' ') result.push_back(body);
      ++pos;
    }
    bool reaches_end = pos == lines.size();
    if (hunk.old_missing_newline && (!reaches_end || final_newline)) {
      throw Error(ErrorCode::kPatchContextMismatch,
                  "hunk " + std::to_string(h + 1) + " expects no trailing newline in " + path);
    }
    if (reaches_end && (hunk.old_missing_newline || hunk.new_missing_newline)) {
      final_newline = !hunk.new_missing_newline;
    }
    cursor = pos;
    ++out.changes;
  }
  result.insert(result.end(), lines.begin() + cursor, lines.end());

  std::string text;
  for (size_t i = 0; i < result.size(); ++i) {
    text += result[i];
    if (i + 1 < result.size() || final_newline) text += '\n';
  }
  it->second = std::move(text);
  return out;
}

}  // namespace appgrease
