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

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "appgrease/axml.h"
#include "appgrease/dex_image.h"
#include "appgrease/zip_archive.h"

namespace appgrease {

inline constexpr std::string_view kManifestEntry = "AndroidManifest.xml";

// Relative path -> text contents, as produced by an external decoder.
using DecodedTree = std::map<std::string, std::string>;

struct ManifestInfo {
  std::string package;
  std::string version_name;
  int64_t version_code = 0;
  std::vector<std::string> permissions;
};

ManifestInfo ReadManifestInfo(const AxmlDocument& manifest);

// An APK with its manifest and bytecode held in parsed form. Other binary XML
// entries are parsed on demand and written straight back to the archive.
struct DecodedApp {
  ApkArchive archive;
  AxmlDocument manifest;
  std::map<std::string, DexImage> dexes;  // classes*.dex keyed by entry path
  std::optional<DecodedTree> tree;

  bool manifest_dirty = false;
  std::set<std::string> dirty_dexes;

  friend bool operator==(const DecodedApp& a, const DecodedApp& b) {
    return a.archive == b.archive && a.manifest == b.manifest && a.dexes == b.dexes &&
           a.tree == b.tree && a.manifest_dirty == b.manifest_dirty &&
           a.dirty_dexes == b.dirty_dexes;
  }
};

bool IsDexEntryName(std::string_view name);

// Throws MalformedZip (including a missing manifest), MalformedAxml, MalformedDex.
DecodedApp DecodeApp(ByteView apk_bytes, std::optional<DecodedTree> tree = std::nullopt);

// Writes dirty manifest and bytecode back (resealing DEX headers) and
// serializes the archive. Unsigned.
Bytes EncodeApp(const DecodedApp& app);

}  // namespace appgrease
