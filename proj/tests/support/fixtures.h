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

// Test-side builders for the binary formats the library reads. They are
// written from the format descriptions and do not call into the library, so
// parse tests compare two independent implementations.

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace fixture {

using Bytes = std::vector<uint8_t>;

inline constexpr char kAndroidNs[] = "http://schemas.android.com/apk/res/android";
inline constexpr char kPackage[] = "com.example.fixture";
inline constexpr char kBillingString[] = "com.android.vending.billing.InAppBillingService.BIND";
inline constexpr char kTrackerUrl[] = "https://graph.facebook.com/v12.0";
inline constexpr char kTrackerHost[] = "graph.facebook.com";
inline constexpr char kLayoutEntry[] = "res/layout/main.xml";
inline constexpr char kPinnedConfigEntry[] = "res/xml/network_security_config.xml";

// ---- binary XML ------------------------------------------------------------

struct Attr {
  bool android = true;  // in the android namespace
  std::string name;
  uint32_t res_id = 0;
  uint8_t type = 0x03;  // Res_value data type
  uint32_t data = 0;
  std::string str;      // string values (type 0x03)
};

Attr StrAttr(std::string name, std::string value, uint32_t res_id = 0, bool android = true);
Attr IntAttr(std::string name, int32_t value, uint32_t res_id);
Attr BoolAttr(std::string name, bool value, uint32_t res_id);

struct Node {
  std::string name;
  std::vector<Attr> attrs;
  std::vector<Node> children;
  bool is_text = false;
  std::string text;
};

// Encodes a document with one android namespace declaration on the root when
// any attribute uses it. Pool: attribute names carrying resource ids first
// (aligned with the resource map), then every other string in first-use order.
Bytes EncodeAxml(const Node& root, bool utf8 = false);

// ---- DEX ---------------------------------------------------------------------

// Minimal valid DEX: header, sorted unique string_ids, string data, map list,
// checksum and signature computed with the test oracles.
Bytes BuildDex(std::vector<std::string> strings, char version_digit = '5');

// ---- ZIP -----------------------------------------------------------------------

struct ZipItem {
  std::string name;
  Bytes data;
  bool deflate = true;
};

Bytes BuildZip(const std::vector<ZipItem>& items, const std::string& comment = {});

// ---- fixture app -----------------------------------------------------------------

struct ApkOptions {
  std::string package = kPackage;
  bool billing = true;
  bool tracker = true;
  bool stories = true;
  bool pinned_config = false;
  bool location_permission = true;
  std::vector<std::string> extra_strings;
  std::vector<std::string> second_dex;  // non-empty adds classes2.dex
  size_t blob_bytes = 0;                // stored random asset of this size
  uint64_t seed = 1;
};

Node FixtureManifest(const ApkOptions& options = {});
Node FixtureLayout(bool stories = true);
Node PinnedNetworkConfig();
std::vector<std::string> FixtureDexStrings(const ApkOptions& options = {});
std::vector<ZipItem> FixtureItems(const ApkOptions& options = {});
Bytes BuildFixtureApk(const ApkOptions& options = {});

// Disassembly-style text tree with two location reads.
std::map<std::string, std::string> FixtureSmaliTree();

// ---- environment ------------------------------------------------------------------

std::string SourceDir();
std::string ExtensionsDir();
std::string SignaturesPath();

Bytes RandomBytes(std::mt19937_64& rng, size_t n);

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string operator/(const std::string& leaf) const { return (path_ / leaf).string(); }

 private:
  std::filesystem::path path_;
};

void WriteFile(const std::filesystem::path& path, const Bytes& data);
Bytes ReadFile(const std::filesystem::path& path);

}  // namespace fixture
