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

#include "support/fixtures.h"

#include <zlib.h>

#include <algorithm>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "support/oracles.h"

namespace fixture {

namespace {

void Put16(Bytes& b, uint32_t v) {
  b.push_back(static_cast<uint8_t>(v));
  b.push_back(static_cast<uint8_t>(v >> 8));
}

void Put32(Bytes& b, uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void Set32(Bytes& b, size_t at, uint32_t v) {
  for (int i = 0; i < 4; ++i) b[at + i] = static_cast<uint8_t>(v >> (8 * i));
}

std::u16string ToUtf16(const std::string& s) {
  std::u16string out;
  for (size_t i = 0; i < s.size();) {
    uint8_t c = static_cast<uint8_t>(s[i]);
    uint32_t cp;
    size_t n;
    if (c < 0x80) {
      cp = c;
      n = 1;
    } else if ((c >> 5) == 6) {
      cp = c & 0x1f;
      n = 2;
    } else if ((c >> 4) == 14) {
      cp = c & 0x0f;
      n = 3;
    } else {
      cp = c & 0x07;
      n = 4;
    }
    for (size_t k = 1; k < n; ++k) cp = (cp << 6) | (static_cast<uint8_t>(s[i + k]) & 0x3f);
    i += n;
    if (cp >= 0x10000) {
      cp -= 0x10000;
      out.push_back(static_cast<char16_t>(0xd800 + (cp >> 10)));
      out.push_back(static_cast<char16_t>(0xdc00 + (cp & 0x3ff)));
    } else {
      out.push_back(static_cast<char16_t>(cp));
    }
  }
  return out;
}

// ---- AXML encoder -------------------------------------------------------------

struct Pool {
  std::vector<std::string> strings;
  std::vector<uint32_t> res_ids;  // parallel to the first res_ids.size() strings

  uint32_t Index(const std::string& s) {
    for (size_t i = res_ids.size(); i < strings.size(); ++i) {
      if (strings[i] == s) return static_cast<uint32_t>(i);
    }
    strings.push_back(s);
    return static_cast<uint32_t>(strings.size() - 1);
  }

  uint32_t AttrName(const std::string& name, uint32_t res_id) {
    if (res_id == 0) return Index(name);
    for (size_t i = 0; i < res_ids.size(); ++i) {
      if (strings[i] == name && res_ids[i] == res_id) return static_cast<uint32_t>(i);
    }
    throw std::logic_error("attribute name not pre-registered");
  }
};

void CollectResNames(const Node& n, Pool& pool) {
  for (const Attr& a : n.attrs) {
    if (a.res_id == 0) continue;
    bool seen = false;
    for (size_t i = 0; i < pool.res_ids.size(); ++i) {
      seen |= pool.strings[i] == a.name && pool.res_ids[i] == a.res_id;
    }
    if (!seen) {
      pool.strings.push_back(a.name);
      pool.res_ids.push_back(a.res_id);
    }
  }
  for (const Node& c : n.children) CollectResNames(c, pool);
}

bool UsesAndroid(const Node& n) {
  for (const Attr& a : n.attrs) {
    if (a.android) return true;
  }
  for (const Node& c : n.children) {
    if (UsesAndroid(c)) return true;
  }
  return false;
}

void EncodeLen8(Bytes& b, size_t len) {
  if (len > 0x7f) b.push_back(static_cast<uint8_t>(0x80 | (len >> 8)));
  b.push_back(static_cast<uint8_t>(len));
}

void EncodeLen16(Bytes& b, size_t len) {
  if (len > 0x7fff) {
    Put16(b, static_cast<uint32_t>(0x8000 | (len >> 16)));
  }
  Put16(b, static_cast<uint32_t>(len & 0xffff));
}

Bytes EncodePool(const Pool& pool, bool utf8) {
  Bytes data;
  std::vector<uint32_t> offsets;
  for (const std::string& s : pool.strings) {
    offsets.push_back(static_cast<uint32_t>(data.size()));
    std::u16string u = ToUtf16(s);
    if (utf8) {
      EncodeLen8(data, u.size());
      EncodeLen8(data, s.size());
      data.insert(data.end(), s.begin(), s.end());
      data.push_back(0);
    } else {
      EncodeLen16(data, u.size());
      for (char16_t c : u) Put16(data, c);
      Put16(data, 0);
    }
  }
  while (data.size() % 4 != 0) data.push_back(0);
  Bytes chunk;
  uint32_t count = static_cast<uint32_t>(pool.strings.size());
  uint32_t strings_start = 28 + 4 * count;
  Put16(chunk, 0x0001);
  Put16(chunk, 28);
  Put32(chunk, strings_start + static_cast<uint32_t>(data.size()));
  Put32(chunk, count);
  Put32(chunk, 0);  // styles
  Put32(chunk, utf8 ? 0x100 : 0);
  Put32(chunk, count > 0 ? strings_start : 0);
  Put32(chunk, 0);
  for (uint32_t o : offsets) Put32(chunk, o);
  chunk.insert(chunk.end(), data.begin(), data.end());
  return chunk;
}

void NodeHeader(Bytes& b, uint16_t type, uint32_t size, uint32_t line) {
  Put16(b, type);
  Put16(b, 16);
  Put32(b, size);
  Put32(b, line);
  Put32(b, 0xffffffff);
}

// Pre-pass so string indices are stable before emission.
void InternAll(const Node& n, Pool& pool) {
  if (n.is_text) {
    pool.Index(n.text);
    return;
  }
  pool.Index(n.name);
  for (const Attr& a : n.attrs) {
    pool.AttrName(a.name, a.res_id);
    if (a.type == 0x03) pool.Index(a.str);
  }
  for (const Node& c : n.children) InternAll(c, pool);
}

void EmitNode(const Node& n, Pool& pool, uint32_t android_uri, Bytes& out, uint32_t& line) {
  ++line;
  if (n.is_text) {
    NodeHeader(out, 0x0104, 28, line);
    Put32(out, pool.Index(n.text));
    Put16(out, 8);
    out.push_back(0);
    out.push_back(0x00);
    Put32(out, 0);
    return;
  }
  uint16_t id_index = 0, class_index = 0, style_index = 0;
  for (size_t i = 0; i < n.attrs.size(); ++i) {
    const Attr& a = n.attrs[i];
    if (a.name == "id" && a.android) id_index = static_cast<uint16_t>(i + 1);
    if (a.name == "class" && !a.android) class_index = static_cast<uint16_t>(i + 1);
    if (a.name == "style" && !a.android) style_index = static_cast<uint16_t>(i + 1);
  }
  uint32_t my_line = line;
  NodeHeader(out, 0x0102, 36 + 20 * static_cast<uint32_t>(n.attrs.size()), my_line);
  Put32(out, 0xffffffff);
  Put32(out, pool.Index(n.name));
  Put16(out, 20);
  Put16(out, 20);
  Put16(out, static_cast<uint32_t>(n.attrs.size()));
  Put16(out, id_index);
  Put16(out, class_index);
  Put16(out, style_index);
  for (const Attr& a : n.attrs) {
    Put32(out, a.android ? android_uri : 0xffffffff);
    Put32(out, pool.AttrName(a.name, a.res_id));
    uint32_t str = a.type == 0x03 ? pool.Index(a.str) : 0xffffffff;
    Put32(out, str);
    Put16(out, 8);
    out.push_back(0);
    out.push_back(a.type);
    Put32(out, a.type == 0x03 ? str : a.data);
  }
  for (const Node& c : n.children) EmitNode(c, pool, android_uri, out, line);
  NodeHeader(out, 0x0103, 24, my_line);
  Put32(out, 0xffffffff);
  Put32(out, pool.Index(n.name));
}

// ---- DEX helpers -------------------------------------------------------------

void PutUleb(Bytes& b, uint32_t v) {
  while (v >= 0x80) {
    b.push_back(static_cast<uint8_t>(v | 0x80));
    v >>= 7;
  }
  b.push_back(static_cast<uint8_t>(v));
}

uint32_t Utf16Units(const std::string& s) {
  uint32_t n = 0;
  for (size_t i = 0; i < s.size();) {
    uint8_t c = static_cast<uint8_t>(s[i]);
    size_t len = c < 0x80 ? 1 : (c >> 5) == 6 ? 2 : (c >> 4) == 14 ? 3 : 4;
    n += len == 4 ? 2 : 1;
    i += len;
  }
  return n;
}

// Modified UTF-8: supplementary characters as surrogate pairs.
std::string ToMutf8(const std::string& s) {
  std::string out;
  for (char16_t c : ToUtf16(s)) {
    if (c != 0 && c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
      out.push_back(static_cast<char>(0xc0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3f)));
    } else {
      out.push_back(static_cast<char>(0xe0 | (c >> 12)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3f)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3f)));
    }
  }
  return out;
}

Bytes DeflateRawTest(const Bytes& data) {
  z_stream zs{};
  deflateInit2(&zs, 6, Z_DEFLATED, -15, 8, Z_DEFAULT_STRATEGY);
  Bytes out(deflateBound(&zs, data.size()) + 16);
  zs.next_in = const_cast<Bytef*>(data.data());
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  deflate(&zs, Z_FINISH);
  out.resize(zs.total_out);
  deflateEnd(&zs);
  return out;
}

}  // namespace

Attr StrAttr(std::string name, std::string value, uint32_t res_id, bool android) {
  Attr a;
  a.android = android;
  a.name = std::move(name);
  a.res_id = res_id;
  a.type = 0x03;
  a.str = std::move(value);
  return a;
}

Attr IntAttr(std::string name, int32_t value, uint32_t res_id) {
  Attr a;
  a.name = std::move(name);
  a.res_id = res_id;
  a.type = 0x10;
  a.data = static_cast<uint32_t>(value);
  return a;
}

Attr BoolAttr(std::string name, bool value, uint32_t res_id) {
  Attr a;
  a.name = std::move(name);
  a.res_id = res_id;
  a.type = 0x12;
  a.data = value ? 1 : 0;
  return a;
}

Bytes EncodeAxml(const Node& root, bool utf8) {
  Pool pool;
  CollectResNames(root, pool);
  bool android = UsesAndroid(root);
  uint32_t prefix = 0, uri = 0xffffffff;
  if (android) {
    prefix = pool.Index("android");
    uri = pool.Index(kAndroidNs);
  }
  InternAll(root, pool);

  Bytes body;
  uint32_t line = 1;
  if (android) {
    NodeHeader(body, 0x0100, 24, line);
    Put32(body, prefix);
    Put32(body, uri);
  }
  Bytes tree;
  uint32_t node_line = 1;
  EmitNode(root, pool, uri, tree, node_line);
  body.insert(body.end(), tree.begin(), tree.end());
  if (android) {
    NodeHeader(body, 0x0101, 24, line);
    Put32(body, prefix);
    Put32(body, uri);
  }

  Bytes out;
  Put16(out, 0x0003);
  Put16(out, 8);
  Put32(out, 0);
  Bytes pool_chunk = EncodePool(pool, utf8);
  out.insert(out.end(), pool_chunk.begin(), pool_chunk.end());
  if (!pool.res_ids.empty()) {
    Put16(out, 0x0180);
    Put16(out, 8);
    Put32(out, 8 + 4 * static_cast<uint32_t>(pool.res_ids.size()));
    for (uint32_t id : pool.res_ids) Put32(out, id);
  }
  out.insert(out.end(), body.begin(), body.end());
  Set32(out, 4, static_cast<uint32_t>(out.size()));
  return out;
}

Bytes BuildDex(std::vector<std::string> strings, char version_digit) {
  std::sort(strings.begin(), strings.end());
  strings.erase(std::unique(strings.begin(), strings.end()), strings.end());
  const uint32_t n = static_cast<uint32_t>(strings.size());
  Bytes out(0x70, 0);
  const char magic[8] = {'d', 'e', 'x', '\n', '0', '3', version_digit, 0};
  std::copy(magic, magic + 8, out.begin());
  uint32_t ids_off = 0x70;
  out.resize(ids_off + 4 * n, 0);
  uint32_t data_off = static_cast<uint32_t>(out.size());
  for (uint32_t i = 0; i < n; ++i) {
    Set32(out, ids_off + 4 * i, static_cast<uint32_t>(out.size()));
    PutUleb(out, Utf16Units(strings[i]));
    std::string m = ToMutf8(strings[i]);
    out.insert(out.end(), m.begin(), m.end());
    out.push_back(0);
  }
  while (out.size() % 4 != 0) out.push_back(0);
  uint32_t map_off = static_cast<uint32_t>(out.size());
  const uint32_t items = n > 0 ? 4 : 2;
  Put32(out, items);
  auto item = [&](uint16_t type, uint32_t size, uint32_t off) {
    Put16(out, type);
    Put16(out, 0);
    Put32(out, size);
    Put32(out, off);
  };
  item(0x0000, 1, 0);
  if (n > 0) {
    item(0x0001, n, ids_off);
    item(0x2002, n, data_off);
  }
  item(0x1000, 1, map_off);
  uint32_t file_size = static_cast<uint32_t>(out.size());
  Set32(out, 32, file_size);
  Set32(out, 36, 0x70);
  Set32(out, 40, 0x12345678);
  Set32(out, 52, map_off);
  Set32(out, 56, n);
  Set32(out, 60, n > 0 ? ids_off : 0);
  Set32(out, 104, file_size - data_off);
  Set32(out, 108, data_off);
  auto sig = oracle::Sha1(oracle::ByteSpan(out).subspan(32));
  std::copy(sig.begin(), sig.end(), out.begin() + 12);
  Set32(out, 8, oracle::Adler32(oracle::ByteSpan(out).subspan(12)));
  return out;
}

Bytes BuildZip(const std::vector<ZipItem>& items, const std::string& comment) {
  Bytes out;
  Bytes cd;
  for (const ZipItem& item : items) {
    Bytes payload = item.deflate ? DeflateRawTest(item.data) : item.data;
    uint32_t crc = oracle::Crc32(item.data);
    uint32_t offset = static_cast<uint32_t>(out.size());
    uint16_t method = item.deflate ? 8 : 0;
    uint16_t version = item.deflate ? 20 : 10;
    Put32(out, 0x04034b50);
    Put16(out, version);
    Put16(out, 0);
    Put16(out, method);
    Put16(out, 0);
    Put16(out, 0x0021);
    Put32(out, crc);
    Put32(out, static_cast<uint32_t>(payload.size()));
    Put32(out, static_cast<uint32_t>(item.data.size()));
    Put16(out, static_cast<uint32_t>(item.name.size()));
    Put16(out, 0);
    out.insert(out.end(), item.name.begin(), item.name.end());
    out.insert(out.end(), payload.begin(), payload.end());

    Put32(cd, 0x02014b50);
    Put16(cd, version);
    Put16(cd, version);
    Put16(cd, 0);
    Put16(cd, method);
    Put16(cd, 0);
    Put16(cd, 0x0021);
    Put32(cd, crc);
    Put32(cd, static_cast<uint32_t>(payload.size()));
    Put32(cd, static_cast<uint32_t>(item.data.size()));
    Put16(cd, static_cast<uint32_t>(item.name.size()));
    Put16(cd, 0);
    Put16(cd, 0);
    Put16(cd, 0);
    Put16(cd, 0);
    Put32(cd, 0);
    Put32(cd, offset);
    cd.insert(cd.end(), item.name.begin(), item.name.end());
  }
  uint32_t cd_offset = static_cast<uint32_t>(out.size());
  out.insert(out.end(), cd.begin(), cd.end());
  Put32(out, 0x06054b50);
  Put16(out, 0);
  Put16(out, 0);
  Put16(out, static_cast<uint32_t>(items.size()));
  Put16(out, static_cast<uint32_t>(items.size()));
  Put32(out, static_cast<uint32_t>(cd.size()));
  Put32(out, cd_offset);
  Put16(out, static_cast<uint32_t>(comment.size()));
  out.insert(out.end(), comment.begin(), comment.end());
  return out;
}

Node FixtureManifest(const ApkOptions& options) {
  Node manifest;
  manifest.name = "manifest";
  manifest.attrs = {IntAttr("versionCode", 7, 0x0101021b),
                    StrAttr("versionName", "1.2.3", 0x0101021c),
                    StrAttr("package", options.package, 0, false)};
  auto permission = [](const std::string& name) {
    Node n;
    n.name = "uses-permission";
    n.attrs = {StrAttr("name", name, 0x01010003)};
    return n;
  };
  manifest.children.push_back(permission("android.permission.INTERNET"));
  if (options.location_permission) {
    manifest.children.push_back(permission("android.permission.ACCESS_FINE_LOCATION"));
  }
  if (options.billing) manifest.children.push_back(permission("com.android.vending.BILLING"));
  Node app;
  app.name = "application";
  app.attrs = {StrAttr("label", "Fixture", 0x01010001), BoolAttr("debuggable", false, 0x0101000f)};
  Node activity;
  activity.name = "activity";
  activity.attrs = {StrAttr("name", ".MainActivity", 0x01010003)};
  app.children.push_back(activity);
  manifest.children.push_back(app);
  return manifest;
}

Node FixtureLayout(bool stories) {
  Node root;
  root.name = "LinearLayout";
  root.attrs = {IntAttr("orientation", 1, 0x010100c4), StrAttr("id", "main_root", 0x010100d0)};
  if (stories) {
    Node bar;
    bar.name = "LinearLayout";
    bar.attrs = {IntAttr("orientation", 0, 0x010100c4), StrAttr("id", "stories_bar", 0x010100d0)};
    Node label;
    label.name = "TextView";
    label.attrs = {StrAttr("text", "Stories", 0x0101014f)};
    bar.children.push_back(label);
    root.children.push_back(bar);
  }
  Node feed;
  feed.name = "ListView";
  feed.attrs = {StrAttr("id", "news_feed", 0x010100d0)};
  root.children.push_back(feed);
  return root;
}

Node PinnedNetworkConfig() {
  Node root;
  root.name = "network-security-config";
  Node domain;
  domain.name = "domain-config";
  Node host;
  host.name = "domain";
  host.attrs = {StrAttr("includeSubdomains", "true", 0, false)};
  Node text;
  text.is_text = true;
  text.text = "example.com";
  host.children.push_back(text);
  Node pins;
  pins.name = "pin-set";
  pins.attrs = {StrAttr("expiration", "2030-01-01", 0, false)};
  Node pin;
  pin.name = "pin";
  pin.attrs = {StrAttr("digest", "SHA-256", 0, false)};
  Node pin_text;
  pin_text.is_text = true;
  pin_text.text = "7HIpactkIAq2Y49orFOOQKurWxmmSFZhBCoQYcRhJ3Y=";
  pin.children.push_back(pin_text);
  pins.children.push_back(pin);
  Node anchors;
  anchors.name = "trust-anchors";
  Node system;
  system.name = "certificates";
  system.attrs = {StrAttr("src", "system", 0, false)};
  anchors.children.push_back(system);
  domain.children = {host, pins, anchors};
  root.children.push_back(domain);
  return root;
}

std::vector<std::string> FixtureDexStrings(const ApkOptions& options) {
  std::vector<std::string> s = {"Lcom/example/fixture/MainActivity;", "Landroid/app/Activity;",
                                "onCreate", "V", "Hello, fixture"};
  if (options.billing) s.push_back(kBillingString);
  if (options.tracker) s.push_back(kTrackerUrl);
  s.insert(s.end(), options.extra_strings.begin(), options.extra_strings.end());
  return s;
}

std::vector<ZipItem> FixtureItems(const ApkOptions& options) {
  std::vector<ZipItem> items;
  items.push_back({"AndroidManifest.xml", EncodeAxml(FixtureManifest(options)), true});
  items.push_back({"classes.dex", BuildDex(FixtureDexStrings(options)), true});
  if (!options.second_dex.empty()) {
    items.push_back({"classes2.dex", BuildDex(options.second_dex), true});
  }
  items.push_back({kLayoutEntry, EncodeAxml(FixtureLayout(options.stories), true), true});
  if (options.pinned_config) {
    items.push_back({kPinnedConfigEntry, EncodeAxml(PinnedNetworkConfig(), true), true});
  }
  std::mt19937_64 rng(options.seed);
  items.push_back({"resources.arsc", RandomBytes(rng, 1024), false});
  std::string readme = "fixture asset\n";
  for (int i = 0; i < 40; ++i) readme += "line " + std::to_string(i) + " of compressible text\n";
  items.push_back({"assets/readme.txt", Bytes(readme.begin(), readme.end()), true});
  if (options.blob_bytes > 0) {
    items.push_back({"assets/blob.bin", RandomBytes(rng, options.blob_bytes), false});
  }
  return items;
}

Bytes BuildFixtureApk(const ApkOptions& options) { return BuildZip(FixtureItems(options)); }

std::map<std::string, std::string> FixtureSmaliTree() {
  std::map<std::string, std::string> tree;
  tree["smali/com/example/fixture/Tracker.smali"] =
      ".class public Lcom/example/fixture/Tracker;\n"
      ".super Ljava/lang/Object;\n"
      "\n"
      ".method public report(Landroid/location/Location;)V\n"
      "    .registers 6\n"
      "    invoke-virtual {p1}, Landroid/location/Location;->getLatitude()D\n"
      "\n"
      "    move-result-wide v0\n"
      "    return-void\n"
      ".end method\n";
  tree["smali/com/example/fixture/Map.smali"] =
      ".class public Lcom/example/fixture/Map;\n"
      ".super Ljava/lang/Object;\n"
      "\n"
      ".method public center(Landroid/location/Location;)V\n"
      "    .registers 6\n"
      "    invoke-virtual {p1}, Landroid/location/Location;->getLongitude()D\n"
      "\n"
      "    move-result-wide v2\n"
      "    return-void\n"
      ".end method\n";
  tree["res/layout/main.xml"] =
      "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n"
      "<LinearLayout xmlns:android=\"http://schemas.android.com/apk/res/android\"\n"
      "    android:orientation=\"vertical\">\n"
      "    <LinearLayout android:id=\"@+id/stories_bar\" />\n"
      "    <ListView android:id=\"@+id/news_feed\" />\n"
      "</LinearLayout>\n";
  return tree;
}

std::string SourceDir() { return APPGREASE_SOURCE_DIR; }
std::string ExtensionsDir() { return SourceDir() + "/extensions"; }
std::string SignaturesPath() { return SourceDir() + "/data/trackers.csv"; }

Bytes RandomBytes(std::mt19937_64& rng, size_t n) {
  Bytes out(n);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    uint64_t v = rng();
    for (int k = 0; k < 8; ++k) out[i + k] = static_cast<uint8_t>(v >> (8 * k));
  }
  for (; i < n; ++i) out[i] = static_cast<uint8_t>(rng());
  return out;
}

TempDir::TempDir() {
  std::string tmpl = (std::filesystem::temp_directory_path() / "appgrease-test-XXXXXX").string();
  std::vector<char> buf(tmpl.begin(), tmpl.end());
  buf.push_back(0);
  if (mkdtemp(buf.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = buf.data();
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

void WriteFile(const std::filesystem::path& path, const Bytes& data) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
}

Bytes ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return Bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace fixture
