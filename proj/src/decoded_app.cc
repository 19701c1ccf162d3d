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

#include "appgrease/decoded_app.h"

#include <cstdlib>

#include "appgrease/error.h"

namespace appgrease {

namespace {

std::string AttrText(const AxmlDocument& doc, const XmlNode& node, std::string_view ns,
                     std::string_view name) {
  const XmlAttribute* attr = doc.FindAttribute(node, ns, name);
  if (attr == nullptr) attr = doc.FindAttribute(node, "", name);
  if (attr == nullptr) return {};
  return doc.FormatValue(*attr);
}

}  // namespace

ManifestInfo ReadManifestInfo(const AxmlDocument& manifest) {
  ManifestInfo info;
  const XmlNode& root = manifest.root;
  info.package = AttrText(manifest, root, "", "package");
  info.version_name = AttrText(manifest, root, kAndroidNamespaceUri, "versionName");
  const XmlAttribute* code = manifest.FindAttribute(root, kAndroidNamespaceUri, "versionCode");
  if (code != nullptr) {
    if (code->value.type == ValueType::kString) {
      info.version_code = std::strtoll(manifest.String(code->raw_value).c_str(), nullptr, 10);
    } else {
      info.version_code = static_cast<int32_t>(code->value.data);
    }
  }
  for (const XmlNode& child : root.children) {
    if (child.kind != NodeKind::kElement) continue;
    if (manifest.NameOf(child) != "uses-permission") continue;
    std::string perm = AttrText(manifest, child, kAndroidNamespaceUri, "name");
    if (!perm.empty()) info.permissions.push_back(std::move(perm));
  }
  return info;
}

bool IsDexEntryName(std::string_view name) {
  if (name.size() < 11 || name.substr(0, 7) != "classes") return false;
  if (name.substr(name.size() - 4) != ".dex") return false;
  std::string_view digits = name.substr(7, name.size() - 11);
  for (char c : digits) {
    if (c < '0' || c > '9') return false;
  }
  return digits.empty() || digits[0] != '0';
}

DecodedApp DecodeApp(ByteView apk_bytes, std::optional<DecodedTree> tree) {
  DecodedApp app;
  app.archive = ApkArchive::Open(apk_bytes);
  const ZipEntry* manifest = app.archive.Find(kManifestEntry);
  if (manifest == nullptr) {
    throw Error(ErrorCode::kMalformedZip, "archive has no AndroidManifest.xml");
  }
  app.manifest = AxmlDocument::Parse(manifest->data);
  for (const ZipEntry& entry : app.archive.entries()) {
    if (!IsDexEntryName(entry.name)) continue;
    app.dexes.emplace(entry.name, DexImage::Parse(entry.data, DexParseMode::kLenient));
  }
  app.tree = std::move(tree);
  return app;
}

Bytes EncodeApp(const DecodedApp& app) {
  ApkArchive archive = app.archive;
  if (app.manifest_dirty) archive.ReplaceEntry(kManifestEntry, app.manifest.Serialize());
  for (const std::string& path : app.dirty_dexes) {
    auto it = app.dexes.find(path);
    if (it == app.dexes.end()) continue;
    DexImage sealed = it->second;
    sealed.Reseal();
    archive.ReplaceEntry(path, sealed.bytes());
  }
  return archive.Write();
}

}  // namespace appgrease
