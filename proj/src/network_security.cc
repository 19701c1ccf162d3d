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

#include "appgrease/error.h"
#include "appgrease/extension.h"

namespace appgrease {

namespace {

constexpr std::string_view kConfigRoot = "network-security-config";
constexpr std::string_view kCreatedEntry = "res/xml/appgrease_network_security_config.xml";

bool IsConfigDocument(const ZipEntry& entry, AxmlDocument* out) {
  if (entry.name.rfind("res/", 0) != 0) return false;
  if (entry.name.size() < 4 || entry.name.compare(entry.name.size() - 4, 4, ".xml") != 0) {
    return false;
  }
  try {
    AxmlDocument doc = AxmlDocument::Parse(entry.data);
    if (doc.NameOf(doc.root) != kConfigRoot) return false;
    *out = std::move(doc);
    return true;
  } catch (const Error&) {
    return false;  // plain-text or otherwise foreign XML
  }
}

std::string AttrValue(const AxmlDocument& doc, const XmlNode& node, std::string_view name) {
  const XmlAttribute* a = doc.FindAttribute(node, "", name);
  return a == nullptr ? std::string() : doc.FormatValue(*a);
}

// Child element of `parent` named `name`, appended when missing.
NodeHandle EnsureChild(AxmlDocument& doc, const NodeHandle& parent, std::string_view name,
                       int* changes) {
  const XmlNode& p = doc.Resolve(parent);
  for (size_t i = 0; i < p.children.size(); ++i) {
    const XmlNode& c = p.children[i];
    if (c.kind == NodeKind::kElement && doc.NameOf(c) == name) {
      NodeHandle h = parent;
      h.path.push_back(i);
      return h;
    }
  }
  ++*changes;
  return doc.AppendElement(parent, name);
}

// Makes `anchors` trust the given certificate source.
void EnsureCertificates(AxmlDocument& doc, const NodeHandle& anchors, std::string_view src,
                        bool override_pins, int* changes) {
  const XmlNode& node = doc.Resolve(anchors);
  for (size_t i = 0; i < node.children.size(); ++i) {
    const XmlNode& c = node.children[i];
    if (c.kind != NodeKind::kElement || doc.NameOf(c) != "certificates") continue;
    if (AttrValue(doc, c, "src") != src) continue;
    if (override_pins && AttrValue(doc, c, "overridePins") != "true") {
      NodeHandle h = anchors;
      h.path.push_back(i);
      doc.SetAttribute(h, "", "overridePins", AttributeValue::Typed(TypedValue::Boolean(true)));
      ++*changes;
    }
    return;
  }
  NodeHandle cert = doc.AppendElement(anchors, "certificates");
  doc.SetAttribute(cert, "", "src", AttributeValue::String(std::string(src)));
  if (override_pins) {
    doc.SetAttribute(cert, "", "overridePins", AttributeValue::Typed(TypedValue::Boolean(true)));
  }
  ++*changes;
}

int PatchConfig(AxmlDocument& doc) {
  int changes = 0;
  for (;;) {
    std::vector<NodeHandle> pins = doc.FindElements(ElementSelector::Parse("pin-set"));
    if (pins.empty()) break;
    doc.RemoveElement(pins.front());
    ++changes;
  }
  NodeHandle root = doc.RootHandle();
  NodeHandle base = EnsureChild(doc, root, "base-config", &changes);
  NodeHandle anchors = EnsureChild(doc, base, "trust-anchors", &changes);
  EnsureCertificates(doc, anchors, "system", false, &changes);
  EnsureCertificates(doc, anchors, "user", true, &changes);
  for (const NodeHandle& h : doc.FindElements(ElementSelector::Parse("domain-config/trust-anchors"))) {
    EnsureCertificates(doc, h, "user", true, &changes);
  }
  return changes;
}

AxmlDocument NewConfig() {
  AxmlDocument doc;
  doc.pool.utf8 = true;
  doc.root.kind = NodeKind::kElement;
  doc.root.name = doc.InternString(kConfigRoot);
  doc.root.line = 1;
  doc.root.end_line = 1;
  PatchConfig(doc);
  return doc;
}

}  // namespace

int InjectNetworkSecurityConfig(DecodedApp& app) {
  std::vector<NodeHandle> apps = app.manifest.FindElements(ElementSelector::Parse("/manifest/application"));
  if (apps.empty()) {
    throw Error(ErrorCode::kMalformedAxml, "manifest has no application element");
  }

  int changes = 0;
  std::string config_path;
  std::vector<std::pair<std::string, Bytes>> rewritten;
  for (const ZipEntry& entry : app.archive.entries()) {
    AxmlDocument doc;
    if (!IsConfigDocument(entry, &doc)) continue;
    if (config_path.empty()) config_path = entry.name;
    int n = PatchConfig(doc);
    if (n == 0) continue;
    changes += n;
    rewritten.emplace_back(entry.name, doc.Serialize());
  }
  for (auto& [name, data] : rewritten) app.archive.ReplaceEntry(name, std::move(data));

  if (config_path.empty()) {
    config_path = std::string(kCreatedEntry);
    app.archive.AddEntry(config_path, NewConfig().Serialize());
    ++changes;
  }

  // resources.arsc is left alone, so the reference id is 0 and the raw value
  // carries the entry path.
  const XmlNode& application = app.manifest.Resolve(apps.front());
  if (app.manifest.FindAttribute(application, kAndroidNamespaceUri, "networkSecurityConfig") ==
      nullptr) {
    AttributeValue ref{ValueType::kReference, 0, config_path};
    app.manifest.SetAttribute(apps.front(), kAndroidNamespaceUri, "networkSecurityConfig", ref,
                              AndroidAttributeId("networkSecurityConfig"));
    app.manifest_dirty = true;
    ++changes;
  }
  return changes;
}

}  // namespace appgrease
