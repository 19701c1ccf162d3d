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

#include "appgrease/extension.h"

#include <type_traits>

#include "appgrease/error.h"

namespace appgrease {

namespace {

// Raised inside an action and turned into ActionFailed by the caller.
struct ActionError {
  std::string cause;
};

bool HostChar(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
         c == '-';
}

bool SameValue(const AxmlDocument& doc, const XmlAttribute& attr, const AttributeValue& value) {
  if (value.type == ValueType::kString) {
    return attr.value.type == ValueType::kString && doc.String(attr.value.data) == value.text;
  }
  if (attr.value.type != value.type || attr.value.data != value.data) return false;
  if (value.text.empty()) return true;
  return attr.raw_value != kNoIndex && doc.String(attr.raw_value) == value.text;
}

// Returns 1 when the attribute was written, 0 when it already held `set`.
int Assign(AxmlDocument& doc, const NodeHandle& handle, const AttributeAssignment& set) {
  const XmlNode& node = doc.Resolve(handle);
  const XmlAttribute* existing = doc.FindAttribute(node, set.attribute.ns_uri, set.attribute.name);
  if (existing != nullptr && SameValue(doc, *existing, set.value)) return 0;
  doc.SetAttribute(handle, set.attribute.ns_uri, set.attribute.name, set.value,
                   set.attribute.res_id);
  return 1;
}

class Applier {
 public:
  Applier(DecodedApp& app, const ExtensionPackage& pkg, const SignatureList& signatures)
      : app_(app), pkg_(pkg), signatures_(signatures) {}

  void NoFiles(ActionRecord& rec, const std::string& what) {
    if (pkg_.scope == Scope::kAppSpecific) throw ActionError{"NoFilesMatched: " + what};
    rec.warnings.push_back("NoFilesMatched: " + what);
  }

  void Run(const ManifestEdit& a, ActionRecord& rec) {
    for (const NodeHandle& h : app_.manifest.FindElements(a.selector)) {
      rec.changes += Assign(app_.manifest, h, a.set);
    }
    if (rec.changes > 0) app_.manifest_dirty = true;
  }

  void Run(const ManifestInsertElement& a, ActionRecord& rec) {
    AxmlDocument& doc = app_.manifest;
    std::vector<NodeHandle> parents = doc.FindElements(a.parent);
    if (parents.empty()) throw ActionError{"parent '" + a.parent.ToString() + "' not found"};
    for (const NodeHandle& parent : parents) {
      if (HasIdenticalChild(doc, doc.Resolve(parent), a)) continue;
      NodeHandle child = doc.AppendElement(parent, a.element);
      for (const AttributeAssignment& set : a.attributes) Assign(doc, child, set);
      ++rec.changes;
    }
    if (rec.changes > 0) app_.manifest_dirty = true;
  }

  void Run(const AxmlRemoveElement& a, ActionRecord& rec) {
    EditXml(a.entry, rec, [&](AxmlDocument& doc) {
      int removed = 0;
      // Remove one at a time: each removal invalidates outstanding handles.
      for (;;) {
        std::vector<NodeHandle> hits = doc.FindElements(a.selector);
        if (hits.empty()) break;
        if (hits.front().path.empty()) throw ActionError{"selector matches the root element"};
        doc.RemoveElement(hits.front());
        ++removed;
      }
      return removed;
    });
  }

  void Run(const AxmlSetAttribute& a, ActionRecord& rec) {
    EditXml(a.entry, rec, [&](AxmlDocument& doc) {
      int changed = 0;
      for (const NodeHandle& h : doc.FindElements(a.selector)) changed += Assign(doc, h, a.set);
      return changed;
    });
  }

  void Run(const DexStringReplace& a, ActionRecord& rec) {
    std::vector<std::string> patterns;
    if (a.use_signature_list) {
      patterns = signatures_.Hostnames();
    } else {
      patterns.push_back(a.pattern);
    }
    for (auto& [path, dex] : app_.dexes) {
      int before = rec.changes;
      for (const std::string& pattern : patterns) {
        for (const StringEntry& entry : dex.FindStrings(pattern)) {
          std::string replaced = Replacement(a, pattern, entry.bytes);
          if (replaced == entry.bytes) continue;
          dex.ReplaceStringSameLength(entry, replaced);
          ++rec.changes;
        }
      }
      if (rec.changes != before) app_.dirty_dexes.insert(path);
    }
  }

  void Run(const NetworkSecurityConfigInject&, ActionRecord& rec) {
    rec.changes += InjectNetworkSecurityConfig(app_);
  }

  void Run(const FileAdd& a, ActionRecord& rec) {
    const ZipEntry* existing = app_.archive.Find(a.entry);
    if (existing != nullptr) {
      if (existing->data == a.data) return;
      ReplaceArchiveEntry(a.entry, a.data);
    } else {
      app_.archive.AddEntry(a.entry, a.data, a.method);
    }
    ++rec.changes;
  }

  void Run(const FileTextPatch& a, ActionRecord& rec) {
    TextPatchOutcome out = ApplyRegexPatch(RequireTree(), a.glob, *a.regex, a.replace);
    if (out.files_matched == 0) NoFiles(rec, "no decoded file matches '" + a.glob + "'");
    rec.changes = out.changes;
    app_.tree = std::move(out.tree);
  }

  void Run(const FileDiffPatch& a, ActionRecord& rec) {
    TextPatchOutcome out = ApplyUnifiedDiff(RequireTree(), a.path, a.diff);
    if (out.files_matched == 0) {
      NoFiles(rec, "decoded file '" + a.path + "' not present");
      return;
    }
    rec.changes = out.changes;
    app_.tree = std::move(out.tree);
  }

 private:
  const DecodedTree& RequireTree() {
    if (!app_.tree) {
      throw Error(ErrorCode::kTreeModeUnavailable,
                  "extension " + pkg_.id + " needs a decoded file tree");
    }
    return *app_.tree;
  }

  template <typename Fn>
  void EditXml(const std::string& entry, ActionRecord& rec, Fn&& edit) {
    if (entry == kManifestEntry) {
      rec.changes = edit(app_.manifest);
      if (rec.changes > 0) app_.manifest_dirty = true;
      return;
    }
    const ZipEntry* e = app_.archive.Find(entry);
    if (e == nullptr) {
      NoFiles(rec, "entry '" + entry + "' not in archive");
      return;
    }
    AxmlDocument doc = AxmlDocument::Parse(e->data);
    rec.changes = edit(doc);
    if (rec.changes > 0) ReplaceArchiveEntry(entry, doc.Serialize());
  }

  void ReplaceArchiveEntry(const std::string& entry, Bytes data) {
    if (entry == kManifestEntry) {
      app_.manifest = AxmlDocument::Parse(data);
      app_.manifest_dirty = true;
      return;
    }
    if (IsDexEntryName(entry)) {
      app_.dexes.insert_or_assign(entry, DexImage::Parse(data, DexParseMode::kLenient));
      app_.dirty_dexes.erase(entry);
    }
    app_.archive.ReplaceEntry(entry, std::move(data));
  }

  static bool HasIdenticalChild(const AxmlDocument& doc, const XmlNode& parent,
                                const ManifestInsertElement& a) {
    for (const XmlNode& child : parent.children) {
      if (child.kind != NodeKind::kElement || doc.NameOf(child) != a.element) continue;
      if (child.attributes.size() != a.attributes.size()) continue;
      bool same = true;
      for (const AttributeAssignment& set : a.attributes) {
        const XmlAttribute* attr = doc.FindAttribute(child, set.attribute.ns_uri, set.attribute.name);
        if (attr == nullptr || !SameValue(doc, *attr, set.value)) {
          same = false;
          break;
        }
      }
      if (same) return true;
    }
    return false;
  }

  std::string Replacement(const DexStringReplace& a, const std::string& pattern,
                          const std::string& original) const {
    std::string out = original;
    size_t pos = 0;
    while ((pos = out.find(pattern, pos)) != std::string::npos) {
      switch (a.policy) {
        case ReplacementPolicy::kBillingBlank:
          out.replace(pos, pattern.size(), DeterministicLetters(pkg_.id, original, pattern.size()));
          pos += pattern.size();
          break;
        case ReplacementPolicy::kLiteralSameLength:
          out.replace(pos, pattern.size(), a.replacement);
          pos += pattern.size();
          break;
        case ReplacementPolicy::kHostnameBlank: {
          size_t begin = pos;
          size_t end = pos + pattern.size();
          while (begin > 0 && HostChar(out[begin - 1])) --begin;
          while (end < out.size() && HostChar(out[end])) ++end;
          std::string host = out.substr(begin, end - begin);
          out.replace(begin, host.size(), BlankHostname(host, pkg_.id));
          pos = end;
          break;
        }
      }
    }
    return out;
  }

  DecodedApp& app_;
  const ExtensionPackage& pkg_;
  const SignatureList& signatures_;
};

}  // namespace

int ActionLog::total_changes() const {
  int total = 0;
  for (const ActionRecord& r : actions) total += r.changes;
  return total;
}

std::vector<std::string> ActionLog::warnings() const {
  std::vector<std::string> out;
  for (const ActionRecord& r : actions) out.insert(out.end(), r.warnings.begin(), r.warnings.end());
  return out;
}

ApplyOutcome ApplyExtension(const DecodedApp& app, const ExtensionPackage& pkg,
                            const SignatureList& signatures) {
  ApplyOutcome out{app, {pkg.id, {}}};
  Applier applier(out.app, pkg, signatures);
  for (size_t i = 0; i < pkg.actions.size(); ++i) {
    const PatchAction& action = pkg.actions[i];
    ActionRecord rec;
    rec.index = i;
    rec.action = std::string(ActionName(action));
    std::string prefix = "action #" + std::to_string(i) + " (" + rec.action + "): ";
    try {
      std::visit([&](const auto& a) { applier.Run(a, rec); }, action);
    } catch (const ActionError& e) {
      throw Error(ErrorCode::kActionFailed, prefix + e.cause);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kTreeModeUnavailable) throw;
      throw Error(ErrorCode::kActionFailed, prefix + e.what());
    }
    out.log.actions.push_back(std::move(rec));
  }
  return out;
}

}  // namespace appgrease
