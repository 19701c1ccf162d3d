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

#include <algorithm>
#include <cerrno>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iterator>

#include "json.hpp"

#include "appgrease/error.h"

namespace appgrease {

using nlohmann::json;

namespace {

[[noreturn]] void Invalid(const std::string& why) {
  throw Error(ErrorCode::kInvalidManifest, why);
}

const json& Require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) Invalid(where + ": missing \"" + key + "\"");
  return *it;
}

std::string RequireString(const json& obj, const char* key, const std::string& where) {
  const json& v = Require(obj, key, where);
  if (!v.is_string()) Invalid(where + ": \"" + key + "\" must be a string");
  std::string s = v.get<std::string>();
  if (s.empty()) Invalid(where + ": \"" + key + "\" is empty");
  return s;
}

std::string OptionalString(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return {};
  if (!it->is_string()) Invalid(where + ": \"" + key + "\" must be a string");
  return it->get<std::string>();
}

bool ValidExtensionId(std::string_view id) {
  if (id.find('.') == std::string_view::npos) return false;
  size_t seg_len = 0;
  for (char c : id) {
    if (c == '.') {
      if (seg_len == 0) return false;
      seg_len = 0;
      continue;
    }
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
              c == '-' || c == '_';
    if (!ok) return false;
    ++seg_len;
  }
  return seg_len > 0;
}

uint32_t ParseUnsigned(const json& v, const std::string& where) {
  if (v.is_number_unsigned()) {
    uint64_t n = v.get<uint64_t>();
    if (n > 0xffffffffu) Invalid(where + ": value out of range");
    return static_cast<uint32_t>(n);
  }
  if (v.is_number_integer()) {
    int64_t n = v.get<int64_t>();
    if (n < INT32_MIN || n > 0xffffffffLL) Invalid(where + ": value out of range");
    return static_cast<uint32_t>(n);
  }
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    std::string_view body = s;
    int base = 10;
    if (!body.empty() && (body[0] == '@' || body[0] == '#')) {
      body.remove_prefix(1);
      base = 16;
    }
    if (body.size() > 2 && body[0] == '0' && (body[1] == 'x' || body[1] == 'X')) {
      body.remove_prefix(2);
      base = 16;
    }
    std::string digits(body);
    char* end = nullptr;
    errno = 0;
    long long n = std::strtoll(digits.c_str(), &end, base);
    if (digits.empty() || *end != '\0' || errno != 0 || n < INT32_MIN || n > 0xffffffffLL) {
      Invalid(where + ": cannot parse number '" + s + "'");
    }
    return static_cast<uint32_t>(n);
  }
  Invalid(where + ": expected a number");
}

AttributeValue ParseValue(const json& v, const std::string& where) {
  if (v.is_string()) return AttributeValue::String(v.get<std::string>());
  if (v.is_boolean()) return AttributeValue::Typed(TypedValue::Boolean(v.get<bool>()));
  if (v.is_number_integer()) return AttributeValue::Typed({ValueType::kIntDec, ParseUnsigned(v, where)});
  if (!v.is_object()) Invalid(where + ": value must be a string, bool, number or object");
  std::string type = RequireString(v, "type", where + ".value");
  const json& data = Require(v, "data", where + ".value");
  if (type == "string") {
    if (!data.is_string()) Invalid(where + ": string value needs string data");
    return AttributeValue::String(data.get<std::string>());
  }
  if (type == "bool") {
    if (data.is_boolean()) return AttributeValue::Typed(TypedValue::Boolean(data.get<bool>()));
    if (data == "true" || data == "false") {
      return AttributeValue::Typed(TypedValue::Boolean(data == "true"));
    }
    Invalid(where + ": bool value needs true or false");
  }
  if (type == "int") return AttributeValue::Typed({ValueType::kIntDec, ParseUnsigned(data, where)});
  if (type == "hex") return AttributeValue::Typed({ValueType::kIntHex, ParseUnsigned(data, where)});
  if (type == "ref") return AttributeValue::Typed({ValueType::kReference, ParseUnsigned(data, where)});
  if (type == "color") {
    return AttributeValue::Typed({ValueType::kColorArgb8, ParseUnsigned(data, where)});
  }
  Invalid(where + ": unknown value type '" + type + "'");
}

std::string ResolveNamespace(std::string ns) {
  if (ns == "android") return std::string(kAndroidNamespaceUri);
  return ns;
}

AttributeRef ParseAttributeRef(const json& v, const std::string& where) {
  AttributeRef ref;
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    size_t colon = s.find(':');
    if (colon != std::string::npos && s.substr(0, colon) == "android") {
      ref.ns_uri = std::string(kAndroidNamespaceUri);
      ref.name = s.substr(colon + 1);
    } else {
      ref.name = s;
    }
  } else if (v.is_object()) {
    ref.ns_uri = ResolveNamespace(OptionalString(v, "namespace", where));
    ref.name = RequireString(v, "name", where + ".attribute");
    auto id = v.find("resource_id");
    if (id != v.end()) ref.res_id = ParseUnsigned(*id, where + ".resource_id");
  } else {
    Invalid(where + ": attribute must be a string or object");
  }
  if (ref.name.empty()) Invalid(where + ": attribute name is empty");
  if (ref.res_id == 0 && ref.ns_uri == kAndroidNamespaceUri) {
    ref.res_id = AndroidAttributeId(ref.name);
  }
  return ref;
}

AttributeAssignment ParseAssignment(const json& obj, const std::string& where) {
  AttributeAssignment a;
  a.attribute = ParseAttributeRef(Require(obj, "attribute", where), where);
  a.value = ParseValue(Require(obj, "value", where), where);
  return a;
}

ElementSelector ParseSelector(const json& obj, const char* key, const std::string& where) {
  return ElementSelector::Parse(RequireString(obj, key, where));
}

const Bytes& Payload(const std::map<std::string, Bytes>& payload, const std::string& path,
                     const std::string& where) {
  auto it = payload.find(path);
  if (it == payload.end()) Invalid(where + ": payload file '" + path + "' not in package");
  return it->second;
}

PatchAction ParseAction(const json& obj, const std::map<std::string, Bytes>& payload,
                        const std::string& where) {
  if (!obj.is_object()) Invalid(where + ": action must be an object");
  auto type_it = obj.find("type");
  if (type_it == obj.end() || !type_it->is_string()) Invalid(where + ": action has no type");
  std::string type = type_it->get<std::string>();

  if (type == "ManifestEdit") {
    ManifestEdit a;
    a.selector = ParseSelector(obj, "selector", where);
    a.set = ParseAssignment(obj, where);
    return a;
  }
  if (type == "ManifestInsertElement") {
    ManifestInsertElement a;
    a.parent = ParseSelector(obj, "parent", where);
    a.element = RequireString(obj, "element", where);
    auto attrs = obj.find("attributes");
    if (attrs != obj.end()) {
      if (!attrs->is_array()) Invalid(where + ": attributes must be an array");
      for (const json& item : *attrs) a.attributes.push_back(ParseAssignment(item, where));
    }
    return a;
  }
  if (type == "AxmlRemoveElement") {
    AxmlRemoveElement a;
    a.entry = RequireString(obj, "entry", where);
    a.selector = ParseSelector(obj, "selector", where);
    return a;
  }
  if (type == "AxmlSetAttribute") {
    AxmlSetAttribute a;
    a.entry = RequireString(obj, "entry", where);
    a.selector = ParseSelector(obj, "selector", where);
    a.set = ParseAssignment(obj, where);
    return a;
  }
  if (type == "DexStringReplace") {
    DexStringReplace a;
    a.pattern = OptionalString(obj, "pattern", where);
    auto sl = obj.find("signature_list");
    if (sl != obj.end()) {
      if (!sl->is_boolean()) Invalid(where + ": signature_list must be a bool");
      a.use_signature_list = sl->get<bool>();
    }
    if (a.pattern.empty() == !a.use_signature_list) {
      Invalid(where + ": give exactly one of pattern or signature_list");
    }
    std::string policy = RequireString(obj, "policy", where);
    if (policy == "billing-blank") {
      a.policy = ReplacementPolicy::kBillingBlank;
    } else if (policy == "hostname-blank") {
      a.policy = ReplacementPolicy::kHostnameBlank;
    } else if (policy == "literal-same-length") {
      a.policy = ReplacementPolicy::kLiteralSameLength;
      a.replacement = RequireString(obj, "replacement", where);
      if (a.use_signature_list || a.replacement.size() != a.pattern.size()) {
        Invalid(where + ": literal replacement must match the pattern length");
      }
    } else {
      Invalid(where + ": unknown policy '" + policy + "'");
    }
    return a;
  }
  if (type == "NetworkSecurityConfigInject") return NetworkSecurityConfigInject{};
  if (type == "FileAdd") {
    FileAdd a;
    a.entry = RequireString(obj, "entry", where);
    a.data = Payload(payload, RequireString(obj, "source", where), where);
    std::string method = OptionalString(obj, "compression", where);
    if (method.empty() || method == "deflate") {
      a.method = CompressionMethod::kDeflate;
    } else if (method == "stored") {
      a.method = CompressionMethod::kStored;
    } else {
      Invalid(where + ": unknown compression '" + method + "'");
    }
    return a;
  }
  if (type == "FileTextPatch") {
    FileTextPatch a;
    a.glob = RequireString(obj, "glob", where);
    a.find = RequireString(obj, "find", where);
    a.replace = OptionalString(obj, "replace", where);
    try {
      a.regex = std::make_shared<const std::regex>(a.find, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
      throw Error(ErrorCode::kSelectorParseError, where + ": bad regex '" + a.find + "': " + e.what());
    }
    return a;
  }
  if (type == "FileDiffPatch") {
    FileDiffPatch a;
    a.path = RequireString(obj, "path", where);
    std::string inline_diff = OptionalString(obj, "diff_text", where);
    if (inline_diff.empty()) {
      inline_diff = ToString(Payload(payload, RequireString(obj, "diff", where), where));
    }
    a.diff = UnifiedDiff::Parse(inline_diff);
    return a;
  }
  throw Error(ErrorCode::kUnknownActionVariant, where + ": unknown action type '" + type + "'");
}

ApplicabilityRule ParseRule(const json& obj, const std::string& where) {
  if (!obj.is_object()) Invalid(where + ": rule must be an object");
  std::string kind = RequireString(obj, "kind", where);
  ApplicabilityRule rule;
  if (kind == "package-equals") {
    rule.kind = ApplicabilityRule::Kind::kPackageEquals;
  } else if (kind == "manifest-has-permission") {
    rule.kind = ApplicabilityRule::Kind::kManifestHasPermission;
  } else if (kind == "dex-contains-string") {
    rule.kind = ApplicabilityRule::Kind::kDexContainsString;
  } else if (kind == "signature-list-hit") {
    rule.kind = ApplicabilityRule::Kind::kSignatureListHit;
  } else {
    Invalid(where + ": unknown rule kind '" + kind + "'");
  }
  rule.argument = OptionalString(obj, "argument", where);
  if (rule.argument.empty() && rule.kind != ApplicabilityRule::Kind::kSignatureListHit) {
    Invalid(where + ": rule '" + kind + "' needs an argument");
  }
  return rule;
}

bool HasPermission(const ManifestInfo& info, std::string_view wanted) {
  for (const std::string& p : info.permissions) {
    if (p == wanted) return true;
    if (p.size() > wanted.size() && p.compare(p.size() - wanted.size(), wanted.size(), wanted) == 0 &&
        p[p.size() - wanted.size() - 1] == '.') {
      return true;
    }
  }
  return false;
}

}  // namespace

std::string_view CategoryName(Category c) {
  switch (c) {
    case Category::kDistraction: return "distraction";
    case Category::kPrivacy: return "privacy";
    case Category::kChildSafety: return "child-safety";
    case Category::kOther: return "other";
  }
  return "other";
}

std::string_view RuleKindName(ApplicabilityRule::Kind kind) {
  switch (kind) {
    case ApplicabilityRule::Kind::kPackageEquals: return "package-equals";
    case ApplicabilityRule::Kind::kManifestHasPermission: return "manifest-has-permission";
    case ApplicabilityRule::Kind::kDexContainsString: return "dex-contains-string";
    case ApplicabilityRule::Kind::kSignatureListHit: return "signature-list-hit";
  }
  return "";
}

std::string_view ActionName(const PatchAction& action) {
  static constexpr std::string_view kNames[] = {
      "ManifestEdit",     "ManifestInsertElement",       "AxmlRemoveElement",
      "AxmlSetAttribute", "DexStringReplace",            "NetworkSecurityConfigInject",
      "FileAdd",          "FileTextPatch",               "FileDiffPatch"};
  return kNames[action.index()];
}

std::string ExtensionPackage::ShortName() const {
  size_t dot = id.rfind('.');
  return dot == std::string::npos ? id : id.substr(dot + 1);
}

uint32_t AndroidAttributeId(std::string_view name) {
  static const std::pair<std::string_view, uint32_t> kIds[] = {
      {"name", 0x01010003},
      {"enabled", 0x0101000e},
      {"debuggable", 0x0101000f},
      {"value", 0x01010024},
      {"id", 0x010100d0},
      {"background", 0x010100d4},
      {"visibility", 0x010100dc},
      {"versionCode", 0x0101021b},
      {"versionName", 0x0101021c},
      {"usesCleartextTraffic", 0x010104ec},
      {"networkSecurityConfig", 0x01010527},
  };
  for (const auto& [n, id] : kIds) {
    if (n == name) return id;
  }
  return 0;
}

ExtensionPackage ParseExtension(std::string_view manifest_json,
                                const std::map<std::string, Bytes>& payload) {
  json doc;
  try {
    doc = json::parse(manifest_json);
  } catch (const json::parse_error& e) {
    Invalid(std::string("extension.json is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) Invalid("extension.json must hold an object");

  ExtensionPackage pkg;
  pkg.id = RequireString(doc, "id", "extension");
  if (!ValidExtensionId(pkg.id)) Invalid("extension id '" + pkg.id + "' is not reverse-domain");
  std::string where = pkg.id;
  pkg.name = RequireString(doc, "name", where);
  pkg.description = OptionalString(doc, "description", where);

  std::string category = RequireString(doc, "category", where);
  if (category == "distraction") {
    pkg.category = Category::kDistraction;
  } else if (category == "privacy") {
    pkg.category = Category::kPrivacy;
  } else if (category == "child-safety") {
    pkg.category = Category::kChildSafety;
  } else if (category == "other") {
    pkg.category = Category::kOther;
  } else {
    Invalid(where + ": unknown category '" + category + "'");
  }

  std::string scope = OptionalString(doc, "scope", where);
  std::string scoped_package;
  if (scope.empty() || scope == "app-agnostic") {
    pkg.scope = Scope::kAppAgnostic;
  } else if (scope == "app-specific") {
    pkg.scope = Scope::kAppSpecific;
    scoped_package = RequireString(doc, "package", where);
  } else {
    Invalid(where + ": unknown scope '" + scope + "'");
  }

  auto rules = doc.find("applicability");
  if (rules != doc.end()) {
    if (!rules->is_array()) Invalid(where + ": applicability must be an array");
    for (size_t i = 0; i < rules->size(); ++i) {
      pkg.applicability.push_back(
          ParseRule((*rules)[i], where + ".applicability[" + std::to_string(i) + "]"));
    }
  }
  if (pkg.scope == Scope::kAppSpecific) {
    bool present = std::any_of(pkg.applicability.begin(), pkg.applicability.end(),
                               [&](const ApplicabilityRule& r) {
                                 return r.kind == ApplicabilityRule::Kind::kPackageEquals &&
                                        r.argument == scoped_package;
                               });
    if (!present) {
      pkg.applicability.insert(pkg.applicability.begin(),
                               {ApplicabilityRule::Kind::kPackageEquals, scoped_package});
    }
  }

  const json& actions = Require(doc, "actions", where);
  if (!actions.is_array() || actions.empty()) Invalid(where + ": actions must be a non-empty array");
  for (size_t i = 0; i < actions.size(); ++i) {
    pkg.actions.push_back(
        ParseAction(actions[i], payload, where + ".actions[" + std::to_string(i) + "]"));
  }
  return pkg;
}

ExtensionPackage LoadExtension(ByteView package_bytes) {
  ApkArchive archive;
  try {
    archive = ApkArchive::Open(package_bytes);
  } catch (const Error& e) {
    Invalid(std::string("extension package is not a readable archive: ") + e.what());
  }
  std::map<std::string, Bytes> payload;
  for (const ZipEntry& entry : archive.entries()) payload[entry.name] = entry.data;
  auto manifest = payload.find(std::string(kExtensionManifestName));
  if (manifest == payload.end()) Invalid("extension package has no extension.json");
  return ParseExtension(ToString(manifest->second), payload);
}

ExtensionPackage LoadExtensionDir(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::map<std::string, Bytes> payload;
  std::error_code ec;
  for (fs::recursive_directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
    if (!it->is_regular_file()) continue;
    std::ifstream in(it->path(), std::ios::binary);
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    payload[fs::relative(it->path(), dir).generic_string()] = std::move(data);
  }
  if (ec) throw Error(ErrorCode::kIo, "cannot read " + dir.string() + ": " + ec.message());
  auto manifest = payload.find(std::string(kExtensionManifestName));
  if (manifest == payload.end()) Invalid(dir.string() + " has no extension.json");
  return ParseExtension(ToString(manifest->second), payload);
}

std::vector<DetectionHit> DetectTrackers(const DecodedApp& app, const SignatureList& signatures) {
  std::vector<DetectionHit> hits;
  for (const auto& [path, dex] : app.dexes) {
    std::vector<DetectionHit> found = ScanSignatures(dex, signatures, path);
    hits.insert(hits.end(), found.begin(), found.end());
  }
  std::stable_sort(hits.begin(), hits.end(), [](const DetectionHit& a, const DetectionHit& b) {
    if (a.dex_path != b.dex_path) return a.dex_path < b.dex_path;
    return a.string_index < b.string_index;
  });
  return hits;
}

ApplicabilityReport CheckApplicability(const ExtensionPackage& pkg, const AxmlDocument& manifest,
                                       const std::map<std::string, DexImage>& dexes,
                                       const SignatureList& signatures) {
  ApplicabilityReport report;
  ManifestInfo info = ReadManifestInfo(manifest);
  for (const ApplicabilityRule& rule : pkg.applicability) {
    RuleEvaluation eval{rule, false, {}};
    switch (rule.kind) {
      case ApplicabilityRule::Kind::kPackageEquals:
        eval.satisfied = info.package == rule.argument;
        eval.detail = "package is " + info.package;
        break;
      case ApplicabilityRule::Kind::kManifestHasPermission:
        eval.satisfied = HasPermission(info, rule.argument);
        eval.detail = eval.satisfied ? "permission declared" : "permission not declared";
        break;
      case ApplicabilityRule::Kind::kDexContainsString: {
        size_t count = 0;
        for (const auto& [path, dex] : dexes) count += dex.FindStrings(rule.argument).size();
        eval.satisfied = count > 0;
        eval.detail = std::to_string(count) + " matching strings";
        break;
      }
      case ApplicabilityRule::Kind::kSignatureListHit: {
        bool any = rule.argument.empty() || rule.argument == "*" || rule.argument == "default";
        size_t count = 0;
        for (const auto& [path, dex] : dexes) {
          for (DetectionHit& hit : ScanSignatures(dex, signatures, path)) {
            if (!any && hit.tracker != rule.argument) continue;
            ++count;
            report.hits.push_back(std::move(hit));
          }
        }
        eval.satisfied = count > 0;
        eval.detail = std::to_string(count) + " signature hits";
        break;
      }
    }
    report.applicable = report.applicable && eval.satisfied;
    report.rules.push_back(std::move(eval));
  }
  return report;
}

}  // namespace appgrease
