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

#include <filesystem>
#include <map>
#include <memory>
#include <regex>
#include <string>
#include <variant>
#include <vector>

#include "appgrease/axml.h"
#include "appgrease/decoded_app.h"
#include "appgrease/signature_list.h"
#include "appgrease/text_patch.h"

namespace appgrease {

// Name of the package manifest inside an extension archive or directory.
inline constexpr std::string_view kExtensionManifestName = "extension.json";

enum class Category { kDistraction, kPrivacy, kChildSafety, kOther };
enum class Scope { kAppAgnostic, kAppSpecific };

std::string_view CategoryName(Category c);

struct ApplicabilityRule {
  enum class Kind { kPackageEquals, kManifestHasPermission, kDexContainsString, kSignatureListHit };
  Kind kind = Kind::kPackageEquals;
  std::string argument;
};

std::string_view RuleKindName(ApplicabilityRule::Kind kind);

struct AttributeRef {
  std::string ns_uri;  // empty: no namespace
  std::string name;
  uint32_t res_id = 0;
};

struct AttributeAssignment {
  AttributeRef attribute;
  AttributeValue value;
};

struct ManifestEdit {
  ElementSelector selector;
  AttributeAssignment set;
};

struct ManifestInsertElement {
  ElementSelector parent;
  std::string element;
  std::vector<AttributeAssignment> attributes;
};

struct AxmlRemoveElement {
  std::string entry;
  ElementSelector selector;
};

struct AxmlSetAttribute {
  std::string entry;
  ElementSelector selector;
  AttributeAssignment set;
};

enum class ReplacementPolicy { kBillingBlank, kHostnameBlank, kLiteralSameLength };

struct DexStringReplace {
  std::string pattern;            // literal substring
  bool use_signature_list = false;  // take every hostname pattern from the signature list
  ReplacementPolicy policy = ReplacementPolicy::kBillingBlank;
  std::string replacement;        // kLiteralSameLength only
};

struct NetworkSecurityConfigInject {};

struct FileAdd {
  std::string entry;
  Bytes data;
  CompressionMethod method = CompressionMethod::kDeflate;
};

struct FileTextPatch {
  std::string glob;
  std::string find;
  std::string replace;
  std::shared_ptr<const std::regex> regex;  // compiled at load
};

struct FileDiffPatch {
  std::string path;
  UnifiedDiff diff;
};

using PatchAction = std::variant<ManifestEdit, ManifestInsertElement, AxmlRemoveElement,
                                 AxmlSetAttribute, DexStringReplace, NetworkSecurityConfigInject,
                                 FileAdd, FileTextPatch, FileDiffPatch>;

std::string_view ActionName(const PatchAction& action);

struct ExtensionPackage {
  std::string id;  // reverse-domain
  std::string name;
  std::string description;
  Category category = Category::kOther;
  Scope scope = Scope::kAppAgnostic;
  std::vector<ApplicabilityRule> applicability;
  std::vector<PatchAction> actions;

  // Last dotted component of the id, e.g. "disable-billing".
  std::string ShortName() const;
};

// `payload` maps archive-relative paths to file contents; the manifest is
// `extension.json`. Throws InvalidManifest, UnknownActionVariant,
// SelectorParseError.
ExtensionPackage ParseExtension(std::string_view manifest_json,
                                const std::map<std::string, Bytes>& payload);
// A ZIP archive holding extension.json plus payload files.
ExtensionPackage LoadExtension(ByteView package_bytes);
// The same layout, unpacked in a directory.
ExtensionPackage LoadExtensionDir(const std::filesystem::path& dir);

struct RuleEvaluation {
  ApplicabilityRule rule;
  bool satisfied = false;
  std::string detail;
};

struct ApplicabilityReport {
  bool applicable = true;
  std::vector<RuleEvaluation> rules;
  std::vector<DetectionHit> hits;
};

ApplicabilityReport CheckApplicability(const ExtensionPackage& pkg, const AxmlDocument& manifest,
                                       const std::map<std::string, DexImage>& dexes,
                                       const SignatureList& signatures);

// Every signature hit across all bytecode entries, ordered by (path, index).
std::vector<DetectionHit> DetectTrackers(const DecodedApp& app, const SignatureList& signatures);

struct ActionRecord {
  size_t index = 0;
  std::string action;
  int changes = 0;
  std::vector<std::string> warnings;
};

struct ActionLog {
  std::string extension_id;
  std::vector<ActionRecord> actions;

  int total_changes() const;
  std::vector<std::string> warnings() const;
};

struct ApplyOutcome {
  DecodedApp app;
  ActionLog log;
};

// Applies actions in order to a copy of `app`. On any failure nothing is
// returned and `app` is untouched. Throws ActionFailed (message carries the
// action index and cause) or TreeModeUnavailable.
ApplyOutcome ApplyExtension(const DecodedApp& app, const ExtensionPackage& pkg,
                            const SignatureList& signatures);

// Trusts user-installed CAs and strips certificate pins. Returns the number
// of changes made (0 when already in place).
int InjectNetworkSecurityConfig(DecodedApp& app);

// Well-known framework attribute ids (android.R.attr).
uint32_t AndroidAttributeId(std::string_view name);

}  // namespace appgrease
