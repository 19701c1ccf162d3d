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
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "appgrease/bytes.h"

namespace appgrease {

inline constexpr uint32_t kNoIndex = 0xffffffff;
inline constexpr std::string_view kAndroidNamespaceUri = "http://schemas.android.com/apk/res/android";

// Chunk type codes from the Android resource format (ResourceTypes.h).
namespace chunk {
inline constexpr uint16_t kStringPool = 0x0001;
inline constexpr uint16_t kXml = 0x0003;
inline constexpr uint16_t kXmlStartNamespace = 0x0100;
inline constexpr uint16_t kXmlEndNamespace = 0x0101;
inline constexpr uint16_t kXmlStartElement = 0x0102;
inline constexpr uint16_t kXmlEndElement = 0x0103;
inline constexpr uint16_t kXmlCdata = 0x0104;
inline constexpr uint16_t kXmlResourceMap = 0x0180;
}  // namespace chunk

// Res_value data types.
enum class ValueType : uint8_t {
  kNull = 0x00,
  kReference = 0x01,
  kAttribute = 0x02,
  kString = 0x03,
  kFloat = 0x04,
  kDimension = 0x05,
  kFraction = 0x06,
  kIntDec = 0x10,
  kIntHex = 0x11,
  kBoolean = 0x12,
  kColorArgb8 = 0x1c,
  kColorRgb8 = 0x1d,
  kColorArgb4 = 0x1e,
  kColorRgb4 = 0x1f,
};

struct TypedValue {
  ValueType type = ValueType::kNull;
  uint32_t data = 0;

  static TypedValue Boolean(bool b) { return {ValueType::kBoolean, b ? 1u : 0u}; }
  static TypedValue Int(int32_t v) { return {ValueType::kIntDec, static_cast<uint32_t>(v)}; }
  static TypedValue Reference(uint32_t id) { return {ValueType::kReference, id}; }

  friend bool operator==(const TypedValue&, const TypedValue&) = default;
};

struct XmlAttribute {
  uint32_t ns = kNoIndex;
  uint32_t name = kNoIndex;
  uint32_t raw_value = kNoIndex;
  TypedValue value;

  friend bool operator==(const XmlAttribute&, const XmlAttribute&) = default;
};

struct NamespaceDecl {
  uint32_t prefix = kNoIndex;
  uint32_t uri = kNoIndex;
  uint32_t line = 0;
  uint32_t comment = kNoIndex;
  uint32_t end_line = 0;
  uint32_t end_comment = kNoIndex;

  friend bool operator==(const NamespaceDecl&, const NamespaceDecl&) = default;
};

enum class NodeKind : uint8_t { kElement, kText, kOpaque };

struct XmlNode {
  NodeKind kind = NodeKind::kElement;
  uint32_t ns = kNoIndex;
  uint32_t name = kNoIndex;
  std::vector<XmlAttribute> attributes;
  std::vector<XmlNode> children;
  std::vector<NamespaceDecl> namespaces;  // declared around this element
  uint32_t line = 0;
  uint32_t comment = kNoIndex;
  uint32_t end_line = 0;
  uint32_t end_comment = kNoIndex;
  // kText
  uint32_t text = kNoIndex;
  TypedValue text_value;
  // kOpaque: the complete chunk, header included
  Bytes opaque;

  friend bool operator==(const XmlNode&, const XmlNode&) = default;
};

struct StringPool {
  std::vector<std::string> strings;  // held as UTF-8 regardless of encoding
  bool utf8 = false;
  bool sorted = false;
  std::vector<uint32_t> style_offsets;
  Bytes style_data;

  size_t size() const { return strings.size(); }

  friend bool operator==(const StringPool&, const StringPool&) = default;
};

// Position of an element as child indices from the root, tagged with the
// document generation so structural edits invalidate outstanding handles.
struct NodeHandle {
  std::vector<size_t> path;
  uint64_t generation = 0;

  friend bool operator==(const NodeHandle&, const NodeHandle&) = default;
};

struct SelectorStep {
  std::string name;  // "*" matches any element
  std::vector<std::pair<std::string, std::string>> predicates;
};

// Slash-separated element path with [attr=value] predicates, e.g.
// "manifest/application" or "LinearLayout[id=stories_bar]". A leading '/'
// anchors the path at the root; otherwise it may start at any depth.
struct ElementSelector {
  bool anchored = false;
  std::vector<SelectorStep> steps;

  static ElementSelector Parse(std::string_view text);  // throws SelectorParseError
  std::string ToString() const;
};

// Value to store in an attribute. For string values `text` is the string;
// for other types a non-empty `text` becomes the attribute's raw value.
struct AttributeValue {
  ValueType type = ValueType::kString;
  uint32_t data = 0;
  std::string text;

  static AttributeValue String(std::string s) { return {ValueType::kString, 0, std::move(s)}; }
  static AttributeValue Typed(TypedValue v) { return {v.type, v.data, {}}; }
};

class AxmlDocument {
 public:
  StringPool pool;
  std::vector<uint32_t> resource_map;
  std::vector<Bytes> leading_chunks;
  XmlNode root;
  std::vector<Bytes> trailing_chunks;

  static AxmlDocument Parse(ByteView bytes);  // throws MalformedAxml
  Bytes Serialize() const;                    // throws MalformedAxml on dangling indices

  const std::string& String(uint32_t index) const;
  std::string_view NameOf(const XmlNode& node) const;
  std::optional<uint32_t> FindString(std::string_view s) const;

  // Returns the existing index or appends at the tail.
  uint32_t InternString(std::string_view s);
  // Index of a string that carries resource id `res_id` in the resource map.
  uint32_t InternAttributeName(std::string_view name, uint32_t res_id);

  std::vector<NodeHandle> FindElements(const ElementSelector& selector) const;
  NodeHandle RootHandle() const { return {{}, generation_}; }
  const XmlNode& Resolve(const NodeHandle& handle) const;  // throws StaleHandle

  void RemoveElement(const NodeHandle& handle);  // CannotRemoveRoot / StaleHandle
  // Adds or replaces (namespace, name); ns_uri empty means no namespace.
  // res_id == 0 leaves the attribute without a resource id.
  void SetAttribute(const NodeHandle& handle, std::string_view ns_uri, std::string_view name,
                    const AttributeValue& value, uint32_t res_id = 0);
  // Appends a child element and returns its handle.
  NodeHandle AppendElement(const NodeHandle& parent, std::string_view name);

  const XmlAttribute* FindAttribute(const XmlNode& node, std::string_view ns_uri,
                                    std::string_view name) const;
  std::string FormatValue(const XmlAttribute& attr) const;
  // Indented textual dump, one element per line.
  std::string Dump() const;

  uint64_t generation() const { return generation_; }

  // Structural equality; the handle generation is not part of it.
  friend bool operator==(const AxmlDocument& a, const AxmlDocument& b) {
    return a.pool == b.pool && a.resource_map == b.resource_map &&
           a.leading_chunks == b.leading_chunks && a.root == b.root &&
           a.trailing_chunks == b.trailing_chunks;
  }

 private:
  XmlNode& MutableResolve(const NodeHandle& handle);
  bool Matches(const XmlNode& node, const SelectorStep& step) const;

  uint64_t generation_ = 0;
};

inline AxmlDocument ParseAxml(ByteView bytes) { return AxmlDocument::Parse(bytes); }
inline Bytes SerializeAxml(const AxmlDocument& doc) { return doc.Serialize(); }

// UTF-8 <-> UTF-16 conversion used by string pools.
std::u16string Utf8ToUtf16(std::string_view s);
std::string Utf16ToUtf8(std::u16string_view s);

}  // namespace appgrease
