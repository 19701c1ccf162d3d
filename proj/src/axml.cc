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

#include "appgrease/axml.h"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <functional>

namespace appgrease {
namespace {

constexpr uint32_t kSortedFlag = 1 << 0;
constexpr uint32_t kUtf8Flag = 1 << 8;
constexpr uint16_t kStringPoolHeaderSize = 28;
constexpr uint16_t kTreeNodeHeaderSize = 16;
constexpr uint16_t kAttributeSize = 20;

[[noreturn]] void Malformed(const std::string& what) {
  throw Error(ErrorCode::kMalformedAxml, what);
}

struct ChunkHeader {
  uint16_t type;
  uint16_t header_size;
  uint32_t size;
};

ChunkHeader ReadChunkHeader(ByteView bytes, size_t pos, size_t limit) {
  if (limit < pos || limit - pos < 8) Malformed("truncated chunk header at " + std::to_string(pos));
  ChunkHeader h{LoadLe16(&bytes[pos]), LoadLe16(&bytes[pos + 2]), LoadLe32(&bytes[pos + 4])};
  if (h.header_size < 8 || h.size < h.header_size || h.size > limit - pos) {
    Malformed("bad chunk bounds at " + std::to_string(pos));
  }
  return h;
}

size_t DecodeLength8(ByteReader& r) {
  size_t len = r.U8();
  if (len & 0x80) len = ((len & 0x7f) << 8) | r.U8();
  return len;
}

size_t DecodeLength16(ByteReader& r) {
  size_t len = r.U16();
  if (len & 0x8000) len = ((len & 0x7fff) << 16) | r.U16();
  return len;
}

StringPool ParseStringPool(ByteView chunk, uint16_t header_size) {
  if (header_size < kStringPoolHeaderSize) Malformed("string pool header too small");
  StringPool pool;
  uint32_t string_count = LoadLe32(&chunk[8]);
  uint32_t style_count = LoadLe32(&chunk[12]);
  uint32_t flags = LoadLe32(&chunk[16]);
  uint32_t strings_start = LoadLe32(&chunk[20]);
  uint32_t styles_start = LoadLe32(&chunk[24]);
  pool.utf8 = (flags & kUtf8Flag) != 0;
  pool.sorted = (flags & kSortedFlag) != 0;

  ByteReader offsets(chunk, ErrorCode::kMalformedAxml);
  offsets.Seek(header_size);
  size_t strings_end = style_count > 0 ? styles_start : chunk.size();
  if (string_count > 0 && (strings_start > strings_end || strings_end > chunk.size())) {
    Malformed("string data out of chunk bounds");
  }
  pool.strings.reserve(string_count);
  for (uint32_t i = 0; i < string_count; ++i) {
    uint32_t off = offsets.U32();
    if (static_cast<uint64_t>(strings_start) + off >= strings_end) {
      Malformed("string offset out of range");
    }
    ByteReader s(chunk.first(strings_end), ErrorCode::kMalformedAxml);
    s.Seek(strings_start + off);
    if (pool.utf8) {
      DecodeLength8(s);  // UTF-16 length, recomputed on write
      size_t n = DecodeLength8(s);
      pool.strings.push_back(ToString(s.Take(n)));
    } else {
      size_t n = DecodeLength16(s);
      std::u16string u(n, u'\0');
      for (size_t k = 0; k < n; ++k) u[k] = s.U16();
      pool.strings.push_back(Utf16ToUtf8(u));
    }
  }
  for (uint32_t i = 0; i < style_count; ++i) pool.style_offsets.push_back(offsets.U32());
  if (style_count > 0) {
    if (styles_start > chunk.size()) Malformed("style data out of range");
    pool.style_data.assign(chunk.begin() + styles_start, chunk.end());
  }
  return pool;
}

void EncodeLength8(ByteWriter& w, size_t len) {
  if (len > 0x7fff) Malformed("string too long for UTF-8 pool");
  if (len > 0x7f) w.U8(static_cast<uint8_t>((len >> 8) | 0x80));
  w.U8(static_cast<uint8_t>(len & 0xff));
}

void EncodeLength16(ByteWriter& w, size_t len) {
  if (len > 0x7fffffff) Malformed("string too long for UTF-16 pool");
  if (len > 0x7fff) w.U16(static_cast<uint16_t>((len >> 16) | 0x8000));
  w.U16(static_cast<uint16_t>(len & 0xffff));
}

void WriteStringPool(ByteWriter& out, const StringPool& pool) {
  ByteWriter data;
  std::vector<uint32_t> offsets;
  offsets.reserve(pool.size());
  for (const std::string& s : pool.strings) {
    offsets.push_back(static_cast<uint32_t>(data.size()));
    std::u16string u = Utf8ToUtf16(s);
    if (pool.utf8) {
      EncodeLength8(data, u.size());
      EncodeLength8(data, s.size());
      data.Append(s);
      data.U8(0);
    } else {
      EncodeLength16(data, u.size());
      for (char16_t c : u) data.U16(c);
      data.U16(0);
    }
  }
  data.AlignTo(4);

  uint32_t style_count = static_cast<uint32_t>(pool.style_offsets.size());
  uint32_t strings_start = kStringPoolHeaderSize + 4 * (static_cast<uint32_t>(pool.size()) + style_count);
  uint32_t styles_start = style_count > 0 ? strings_start + static_cast<uint32_t>(data.size()) : 0;
  uint32_t total = strings_start + static_cast<uint32_t>(data.size()) +
                   static_cast<uint32_t>(pool.style_data.size());
  uint32_t flags = (pool.utf8 ? kUtf8Flag : 0) | (pool.sorted ? kSortedFlag : 0);

  out.U16(chunk::kStringPool);
  out.U16(kStringPoolHeaderSize);
  out.U32(total);
  out.U32(static_cast<uint32_t>(pool.size()));
  out.U32(style_count);
  out.U32(flags);
  out.U32(pool.size() > 0 ? strings_start : 0);
  out.U32(styles_start);
  for (uint32_t o : offsets) out.U32(o);
  for (uint32_t o : pool.style_offsets) out.U32(o);
  out.Append(data.bytes());
  out.Append(pool.style_data);
}

TypedValue ReadTypedValue(ByteReader& r) {
  r.U16();  // size
  r.U8();   // res0
  TypedValue v;
  v.type = static_cast<ValueType>(r.U8());
  v.data = r.U32();
  return v;
}

void WriteTypedValue(ByteWriter& w, const TypedValue& v) {
  w.U16(8);
  w.U8(0);
  w.U8(static_cast<uint8_t>(v.type));
  w.U32(v.data);
}

void CheckIndex(const StringPool& pool, uint32_t index, bool optional, const char* what) {
  if (index == kNoIndex && optional) return;
  if (index >= pool.size()) {
    Malformed(std::string("dangling string index for ") + what + ": " + std::to_string(index));
  }
}

void CheckNode(const StringPool& pool, const XmlNode& node) {
  switch (node.kind) {
    case NodeKind::kOpaque:
      return;
    case NodeKind::kText:
      CheckIndex(pool, node.text, true, "text");
      CheckIndex(pool, node.comment, true, "comment");
      if (node.text_value.type == ValueType::kString) {
        CheckIndex(pool, node.text_value.data, false, "text value");
      }
      return;
    case NodeKind::kElement:
      break;
  }
  CheckIndex(pool, node.name, false, "element name");
  CheckIndex(pool, node.ns, true, "element namespace");
  CheckIndex(pool, node.comment, true, "comment");
  CheckIndex(pool, node.end_comment, true, "comment");
  for (const NamespaceDecl& ns : node.namespaces) {
    CheckIndex(pool, ns.prefix, true, "namespace prefix");
    CheckIndex(pool, ns.uri, false, "namespace uri");
    CheckIndex(pool, ns.comment, true, "comment");
    CheckIndex(pool, ns.end_comment, true, "comment");
  }
  for (const XmlAttribute& a : node.attributes) {
    CheckIndex(pool, a.name, false, "attribute name");
    CheckIndex(pool, a.ns, true, "attribute namespace");
    CheckIndex(pool, a.raw_value, true, "attribute raw value");
    if (a.value.type == ValueType::kString) {
      CheckIndex(pool, a.value.data, false, "attribute string value");
    }
  }
  for (const XmlNode& child : node.children) CheckNode(pool, child);
}

void WriteNodeHeader(ByteWriter& w, uint16_t type, uint32_t size, uint32_t line, uint32_t comment) {
  w.U16(type);
  w.U16(kTreeNodeHeaderSize);
  w.U32(size);
  w.U32(line);
  w.U32(comment);
}

std::string FormatHex(const char* fmt, uint32_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

}  // namespace

std::u16string Utf8ToUtf16(std::string_view s) {
  std::u16string out;
  out.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) {
    uint8_t c = static_cast<uint8_t>(s[i]);
    uint32_t cp = c;
    size_t extra = 0;
    if (c >= 0xf0 && c < 0xf8) {
      cp = c & 0x07;
      extra = 3;
    } else if (c >= 0xe0) {
      cp = c & 0x0f;
      extra = 2;
    } else if (c >= 0xc0) {
      cp = c & 0x1f;
      extra = 1;
    }
    bool ok = i + extra < s.size() || extra == 0;
    for (size_t k = 1; ok && k <= extra; ++k) {
      uint8_t cc = static_cast<uint8_t>(s[i + k]);
      if ((cc & 0xc0) != 0x80) ok = false;
      cp = (cp << 6) | (cc & 0x3f);
    }
    if (!ok || (extra == 0 && c >= 0x80)) {
      out.push_back(static_cast<char16_t>(c));  // pass stray bytes through
      i += 1;
      continue;
    }
    i += extra + 1;
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

std::string Utf16ToUtf8(std::u16string_view s) {
  std::string out;
  out.reserve(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    uint32_t cp = s[i];
    if (cp >= 0xd800 && cp < 0xdc00 && i + 1 < s.size() && s[i + 1] >= 0xdc00 &&
        s[i + 1] < 0xe000) {
      cp = 0x10000 + ((cp - 0xd800) << 10) + (s[i + 1] - 0xdc00);
      ++i;
    }
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
      out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
  }
  return out;
}

AxmlDocument AxmlDocument::Parse(ByteView bytes) {
  if (bytes.size() < 8) Malformed("input too small");
  if (LoadLe16(&bytes[0]) != chunk::kXml) Malformed("missing binary XML chunk marker");
  ChunkHeader top = ReadChunkHeader(bytes, 0, bytes.size());

  AxmlDocument doc;
  bool have_pool = false;
  bool root_done = false;
  std::vector<XmlNode> stack;
  std::vector<NamespaceDecl> pending_ns;
  std::vector<NamespaceDecl>* closing_ns = nullptr;  // decls awaiting END_NAMESPACE
  size_t closing_remaining = 0;

  size_t pos = top.header_size;
  const size_t end = top.size;
  while (pos < end) {
    ChunkHeader h = ReadChunkHeader(bytes, pos, end);
    ByteView chunk_bytes = bytes.subspan(pos, h.size);
    ByteReader r(chunk_bytes, ErrorCode::kMalformedAxml);
    pos += h.size;

    if (closing_remaining > 0 && h.type != chunk::kXmlEndNamespace) {
      Malformed("missing end of namespace");
    }

    auto read_node_header = [&](XmlNode& node) {
      if (h.header_size < kTreeNodeHeaderSize) Malformed("tree node header too small");
      r.Seek(8);
      node.line = r.U32();
      node.comment = r.U32();
      r.Seek(h.header_size);
    };

    switch (h.type) {
      case chunk::kStringPool: {
        if (have_pool) Malformed("duplicate string pool");
        doc.pool = ParseStringPool(chunk_bytes, h.header_size);
        have_pool = true;
        break;
      }
      case chunk::kXmlResourceMap: {
        r.Seek(h.header_size);
        size_t count = (h.size - h.header_size) / 4;
        doc.resource_map.resize(count);
        for (size_t i = 0; i < count; ++i) doc.resource_map[i] = r.U32();
        break;
      }
      case chunk::kXmlStartNamespace: {
        XmlNode tmp;
        read_node_header(tmp);
        NamespaceDecl ns;
        ns.line = tmp.line;
        ns.comment = tmp.comment;
        ns.prefix = r.U32();
        ns.uri = r.U32();
        pending_ns.push_back(ns);
        break;
      }
      case chunk::kXmlEndNamespace: {
        XmlNode tmp;
        read_node_header(tmp);
        uint32_t prefix = r.U32();
        uint32_t uri = r.U32();
        if (closing_remaining == 0) Malformed("unbalanced end of namespace");
        NamespaceDecl& ns = (*closing_ns)[closing_remaining - 1];
        if (ns.prefix != prefix || ns.uri != uri) Malformed("mismatched end of namespace");
        ns.end_line = tmp.line;
        ns.end_comment = tmp.comment;
        --closing_remaining;
        break;
      }
      case chunk::kXmlStartElement: {
        if (root_done) Malformed("multiple root elements");
        XmlNode node;
        read_node_header(node);
        size_t ext = r.pos();
        node.ns = r.U32();
        node.name = r.U32();
        uint16_t attr_start = r.U16();
        uint16_t attr_size = r.U16();
        uint16_t attr_count = r.U16();
        if (attr_count > 0 && attr_size < kAttributeSize) Malformed("attribute size too small");
        for (uint16_t i = 0; i < attr_count; ++i) {
          r.Seek(ext + attr_start + static_cast<size_t>(i) * attr_size);
          XmlAttribute a;
          a.ns = r.U32();
          a.name = r.U32();
          a.raw_value = r.U32();
          a.value = ReadTypedValue(r);
          node.attributes.push_back(a);
        }
        node.namespaces = std::move(pending_ns);
        pending_ns.clear();
        stack.push_back(std::move(node));
        break;
      }
      case chunk::kXmlEndElement: {
        if (stack.empty()) Malformed("end element without start");
        XmlNode tmp;
        read_node_header(tmp);
        uint32_t ns = r.U32();
        uint32_t name = r.U32();
        XmlNode node = std::move(stack.back());
        stack.pop_back();
        if (node.ns != ns || node.name != name) Malformed("mismatched end element");
        node.end_line = tmp.line;
        node.end_comment = tmp.comment;
        XmlNode* placed;
        if (stack.empty()) {
          doc.root = std::move(node);
          root_done = true;
          placed = &doc.root;
        } else {
          stack.back().children.push_back(std::move(node));
          placed = &stack.back().children.back();
        }
        closing_ns = &placed->namespaces;
        closing_remaining = placed->namespaces.size();
        break;
      }
      case chunk::kXmlCdata: {
        if (stack.empty()) Malformed("text outside of root element");
        XmlNode node;
        node.kind = NodeKind::kText;
        read_node_header(node);
        node.text = r.U32();
        node.text_value = ReadTypedValue(r);
        stack.back().children.push_back(std::move(node));
        break;
      }
      default: {
        Bytes raw(chunk_bytes.begin(), chunk_bytes.end());
        if (!stack.empty()) {
          XmlNode node;
          node.kind = NodeKind::kOpaque;
          node.opaque = std::move(raw);
          stack.back().children.push_back(std::move(node));
        } else if (root_done) {
          doc.trailing_chunks.push_back(std::move(raw));
        } else {
          doc.leading_chunks.push_back(std::move(raw));
        }
        break;
      }
    }
  }
  if (!have_pool) Malformed("missing string pool");
  if (!root_done || !stack.empty()) Malformed("unterminated element tree");
  if (!pending_ns.empty() || closing_remaining > 0) Malformed("unbalanced namespaces");
  CheckNode(doc.pool, doc.root);
  return doc;
}

Bytes AxmlDocument::Serialize() const {
  CheckNode(pool, root);
  const auto android_uri = FindString(kAndroidNamespaceUri);

  ByteWriter w;
  w.U16(chunk::kXml);
  w.U16(8);
  w.U32(0);  // patched below
  WriteStringPool(w, pool);
  if (!resource_map.empty()) {
    w.U16(chunk::kXmlResourceMap);
    w.U16(8);
    w.U32(static_cast<uint32_t>(8 + 4 * resource_map.size()));
    for (uint32_t id : resource_map) w.U32(id);
  }
  for (const Bytes& c : leading_chunks) w.Append(c);

  std::function<void(const XmlNode&)> emit = [&](const XmlNode& node) {
    if (node.kind == NodeKind::kOpaque) {
      w.Append(node.opaque);
      return;
    }
    if (node.kind == NodeKind::kText) {
      WriteNodeHeader(w, chunk::kXmlCdata, kTreeNodeHeaderSize + 12, node.line, node.comment);
      w.U32(node.text);
      WriteTypedValue(w, node.text_value);
      return;
    }
    for (const NamespaceDecl& ns : node.namespaces) {
      WriteNodeHeader(w, chunk::kXmlStartNamespace, kTreeNodeHeaderSize + 8, ns.line, ns.comment);
      w.U32(ns.prefix);
      w.U32(ns.uri);
    }
    uint16_t id_index = 0, class_index = 0, style_index = 0;
    for (size_t i = 0; i < node.attributes.size(); ++i) {
      const XmlAttribute& a = node.attributes[i];
      std::string_view n = pool.strings[a.name];
      if (n == "id" && android_uri && a.ns == *android_uri) id_index = static_cast<uint16_t>(i + 1);
      if (n == "class" && a.ns == kNoIndex) class_index = static_cast<uint16_t>(i + 1);
      if (n == "style" && a.ns == kNoIndex) style_index = static_cast<uint16_t>(i + 1);
    }
    uint32_t size = kTreeNodeHeaderSize + 20 +
                    kAttributeSize * static_cast<uint32_t>(node.attributes.size());
    WriteNodeHeader(w, chunk::kXmlStartElement, size, node.line, node.comment);
    w.U32(node.ns);
    w.U32(node.name);
    w.U16(20);
    w.U16(kAttributeSize);
    w.U16(static_cast<uint16_t>(node.attributes.size()));
    w.U16(id_index);
    w.U16(class_index);
    w.U16(style_index);
    for (const XmlAttribute& a : node.attributes) {
      w.U32(a.ns);
      w.U32(a.name);
      w.U32(a.raw_value);
      WriteTypedValue(w, a.value);
    }
    for (const XmlNode& child : node.children) emit(child);
    WriteNodeHeader(w, chunk::kXmlEndElement, kTreeNodeHeaderSize + 8, node.end_line,
                    node.end_comment);
    w.U32(node.ns);
    w.U32(node.name);
    for (auto it = node.namespaces.rbegin(); it != node.namespaces.rend(); ++it) {
      WriteNodeHeader(w, chunk::kXmlEndNamespace, kTreeNodeHeaderSize + 8, it->end_line,
                      it->end_comment);
      w.U32(it->prefix);
      w.U32(it->uri);
    }
  };
  emit(root);
  for (const Bytes& c : trailing_chunks) w.Append(c);
  w.PatchU32(4, static_cast<uint32_t>(w.size()));
  return w.Release();
}

const std::string& AxmlDocument::String(uint32_t index) const {
  static const std::string kEmpty;
  if (index == kNoIndex || index >= pool.size()) return kEmpty;
  return pool.strings[index];
}

std::string_view AxmlDocument::NameOf(const XmlNode& node) const { return String(node.name); }

std::optional<uint32_t> AxmlDocument::FindString(std::string_view s) const {
  for (size_t i = 0; i < pool.size(); ++i) {
    if (pool.strings[i] == s) return static_cast<uint32_t>(i);
  }
  return std::nullopt;
}

uint32_t AxmlDocument::InternString(std::string_view s) {
  if (auto existing = FindString(s)) return *existing;
  pool.strings.emplace_back(s);
  pool.sorted = false;
  return static_cast<uint32_t>(pool.size() - 1);
}

uint32_t AxmlDocument::InternAttributeName(std::string_view name, uint32_t res_id) {
  for (size_t i = 0; i < pool.size(); ++i) {
    if (pool.strings[i] != name) continue;
    uint32_t id = i < resource_map.size() ? resource_map[i] : 0;
    if (id == res_id) return static_cast<uint32_t>(i);
  }
  pool.strings.emplace_back(name);
  pool.sorted = false;
  uint32_t index = static_cast<uint32_t>(pool.size() - 1);
  if (res_id != 0) {
    resource_map.resize(index + 1, 0);
    resource_map[index] = res_id;
  }
  return index;
}

bool AxmlDocument::Matches(const XmlNode& node, const SelectorStep& step) const {
  if (node.kind != NodeKind::kElement) return false;
  if (step.name != "*" && NameOf(node) != step.name) return false;
  for (const auto& [attr_name, expected] : step.predicates) {
    bool found = false;
    for (const XmlAttribute& a : node.attributes) {
      if (String(a.name) != attr_name) continue;
      if (FormatValue(a) == expected ||
          (a.raw_value != kNoIndex && String(a.raw_value) == expected)) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

std::vector<NodeHandle> AxmlDocument::FindElements(const ElementSelector& selector) const {
  std::vector<NodeHandle> out;
  if (selector.steps.empty()) return out;
  std::vector<const XmlNode*> chain;
  std::vector<size_t> path;
  const size_t k = selector.steps.size();

  std::function<void(const XmlNode&)> visit = [&](const XmlNode& node) {
    chain.push_back(&node);
    if (chain.size() >= k && (!selector.anchored || chain.size() == k)) {
      bool ok = true;
      for (size_t i = 0; i < k && ok; ++i) {
        ok = Matches(*chain[chain.size() - k + i], selector.steps[i]);
      }
      if (ok) out.push_back(NodeHandle{path, generation_});
    }
    for (size_t i = 0; i < node.children.size(); ++i) {
      if (node.children[i].kind != NodeKind::kElement) continue;
      path.push_back(i);
      visit(node.children[i]);
      path.pop_back();
    }
    chain.pop_back();
  };
  visit(root);
  return out;
}

const XmlNode& AxmlDocument::Resolve(const NodeHandle& handle) const {
  return const_cast<AxmlDocument*>(this)->MutableResolve(handle);
}

XmlNode& AxmlDocument::MutableResolve(const NodeHandle& handle) {
  if (handle.generation != generation_) throw Error(ErrorCode::kStaleHandle, "generation changed");
  XmlNode* node = &root;
  for (size_t index : handle.path) {
    if (index >= node->children.size()) throw Error(ErrorCode::kStaleHandle, "path out of range");
    node = &node->children[index];
  }
  if (node->kind != NodeKind::kElement) throw Error(ErrorCode::kStaleHandle, "not an element");
  return *node;
}

void AxmlDocument::RemoveElement(const NodeHandle& handle) {
  MutableResolve(handle);
  if (handle.path.empty()) throw Error(ErrorCode::kCannotRemoveRoot, "cannot remove root element");
  NodeHandle parent{{handle.path.begin(), handle.path.end() - 1}, handle.generation};
  XmlNode& p = MutableResolve(parent);
  p.children.erase(p.children.begin() + static_cast<std::ptrdiff_t>(handle.path.back()));
  ++generation_;
}

const XmlAttribute* AxmlDocument::FindAttribute(const XmlNode& node, std::string_view ns_uri,
                                                std::string_view name) const {
  for (const XmlAttribute& a : node.attributes) {
    if (String(a.name) != name) continue;
    std::string_view ns = a.ns == kNoIndex ? std::string_view() : String(a.ns);
    if (ns == ns_uri) return &a;
  }
  return nullptr;
}

void AxmlDocument::SetAttribute(const NodeHandle& handle, std::string_view ns_uri,
                                std::string_view name, const AttributeValue& value,
                                uint32_t res_id) {
  MutableResolve(handle);  // validate before touching the pool

  uint32_t ns_index = kNoIndex;
  if (!ns_uri.empty()) {
    ns_index = InternString(ns_uri);
    bool declared = false;
    for (const NamespaceDecl& d : root.namespaces) declared |= d.uri == ns_index;
    if (!declared) {
      NamespaceDecl d;
      d.prefix = InternString(ns_uri == kAndroidNamespaceUri
                                  ? std::string("android")
                                  : "ns" + std::to_string(root.namespaces.size()));
      d.uri = ns_index;
      root.namespaces.push_back(d);
    }
  }

  XmlAttribute attr;
  attr.ns = ns_index;
  if (value.type == ValueType::kString) {
    uint32_t s = InternString(value.text);
    attr.raw_value = s;
    attr.value = {ValueType::kString, s};
  } else {
    attr.value = {value.type, value.data};
    if (!value.text.empty()) attr.raw_value = InternString(value.text);
  }

  XmlNode& node = MutableResolve(handle);
  for (XmlAttribute& a : node.attributes) {
    std::string_view ns = a.ns == kNoIndex ? std::string_view() : String(a.ns);
    if (String(a.name) == name && ns == ns_uri) {
      a.raw_value = attr.raw_value;
      a.value = attr.value;
      return;
    }
  }
  attr.name = InternAttributeName(name, res_id);
  auto id_of = [&](const XmlAttribute& a) -> uint32_t {
    return a.name < resource_map.size() ? resource_map[a.name] : 0;
  };
  auto it = node.attributes.end();
  if (res_id != 0) {
    it = std::find_if(node.attributes.begin(), node.attributes.end(), [&](const XmlAttribute& a) {
      uint32_t id = id_of(a);
      return id == 0 || id > res_id;
    });
  }
  node.attributes.insert(it, attr);
}

NodeHandle AxmlDocument::AppendElement(const NodeHandle& parent, std::string_view name) {
  XmlNode child;
  child.name = InternString(name);
  XmlNode& p = MutableResolve(parent);
  child.line = p.line;
  child.end_line = p.line;
  p.children.push_back(std::move(child));
  NodeHandle h = parent;
  h.path.push_back(p.children.size() - 1);
  return h;
}

std::string AxmlDocument::FormatValue(const XmlAttribute& attr) const {
  const TypedValue& v = attr.value;
  switch (v.type) {
    case ValueType::kString:
      return String(v.data);
    case ValueType::kBoolean:
      return v.data != 0 ? "true" : "false";
    case ValueType::kIntDec:
      return std::to_string(static_cast<int32_t>(v.data));
    case ValueType::kIntHex:
      return FormatHex("0x%x", v.data);
    case ValueType::kReference:
      return FormatHex("@0x%08x", v.data);
    case ValueType::kAttribute:
      return FormatHex("?0x%08x", v.data);
    case ValueType::kColorArgb8:
    case ValueType::kColorRgb8:
    case ValueType::kColorArgb4:
    case ValueType::kColorRgb4:
      return FormatHex("#%08x", v.data);
    default:
      return FormatHex("0x%08x", v.data);
  }
}

std::string AxmlDocument::Dump() const {
  std::string out;
  std::function<void(const XmlNode&, int)> visit = [&](const XmlNode& node, int depth) {
    std::string indent(static_cast<size_t>(depth) * 2, ' ');
    if (node.kind == NodeKind::kText) {
      out += indent + "T: \"" + String(node.text) + "\"\n";
      return;
    }
    if (node.kind == NodeKind::kOpaque) {
      out += indent + "?: chunk " + std::to_string(node.opaque.size()) + " bytes\n";
      return;
    }
    for (const NamespaceDecl& ns : node.namespaces) {
      out += indent + "N: " + String(ns.prefix) + "=" + String(ns.uri) + "\n";
    }
    out += indent + "E: " + String(node.name) + " (line=" + std::to_string(node.line) + ")\n";
    for (const XmlAttribute& a : node.attributes) {
      out += indent + "  A: ";
      if (a.ns != kNoIndex) out += String(a.ns) + ":";
      out += String(a.name);
      if (a.name < resource_map.size() && resource_map[a.name] != 0) {
        out += FormatHex("(0x%08x)", resource_map[a.name]);
      }
      out += "=";
      if (a.value.type == ValueType::kString) {
        out += "\"" + FormatValue(a) + "\"";
      } else {
        out += FormatValue(a);
      }
      out += "\n";
    }
    for (const XmlNode& child : node.children) visit(child, depth + 1);
  };
  visit(root, 0);
  return out;
}

ElementSelector ElementSelector::Parse(std::string_view text) {
  auto fail = [&](const std::string& why) -> void {
    throw Error(ErrorCode::kSelectorParseError, why + " in selector '" + std::string(text) + "'");
  };
  auto is_name_char = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
           c == ':' || c == '*' || c == '$';
  };
  ElementSelector sel;
  size_t i = 0;
  if (i < text.size() && text[i] == '/') {
    sel.anchored = true;
    ++i;
  }
  while (true) {
    SelectorStep step;
    size_t start = i;
    while (i < text.size() && is_name_char(text[i])) ++i;
    step.name = std::string(text.substr(start, i - start));
    if (step.name.empty()) fail("empty element name");
    if (step.name.find('*') != std::string::npos && step.name != "*") fail("bad wildcard");
    while (i < text.size() && text[i] == '[') {
      ++i;
      size_t eq = text.find('=', i);
      size_t close = text.find(']', i);
      if (close == std::string_view::npos) fail("unclosed '['");
      if (eq == std::string_view::npos || eq > close) fail("predicate without '='");
      std::string attr(text.substr(i, eq - i));
      if (auto colon = attr.rfind(':'); colon != std::string::npos) attr = attr.substr(colon + 1);
      if (attr.empty()) fail("empty attribute name");
      std::string value(text.substr(eq + 1, close - eq - 1));
      if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
          value.back() == value.front()) {
        value = value.substr(1, value.size() - 2);
      }
      step.predicates.emplace_back(std::move(attr), std::move(value));
      i = close + 1;
    }
    sel.steps.push_back(std::move(step));
    if (i == text.size()) break;
    if (text[i] != '/') fail("unexpected character '" + std::string(1, text[i]) + "'");
    ++i;
  }
  return sel;
}

std::string ElementSelector::ToString() const {
  std::string out = anchored ? "/" : "";
  for (size_t i = 0; i < steps.size(); ++i) {
    if (i > 0) out += "/";
    out += steps[i].name;
    for (const auto& [k, v] : steps[i].predicates) out += "[" + k + "=" + v + "]";
  }
  return out;
}

}  // namespace appgrease
