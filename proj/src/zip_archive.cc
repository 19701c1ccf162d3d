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

#include "appgrease/zip_archive.h"

#include <zlib.h>

#include <algorithm>
#include <unordered_set>

namespace appgrease {
namespace {

constexpr uint32_t kLocalHeaderSignature = 0x04034b50;
constexpr uint32_t kCentralHeaderSignature = 0x02014b50;
constexpr uint32_t kEocdSignature = 0x06054b50;
constexpr uint32_t kZip64LocatorSignature = 0x07064b50;
constexpr size_t kEocdSize = 22;
constexpr size_t kLocalHeaderSize = 30;
constexpr size_t kCentralHeaderSize = 46;
constexpr size_t kMaxCommentSize = 0xffff;

constexpr uint16_t kFlagEncrypted = 0x0001;
constexpr uint16_t kFlagDataDescriptor = 0x0008;

// Extra-field record carrying alignment padding (same id apksigner uses).
constexpr uint16_t kAlignmentExtraId = 0xd935;
constexpr size_t kStoredAlignment = 4;

[[noreturn]] void Malformed(const std::string& what) {
  throw Error(ErrorCode::kMalformedZip, what);
}

// Drops alignment records so a re-write can compute fresh padding. Extra
// fields that do not parse as records are left untouched.
Bytes StripAlignmentRecords(ByteView extra) {
  Bytes kept;
  size_t pos = 0;
  while (pos + 4 <= extra.size()) {
    uint16_t id = LoadLe16(&extra[pos]);
    uint16_t len = LoadLe16(&extra[pos + 2]);
    if (pos + 4 + len > extra.size()) return Bytes(extra.begin(), extra.end());
    if (id != kAlignmentExtraId && id != 0) {
      kept.insert(kept.end(), extra.begin() + pos, extra.begin() + pos + 4 + len);
    }
    pos += 4 + len;
  }
  if (pos != extra.size()) return Bytes(extra.begin(), extra.end());
  return kept;
}

}  // namespace

Bytes DeflateRaw(ByteView data) {
  z_stream zs{};
  if (deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY) !=
      Z_OK) {
    throw Error(ErrorCode::kIo, "deflateInit2 failed");
  }
  Bytes out(deflateBound(&zs, data.size()));
  zs.next_in = const_cast<Bytef*>(data.data());
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  int rc = deflate(&zs, Z_FINISH);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw Error(ErrorCode::kIo, "deflate did not finish");
  out.resize(zs.total_out);
  return out;
}

Bytes InflateRaw(ByteView data, size_t expected_size, ErrorCode error_code) {
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw Error(error_code, "inflateInit2 failed");
  // One spare byte so an empty entry still gets a non-null output buffer and
  // trailing garbage shows up as overproduction.
  Bytes out(expected_size + 1);
  zs.next_in = const_cast<Bytef*>(data.data());
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  int rc = inflate(&zs, Z_FINISH);
  out.resize(expected_size);
  size_t produced = zs.total_out;
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || produced != expected_size) {
    throw Error(error_code, "deflate stream does not match declared size");
  }
  return out;
}

ZipSections LocateZipSections(ByteView bytes) {
  if (bytes.size() < kEocdSize) Malformed("file too small for end of central directory");
  size_t lowest = bytes.size() >= kEocdSize + kMaxCommentSize
                      ? bytes.size() - kEocdSize - kMaxCommentSize
                      : 0;
  // Scan backwards; the record must account for exactly the trailing bytes.
  for (size_t pos = bytes.size() - kEocdSize + 1; pos-- > lowest;) {
    if (LoadLe32(&bytes[pos]) != kEocdSignature) continue;
    uint16_t comment_len = LoadLe16(&bytes[pos + 20]);
    if (pos + kEocdSize + comment_len != bytes.size()) continue;

    uint16_t disk = LoadLe16(&bytes[pos + 4]);
    uint16_t cd_disk = LoadLe16(&bytes[pos + 6]);
    uint16_t disk_entries = LoadLe16(&bytes[pos + 8]);
    uint16_t total_entries = LoadLe16(&bytes[pos + 10]);
    uint32_t cd_size = LoadLe32(&bytes[pos + 12]);
    uint32_t cd_offset = LoadLe32(&bytes[pos + 16]);
    if (total_entries == 0xffff || cd_size == 0xffffffff || cd_offset == 0xffffffff) {
      throw Error(ErrorCode::kUnsupportedZipFeature, "ZIP64 archives are not supported");
    }
    if (pos >= 20 && LoadLe32(&bytes[pos - 20]) == kZip64LocatorSignature) {
      throw Error(ErrorCode::kUnsupportedZipFeature, "ZIP64 locator present");
    }
    if (disk != 0 || cd_disk != 0 || disk_entries != total_entries) {
      throw Error(ErrorCode::kUnsupportedZipFeature, "multi-disk archives are not supported");
    }
    if (static_cast<uint64_t>(cd_offset) + cd_size > pos) {
      Malformed("central directory overlaps end record");
    }
    return ZipSections{cd_offset, cd_size, pos};
  }
  Malformed("end of central directory record not found");
}

ApkArchive ApkArchive::Open(ByteView bytes) {
  ZipSections sections = LocateZipSections(bytes);
  ApkArchive archive;
  archive.original_digest_ = Sha256(bytes);
  archive.eocd_record_.assign(bytes.begin() + sections.eocd_offset, bytes.end());
  uint16_t comment_len = LoadLe16(&bytes[sections.eocd_offset + 20]);
  archive.comment_ = ToString(bytes.subspan(sections.eocd_offset + kEocdSize, comment_len));
  uint16_t entry_count = LoadLe16(&bytes[sections.eocd_offset + 10]);

  ByteReader cd(bytes.subspan(sections.cd_offset, sections.cd_size), ErrorCode::kMalformedZip);
  std::unordered_set<std::string> seen;
  archive.entries_.reserve(entry_count);
  for (uint16_t i = 0; i < entry_count; ++i) {
    if (cd.U32() != kCentralHeaderSignature) cd.Fail("bad central directory signature");
    ZipEntry e;
    e.version_made_by = cd.U16();
    e.version_needed = cd.U16();
    e.flags = cd.U16();
    uint16_t method = cd.U16();
    e.mod_time = cd.U16();
    e.mod_date = cd.U16();
    uint32_t crc = cd.U32();
    uint32_t compressed_size = cd.U32();
    uint32_t uncompressed_size = cd.U32();
    uint16_t name_len = cd.U16();
    uint16_t extra_len = cd.U16();
    uint16_t comment_len_entry = cd.U16();
    uint16_t disk_start = cd.U16();
    e.internal_attrs = cd.U16();
    e.external_attrs = cd.U32();
    uint32_t local_offset = cd.U32();
    e.name = ToString(cd.Take(name_len));
    ByteView central_extra = cd.Take(extra_len);
    e.central_extra.assign(central_extra.begin(), central_extra.end());
    e.comment = ToString(cd.Take(comment_len_entry));

    if (compressed_size == 0xffffffff || uncompressed_size == 0xffffffff ||
        local_offset == 0xffffffff || disk_start != 0) {
      throw Error(ErrorCode::kUnsupportedZipFeature, "ZIP64 entry: " + e.name);
    }
    if (e.flags & kFlagEncrypted) {
      throw Error(ErrorCode::kUnsupportedZipFeature, "encrypted entry: " + e.name);
    }
    if (method != static_cast<uint16_t>(CompressionMethod::kStored) &&
        method != static_cast<uint16_t>(CompressionMethod::kDeflate)) {
      throw Error(ErrorCode::kUnsupportedCompression,
                  "method " + std::to_string(method) + " for " + e.name);
    }
    e.method = static_cast<CompressionMethod>(method);
    if (!seen.insert(e.name).second) Malformed("duplicate entry name " + e.name);

    ByteReader local(bytes.first(sections.cd_offset), ErrorCode::kMalformedZip);
    local.Seek(local_offset);
    if (local.U32() != kLocalHeaderSignature) local.Fail("bad local header signature");
    local.Skip(22);
    uint16_t local_name_len = local.U16();
    uint16_t local_extra_len = local.U16();
    if (ToString(local.Take(local_name_len)) != e.name) {
      Malformed("local header name differs from central directory for " + e.name);
    }
    e.local_extra = StripAlignmentRecords(local.Take(local_extra_len));
    ByteView payload = local.Take(compressed_size);

    if (e.method == CompressionMethod::kStored) {
      if (compressed_size != uncompressed_size) Malformed("stored entry size mismatch " + e.name);
      e.data.assign(payload.begin(), payload.end());
    } else {
      e.data = InflateRaw(payload, uncompressed_size, ErrorCode::kMalformedZip);
    }
    e.crc32 = Crc32(e.data);
    if (e.crc32 != crc) {
      throw Error(ErrorCode::kCrcMismatch, e.name);
    }
    e.compressed = Bytes(payload.begin(), payload.end());
    e.flags &= static_cast<uint16_t>(~kFlagDataDescriptor);
    archive.entries_.push_back(std::move(e));
  }
  return archive;
}

Bytes ApkArchive::Write() const {
  ByteWriter out;
  std::vector<uint32_t> offsets;
  std::vector<uint32_t> compressed_sizes;
  offsets.reserve(entries_.size());
  for (const ZipEntry& e : entries_) {
    Bytes fresh;
    const Bytes* payload = nullptr;
    if (e.compressed) {
      payload = &*e.compressed;
    } else if (e.method == CompressionMethod::kStored) {
      payload = &e.data;
    } else {
      fresh = DeflateRaw(e.data);
      payload = &fresh;
    }

    Bytes extra = e.local_extra;
    if (e.method == CompressionMethod::kStored) {
      size_t data_start = out.size() + kLocalHeaderSize + e.name.size() + extra.size() + 6;
      size_t padding = (kStoredAlignment - data_start % kStoredAlignment) % kStoredAlignment;
      uint8_t header[6];
      StoreLe16(header, kAlignmentExtraId);
      StoreLe16(header + 2, static_cast<uint16_t>(2 + padding));
      StoreLe16(header + 4, static_cast<uint16_t>(kStoredAlignment));
      extra.insert(extra.end(), header, header + 6);
      extra.insert(extra.end(), padding, 0);
    }

    offsets.push_back(static_cast<uint32_t>(out.size()));
    compressed_sizes.push_back(static_cast<uint32_t>(payload->size()));
    out.U32(kLocalHeaderSignature);
    out.U16(e.version_needed);
    out.U16(e.flags);
    out.U16(static_cast<uint16_t>(e.method));
    out.U16(e.mod_time);
    out.U16(e.mod_date);
    out.U32(e.crc32);
    out.U32(static_cast<uint32_t>(payload->size()));
    out.U32(static_cast<uint32_t>(e.data.size()));
    out.U16(static_cast<uint16_t>(e.name.size()));
    out.U16(static_cast<uint16_t>(extra.size()));
    out.Append(e.name);
    out.Append(extra);
    out.Append(*payload);
  }

  size_t cd_offset = out.size();
  for (size_t i = 0; i < entries_.size(); ++i) {
    const ZipEntry& e = entries_[i];
    out.U32(kCentralHeaderSignature);
    out.U16(e.version_made_by);
    out.U16(e.version_needed);
    out.U16(e.flags);
    out.U16(static_cast<uint16_t>(e.method));
    out.U16(e.mod_time);
    out.U16(e.mod_date);
    out.U32(e.crc32);
    out.U32(compressed_sizes[i]);
    out.U32(static_cast<uint32_t>(e.data.size()));
    out.U16(static_cast<uint16_t>(e.name.size()));
    out.U16(static_cast<uint16_t>(e.central_extra.size()));
    out.U16(static_cast<uint16_t>(e.comment.size()));
    out.U16(0);
    out.U16(e.internal_attrs);
    out.U32(e.external_attrs);
    out.U32(offsets[i]);
    out.Append(e.name);
    out.Append(e.central_extra);
    out.Append(e.comment);
  }
  size_t cd_size = out.size() - cd_offset;

  out.U32(kEocdSignature);
  out.U16(0);
  out.U16(0);
  out.U16(static_cast<uint16_t>(entries_.size()));
  out.U16(static_cast<uint16_t>(entries_.size()));
  out.U32(static_cast<uint32_t>(cd_size));
  out.U32(static_cast<uint32_t>(cd_offset));
  out.U16(static_cast<uint16_t>(comment_.size()));
  out.Append(comment_);
  return out.Release();
}

const ZipEntry* ApkArchive::Find(std::string_view name) const {
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const ZipEntry& e) { return e.name == name; });
  return it == entries_.end() ? nullptr : &*it;
}

void ApkArchive::ReplaceEntry(std::string_view name, Bytes data) {
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const ZipEntry& e) { return e.name == name; });
  if (it == entries_.end()) throw Error(ErrorCode::kEntryNotFound, std::string(name));
  it->crc32 = Crc32(data);
  it->data = std::move(data);
  it->compressed.reset();
  it->modified = true;
}

void ApkArchive::AddEntry(std::string name, Bytes data, CompressionMethod method) {
  if (Contains(name)) Malformed("entry already exists: " + name);
  if (name.size() > 0xffff) Malformed("entry name too long");
  ZipEntry e;
  e.name = std::move(name);
  e.method = method;
  e.version_needed = method == CompressionMethod::kStored ? 10 : 20;
  e.crc32 = Crc32(data);
  e.data = std::move(data);
  e.modified = true;
  entries_.push_back(std::move(e));
}

ApkArchive OpenArchive(ByteView bytes) { return ApkArchive::Open(bytes); }

Bytes WriteArchive(const ApkArchive& archive) { return archive.Write(); }

ApkArchive ReplaceEntry(const ApkArchive& archive, std::string_view name, Bytes data) {
  ApkArchive copy = archive;
  copy.ReplaceEntry(name, std::move(data));
  return copy;
}

}  // namespace appgrease
