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
#include <vector>

#include "appgrease/bytes.h"
#include "appgrease/digest.h"

namespace appgrease {

enum class CompressionMethod : uint16_t {
  kStored = 0,
  kDeflate = 8,
};

struct ZipEntry {
  std::string name;
  CompressionMethod method = CompressionMethod::kDeflate;
  Bytes data;  // uncompressed
  uint32_t crc32 = 0;
  bool modified = false;

  // Passthrough metadata, copied verbatim on write.
  uint16_t version_made_by = 0;
  uint16_t version_needed = 20;
  uint16_t flags = 0;
  uint16_t mod_time = 0;
  uint16_t mod_date = 0x0021;
  uint16_t internal_attrs = 0;
  uint32_t external_attrs = 0;
  Bytes local_extra;  // alignment records removed
  Bytes central_extra;
  std::string comment;

  // Original compressed payload; present until the entry is modified.
  std::optional<Bytes> compressed;

  // Structural equality: name, method, data and checksum.
  friend bool operator==(const ZipEntry& a, const ZipEntry& b) {
    return a.name == b.name && a.method == b.method && a.data == b.data && a.crc32 == b.crc32;
  }
};

// Offsets of the parts of a ZIP file that the v2 signing scheme cares about.
struct ZipSections {
  uint64_t cd_offset = 0;
  uint64_t cd_size = 0;
  uint64_t eocd_offset = 0;
};

// Locates the end-of-central-directory record and the central directory it
// points at. Throws MalformedZip / UnsupportedZipFeature.
ZipSections LocateZipSections(ByteView bytes);

// An APK as an ordered list of ZIP entries. Immutable once opened unless the
// caller holds a private copy; the free functions below return new values.
class ApkArchive {
 public:
  ApkArchive() = default;

  static ApkArchive Open(ByteView bytes);

  // Serializes deterministically: entries in order, unmodified entries keep
  // their original compressed bytes, stored entries are 4-byte aligned.
  Bytes Write() const;

  const std::vector<ZipEntry>& entries() const { return entries_; }
  const ZipEntry* Find(std::string_view name) const;
  bool Contains(std::string_view name) const { return Find(name) != nullptr; }

  // Mutators; throw EntryNotFound / MalformedZip (duplicate name).
  void ReplaceEntry(std::string_view name, Bytes data);
  void AddEntry(std::string name, Bytes data,
                CompressionMethod method = CompressionMethod::kDeflate);

  const Bytes& eocd_record() const { return eocd_record_; }
  const std::string& archive_comment() const { return comment_; }
  const Sha256Digest& original_bytes_digest() const { return original_digest_; }

  friend bool operator==(const ApkArchive& a, const ApkArchive& b) {
    return a.entries_ == b.entries_;
  }

 private:
  std::vector<ZipEntry> entries_;
  Bytes eocd_record_;
  std::string comment_;
  Sha256Digest original_digest_{};
};

ApkArchive OpenArchive(ByteView bytes);
Bytes WriteArchive(const ApkArchive& archive);
ApkArchive ReplaceEntry(const ApkArchive& archive, std::string_view name, Bytes data);

// Raw deflate helpers (no zlib header), shared with patchwire.
Bytes DeflateRaw(ByteView data);
Bytes InflateRaw(ByteView data, size_t expected_size, ErrorCode error_code);

}  // namespace appgrease
