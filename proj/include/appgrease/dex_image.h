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

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "appgrease/bytes.h"
#include "appgrease/digest.h"
#include "appgrease/signature_list.h"

namespace appgrease {

namespace dex {
inline constexpr size_t kHeaderSize = 0x70;
inline constexpr size_t kChecksumOffset = 8;
inline constexpr size_t kSignatureOffset = 12;
inline constexpr size_t kFileSizeOffset = 32;
inline constexpr size_t kHeaderSizeOffset = 36;
inline constexpr size_t kEndianTagOffset = 40;
inline constexpr size_t kStringIdsSizeOffset = 56;
inline constexpr size_t kStringIdsOffOffset = 60;
inline constexpr uint32_t kEndianConstant = 0x12345678;
}  // namespace dex

struct DexHeader {
  std::array<uint8_t, 8> magic{};
  uint32_t checksum = 0;
  Sha1Digest signature{};
  uint32_t file_size = 0;
  uint32_t string_ids_size = 0;
  uint32_t string_ids_off = 0;
};

struct StringEntry {
  uint32_t index = 0;
  uint32_t data_offset = 0;   // start of the ULEB128 length prefix
  uint32_t utf16_length = 0;
  std::string bytes;          // modified UTF-8 payload, terminator excluded

  uint32_t payload_offset() const;

  friend bool operator==(const StringEntry&, const StringEntry&) = default;
};

enum class DexParseMode {
  kStrict,   // digest mismatch throws DigestMismatch
  kLenient,  // digest mismatch is only recorded
};

class DexImage {
 public:
  static DexImage Parse(ByteView bytes, DexParseMode mode = DexParseMode::kStrict);

  const Bytes& bytes() const { return bytes_; }
  const DexHeader& header() const { return header_; }
  const std::vector<StringEntry>& strings() const { return strings_; }
  bool checksum_ok() const { return checksum_ok_; }
  bool signature_ok() const { return signature_ok_; }

  // Substring match over payloads, in string-table order.
  std::vector<StringEntry> FindStrings(std::string_view pattern) const;

  // Overwrites the payload in place. The header is not resealed.
  // Throws LengthMismatch / StaleEntry.
  void ReplaceStringSameLength(const StringEntry& entry, std::string_view replacement);

  // Recomputes SHA-1 signature then adler-32 checksum and stores both.
  void Reseal();

  uint32_t ComputeChecksum() const;
  Sha1Digest ComputeSignature() const;

  friend bool operator==(const DexImage& a, const DexImage& b) { return a.bytes_ == b.bytes_; }

 private:
  Bytes bytes_;
  DexHeader header_;
  std::vector<StringEntry> strings_;
  bool checksum_ok_ = true;
  bool signature_ok_ = true;
};

inline DexImage ParseDex(ByteView bytes) { return DexImage::Parse(bytes); }
inline std::vector<StringEntry> FindStrings(const DexImage& image, std::string_view pattern) {
  return image.FindStrings(pattern);
}
DexImage ReplaceStringSameLength(const DexImage& image, const StringEntry& entry,
                                 std::string_view replacement);
DexImage Reseal(const DexImage& image);

// One hit per (signature, matching string entry).
std::vector<DetectionHit> ScanSignatures(const DexImage& image, const SignatureList& signatures,
                                         std::string_view dex_path = "classes.dex");

// Deterministic lowercase letters derived from SHA-256(seed_a \0 seed_b).
std::string DeterministicLetters(std::string_view seed_a, std::string_view seed_b, size_t length);

// Equal-length stand-in for a hostname: letters followed by ".invalid" when
// the host is at least 9 bytes long, letters only otherwise.
std::string BlankHostname(std::string_view host, std::string_view seed);

// Number of UTF-16 code units a modified UTF-8 byte sequence decodes to.
uint32_t MutfUtf16Length(std::string_view mutf8);

}  // namespace appgrease
