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

#include "appgrease/dex_image.h"

#include <cstring>

namespace appgrease {
namespace {

[[noreturn]] void Malformed(const std::string& what) {
  throw Error(ErrorCode::kMalformedDex, what);
}

size_t UlebWidth(uint32_t v) {
  size_t n = 1;
  while (v >= 0x80) {
    v >>= 7;
    ++n;
  }
  return n;
}

void WriteUleb(uint8_t* p, uint32_t v) {
  while (v >= 0x80) {
    *p++ = static_cast<uint8_t>(v | 0x80);
    v >>= 7;
  }
  *p = static_cast<uint8_t>(v);
}

}  // namespace

uint32_t StringEntry::payload_offset() const {
  return data_offset + static_cast<uint32_t>(UlebWidth(utf16_length));
}

uint32_t MutfUtf16Length(std::string_view mutf8) {
  uint32_t n = 0;
  for (char c : mutf8) {
    if ((static_cast<uint8_t>(c) & 0xc0) != 0x80) ++n;
  }
  return n;
}

DexImage DexImage::Parse(ByteView bytes, DexParseMode mode) {
  if (bytes.size() < dex::kHeaderSize) Malformed("file shorter than header");
  static constexpr uint8_t kMagicPrefix[4] = {'d', 'e', 'x', '\n'};
  if (std::memcmp(bytes.data(), kMagicPrefix, 4) != 0 || bytes[4] != '0' || bytes[5] != '3' ||
      bytes[6] < '5' || bytes[6] > '9' || bytes[7] != 0) {
    Malformed("bad magic");
  }

  DexImage image;
  image.bytes_.assign(bytes.begin(), bytes.end());
  DexHeader& h = image.header_;
  std::memcpy(h.magic.data(), bytes.data(), 8);
  h.checksum = LoadLe32(&bytes[dex::kChecksumOffset]);
  std::memcpy(h.signature.data(), &bytes[dex::kSignatureOffset], h.signature.size());
  h.file_size = LoadLe32(&bytes[dex::kFileSizeOffset]);
  h.string_ids_size = LoadLe32(&bytes[dex::kStringIdsSizeOffset]);
  h.string_ids_off = LoadLe32(&bytes[dex::kStringIdsOffOffset]);

  if (h.file_size != bytes.size()) Malformed("file_size does not match buffer length");
  if (LoadLe32(&bytes[dex::kHeaderSizeOffset]) != dex::kHeaderSize) Malformed("bad header_size");
  if (LoadLe32(&bytes[dex::kEndianTagOffset]) != dex::kEndianConstant) {
    Malformed("unsupported endian tag");
  }
  if (h.string_ids_size > 0 &&
      (h.string_ids_off < dex::kHeaderSize ||
       static_cast<uint64_t>(h.string_ids_off) + 4ull * h.string_ids_size > bytes.size())) {
    Malformed("string_ids out of bounds");
  }

  image.strings_.reserve(h.string_ids_size);
  for (uint32_t i = 0; i < h.string_ids_size; ++i) {
    StringEntry e;
    e.index = i;
    e.data_offset = LoadLe32(&bytes[h.string_ids_off + 4 * i]);
    if (e.data_offset < dex::kHeaderSize || e.data_offset >= bytes.size()) {
      Malformed("string data offset out of bounds for string " + std::to_string(i));
    }
    ByteReader r(bytes, ErrorCode::kMalformedDex);
    r.Seek(e.data_offset);
    uint64_t len = r.Varint();
    if (len > 0xffffffffu || UlebWidth(static_cast<uint32_t>(len)) != r.pos() - e.data_offset) {
      Malformed("bad string length prefix for string " + std::to_string(i));
    }
    e.utf16_length = static_cast<uint32_t>(len);
    const uint8_t* start = bytes.data() + r.pos();
    const void* nul = std::memchr(start, 0, bytes.size() - r.pos());
    if (nul == nullptr) Malformed("unterminated string " + std::to_string(i));
    e.bytes.assign(reinterpret_cast<const char*>(start),
                   static_cast<const uint8_t*>(nul) - start);
    image.strings_.push_back(std::move(e));
  }

  image.checksum_ok_ = image.ComputeChecksum() == h.checksum;
  image.signature_ok_ = image.ComputeSignature() == h.signature;
  if (mode == DexParseMode::kStrict && !(image.checksum_ok_ && image.signature_ok_)) {
    throw Error(ErrorCode::kDigestMismatch,
                std::string(image.checksum_ok_ ? "" : "checksum ") +
                    (image.signature_ok_ ? "" : "signature ") + "does not match contents");
  }
  return image;
}

std::vector<StringEntry> DexImage::FindStrings(std::string_view pattern) const {
  std::vector<StringEntry> out;
  if (pattern.empty()) return out;
  for (const StringEntry& e : strings_) {
    if (e.bytes.find(pattern) != std::string::npos) out.push_back(e);
  }
  return out;
}

void DexImage::ReplaceStringSameLength(const StringEntry& entry, std::string_view replacement) {
  if (entry.index >= strings_.size() || strings_[entry.index] != entry) {
    throw Error(ErrorCode::kStaleEntry, "string " + std::to_string(entry.index));
  }
  if (replacement.size() != entry.bytes.size()) {
    throw Error(ErrorCode::kLengthMismatch, "replacement is " + std::to_string(replacement.size()) +
                                                " bytes, original is " +
                                                std::to_string(entry.bytes.size()));
  }
  if (replacement.find('\0') != std::string_view::npos) {
    throw Error(ErrorCode::kLengthMismatch, "replacement contains a NUL byte");
  }
  uint32_t utf16 = MutfUtf16Length(replacement);
  if (UlebWidth(utf16) != UlebWidth(entry.utf16_length)) {
    throw Error(ErrorCode::kLengthMismatch, "length prefix would change width");
  }
  WriteUleb(&bytes_[entry.data_offset], utf16);
  StringEntry& stored = strings_[entry.index];
  stored.utf16_length = utf16;
  std::memcpy(&bytes_[stored.payload_offset()], replacement.data(), replacement.size());
  stored.bytes.assign(replacement);
}

uint32_t DexImage::ComputeChecksum() const {
  return Adler32(ByteView(bytes_).subspan(dex::kSignatureOffset));
}

Sha1Digest DexImage::ComputeSignature() const {
  return Sha1(ByteView(bytes_).subspan(dex::kFileSizeOffset));
}

void DexImage::Reseal() {
  header_.signature = ComputeSignature();
  std::memcpy(&bytes_[dex::kSignatureOffset], header_.signature.data(), header_.signature.size());
  header_.checksum = ComputeChecksum();
  StoreLe32(&bytes_[dex::kChecksumOffset], header_.checksum);
  checksum_ok_ = true;
  signature_ok_ = true;
}

DexImage ReplaceStringSameLength(const DexImage& image, const StringEntry& entry,
                                 std::string_view replacement) {
  DexImage copy = image;
  copy.ReplaceStringSameLength(entry, replacement);
  return copy;
}

DexImage Reseal(const DexImage& image) {
  DexImage copy = image;
  copy.Reseal();
  return copy;
}

std::vector<DetectionHit> ScanSignatures(const DexImage& image, const SignatureList& signatures,
                                         std::string_view dex_path) {
  std::vector<DetectionHit> hits;
  for (const TrackerSignature& sig : signatures.entries) {
    std::string needle = sig.pattern;
    if (sig.kind == PatternKind::kClassPrefix) {
      // com.example.sdk -> Lcom/example/sdk
      for (char& c : needle) {
        if (c == '.') c = '/';
      }
      needle = "L" + needle;
    }
    for (const StringEntry& e : image.strings()) {
      bool match = sig.kind == PatternKind::kHostname
                       ? e.bytes.find(needle) != std::string::npos
                       : e.bytes.rfind(needle, 0) == 0;
      if (match) hits.push_back({sig.tracker, sig.pattern, std::string(dex_path), e.index});
    }
  }
  return hits;
}

std::string DeterministicLetters(std::string_view seed_a, std::string_view seed_b, size_t length) {
  std::string out;
  out.reserve(length);
  for (uint32_t block = 0; out.size() < length; ++block) {
    std::string material;
    material.append(seed_a);
    material.push_back('\0');
    material.append(seed_b);
    material.push_back('\0');
    material.append(std::to_string(block));
    Sha256Digest d = Sha256(AsBytes(material));
    for (uint8_t b : d) {
      if (out.size() == length) break;
      out.push_back(static_cast<char>('a' + b % 26));
    }
  }
  return out;
}

std::string BlankHostname(std::string_view host, std::string_view seed) {
  static constexpr std::string_view kSuffix = ".invalid";
  if (host.size() >= kSuffix.size() + 1) {
    return DeterministicLetters(seed, host, host.size() - kSuffix.size()) + std::string(kSuffix);
  }
  return DeterministicLetters(seed, host, host.size());
}

}  // namespace appgrease
