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

#include "appgrease/digest.h"

#include <openssl/evp.h>
#include <openssl/sha.h>
#include <zlib.h>

#include <climits>

namespace appgrease {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedZip: return "MalformedZip";
    case ErrorCode::kUnsupportedCompression: return "UnsupportedCompression";
    case ErrorCode::kUnsupportedZipFeature: return "UnsupportedZipFeature";
    case ErrorCode::kCrcMismatch: return "CrcMismatch";
    case ErrorCode::kEntryNotFound: return "EntryNotFound";
    case ErrorCode::kMalformedAxml: return "MalformedAxml";
    case ErrorCode::kCannotRemoveRoot: return "CannotRemoveRoot";
    case ErrorCode::kStaleHandle: return "StaleHandle";
    case ErrorCode::kSelectorParseError: return "SelectorParseError";
    case ErrorCode::kMalformedDex: return "MalformedDex";
    case ErrorCode::kDigestMismatch: return "DigestMismatch";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kStaleEntry: return "StaleEntry";
    case ErrorCode::kInvalidManifest: return "InvalidManifest";
    case ErrorCode::kUnknownActionVariant: return "UnknownActionVariant";
    case ErrorCode::kActionFailed: return "ActionFailed";
    case ErrorCode::kTreeModeUnavailable: return "TreeModeUnavailable";
    case ErrorCode::kPatchContextMismatch: return "PatchContextMismatch";
    case ErrorCode::kNoFilesMatched: return "NoFilesMatched";
    case ErrorCode::kNotApplicable: return "NotApplicable";
    case ErrorCode::kStoreCorrupt: return "StoreCorrupt";
    case ErrorCode::kCryptoFailure: return "CryptoFailure";
    case ErrorCode::kOldFileMismatch: return "OldFileMismatch";
    case ErrorCode::kCorruptPatch: return "CorruptPatch";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

std::string HexEncode(ByteView data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (uint8_t b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

Sha256Digest Sha256(ByteView data) {
  Sha256Digest out;
  SHA256(data.data(), data.size(), out.data());
  return out;
}

Sha1Digest Sha1(ByteView data) {
  Sha1Digest out;
  SHA1(data.data(), data.size(), out.data());
  return out;
}

Sha256Hasher::Sha256Hasher() : ctx_(EVP_MD_CTX_new()) {
  auto* ctx = static_cast<EVP_MD_CTX*>(ctx_);
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kCryptoFailure, "EVP_DigestInit_ex");
  }
}

Sha256Hasher::~Sha256Hasher() { EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_)); }

void Sha256Hasher::Update(ByteView data) {
  EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data.data(), data.size());
}

Sha256Digest Sha256Hasher::Finish() {
  Sha256Digest out;
  unsigned int len = 0;
  EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), out.data(), &len);
  return out;
}

uint32_t Crc32(ByteView data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  const uint8_t* p = data.data();
  size_t left = data.size();
  while (left > 0) {
    uInt n = left > UINT_MAX ? UINT_MAX : static_cast<uInt>(left);
    crc = crc32(crc, p, n);
    p += n;
    left -= n;
  }
  return static_cast<uint32_t>(crc);
}

uint32_t Adler32(ByteView data) {
  uLong a = adler32(0L, Z_NULL, 0);
  const uint8_t* p = data.data();
  size_t left = data.size();
  while (left > 0) {
    uInt n = left > UINT_MAX ? UINT_MAX : static_cast<uInt>(left);
    a = adler32(a, p, n);
    p += n;
    left -= n;
  }
  return static_cast<uint32_t>(a);
}

std::string Sha256Hex(ByteView data) {
  auto d = Sha256(data);
  return HexEncode(d);
}

}  // namespace appgrease
