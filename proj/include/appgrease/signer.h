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
#include <ctime>
#include <memory>
#include <string>

#include "appgrease/bytes.h"
#include "appgrease/digest.h"

namespace appgrease {

namespace v2 {
inline constexpr uint32_t kBlockId = 0x7109871a;
inline constexpr uint32_t kRsaPkcs1Sha256 = 0x0103;
inline constexpr size_t kChunkSize = 1 << 20;
inline constexpr char kBlockMagic[] = "APK Sig Block 42";  // 16 bytes, no NUL on disk
}  // namespace v2

// RSA-2048 key pair with a self-signed certificate.
class SigningKey {
 public:
  static SigningKey Generate();
  // Loads the key at `path`, creating and persisting one on first use.
  // Throws StoreCorrupt when the file exists but does not hold a usable key.
  static SigningKey LoadOrCreate(const std::string& path);
  static SigningKey FromPem(std::string_view pem);

  SigningKey(SigningKey&&) noexcept;
  SigningKey& operator=(SigningKey&&) noexcept;
  ~SigningKey();

  std::string ToPem() const;
  const Bytes& certificate_der() const { return certificate_der_; }
  const Bytes& public_key_der() const { return public_key_der_; }
  std::string Fingerprint() const;  // SHA-256 of the certificate, hex
  std::time_t created() const { return created_; }
  int ValidityDays() const;

  // RSASSA-PKCS1-v1_5 with SHA-256.
  Bytes Sign(ByteView data) const;

 private:
  struct Impl;
  explicit SigningKey(std::unique_ptr<Impl> impl);
  void CacheDerivedFields();

  std::unique_ptr<Impl> impl_;
  Bytes certificate_der_;
  Bytes public_key_der_;
  std::time_t created_ = 0;
};

enum class VerifyStatus {
  kOk,
  kMalformedZip,
  kNoSigningBlock,
  kMalformedBlock,
  kNoV2Signature,
  kUnsupportedAlgorithm,
  kSignatureInvalid,
  kCertificateMismatch,
  kDigestMismatch,
};

std::string_view VerifyStatusName(VerifyStatus status);

struct VerificationReport {
  VerifyStatus status = VerifyStatus::kOk;
  std::string detail;
  std::string certificate_fingerprint;

  bool ok() const { return status == VerifyStatus::kOk; }
};

struct SignOptions {
  bool parallel_digests = true;
};

// Inserts a v2 signing block before the central directory, replacing any
// existing block. Output is a pure function of (apk, key).
Bytes SignApk(ByteView apk, const SigningKey& key, const SignOptions& options = {});
VerificationReport VerifyApk(ByteView apk);

// Top-level v2 content digest over the three signed sections; the EOCD copy
// passed in must already carry the adjusted central-directory offset.
Sha256Digest ComputeContentDigest(ByteView entries, ByteView central_directory, ByteView eocd,
                                  bool parallel = true);

}  // namespace appgrease
