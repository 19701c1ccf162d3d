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

#include "appgrease/signer.h"

#include <openssl/bio.h>
#include <openssl/evp.h>
#include <openssl/pem.h>
#include <openssl/rsa.h>
#include <openssl/x509.h>

#include <array>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "appgrease/kernels.h"
#include "appgrease/zip_archive.h"

namespace appgrease {

struct SigningKey::Impl {
  std::unique_ptr<EVP_PKEY, decltype(&EVP_PKEY_free)> pkey{nullptr, EVP_PKEY_free};
  std::unique_ptr<X509, decltype(&X509_free)> cert{nullptr, X509_free};
};

namespace {

constexpr long kValiditySeconds = 30L * 365 * 24 * 60 * 60;
constexpr size_t kMagicSize = 16;

[[noreturn]] void CryptoFail(const std::string& what) {
  throw Error(ErrorCode::kCryptoFailure, what);
}

using BioPtr = std::unique_ptr<BIO, decltype(&BIO_free)>;

Bytes ToDer(X509* cert) {
  int len = i2d_X509(cert, nullptr);
  if (len <= 0) CryptoFail("i2d_X509");
  Bytes out(static_cast<size_t>(len));
  uint8_t* p = out.data();
  i2d_X509(cert, &p);
  return out;
}

Bytes PublicKeyDer(EVP_PKEY* key) {
  int len = i2d_PUBKEY(key, nullptr);
  if (len <= 0) CryptoFail("i2d_PUBKEY");
  Bytes out(static_cast<size_t>(len));
  uint8_t* p = out.data();
  i2d_PUBKEY(key, &p);
  return out;
}

void LengthPrefixed(ByteWriter& w, ByteView data) {
  w.U32(static_cast<uint32_t>(data.size()));
  w.Append(data);
}

// Reads a u32-length-prefixed slice from `r`.
ByteView TakePrefixed(ByteReader& r) {
  uint32_t n = r.U32();
  return r.Take(n);
}

struct BlockLocation {
  bool found = false;
  uint64_t start = 0;  // first byte of the block (its leading size field)
  uint64_t size = 0;   // value of the size fields
};

BlockLocation FindSigningBlock(ByteView apk, const ZipSections& sections) {
  BlockLocation loc;
  uint64_t cd = sections.cd_offset;
  if (cd < kMagicSize + 8 + 8) return loc;
  if (std::memcmp(&apk[cd - kMagicSize], v2::kBlockMagic, kMagicSize) != 0) return loc;
  uint64_t size = LoadLe64(&apk[cd - kMagicSize - 8]);
  if (size < kMagicSize + 8 || size > cd - 8) {
    throw Error(ErrorCode::kMalformedZip, "signing block size out of range");
  }
  uint64_t start = cd - size - 8;
  if (LoadLe64(&apk[start]) != size) {
    throw Error(ErrorCode::kMalformedZip, "signing block size fields disagree");
  }
  loc.found = true;
  loc.start = start;
  loc.size = size;
  return loc;
}

Bytes EocdWithCdOffset(ByteView apk, const ZipSections& sections, uint64_t cd_offset) {
  Bytes eocd(apk.begin() + sections.eocd_offset, apk.end());
  StoreLe32(&eocd[16], static_cast<uint32_t>(cd_offset));
  return eocd;
}

bool VerifySignature(ByteView public_key_der, ByteView data, ByteView signature) {
  const uint8_t* p = public_key_der.data();
  std::unique_ptr<EVP_PKEY, decltype(&EVP_PKEY_free)> key(
      d2i_PUBKEY(nullptr, &p, static_cast<long>(public_key_der.size())), EVP_PKEY_free);
  if (!key) return false;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_PKEY_CTX* pctx = nullptr;
  if (EVP_DigestVerifyInit(ctx.get(), &pctx, EVP_sha256(), nullptr, key.get()) != 1) return false;
  if (EVP_PKEY_CTX_set_rsa_padding(pctx, RSA_PKCS1_PADDING) != 1) return false;
  return EVP_DigestVerify(ctx.get(), signature.data(), signature.size(), data.data(),
                          data.size()) == 1;
}

}  // namespace

SigningKey::SigningKey(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {
  CacheDerivedFields();
}
SigningKey::SigningKey(SigningKey&&) noexcept = default;
SigningKey& SigningKey::operator=(SigningKey&&) noexcept = default;
SigningKey::~SigningKey() = default;

void SigningKey::CacheDerivedFields() {
  certificate_der_ = ToDer(impl_->cert.get());
  public_key_der_ = PublicKeyDer(impl_->pkey.get());
  std::tm tm{};
  if (ASN1_TIME_to_tm(X509_get0_notBefore(impl_->cert.get()), &tm) == 1) {
    created_ = timegm(&tm);
  }
}

SigningKey SigningKey::Generate() {
  auto impl = std::make_unique<Impl>();
  impl->pkey.reset(EVP_RSA_gen(2048));
  if (!impl->pkey) CryptoFail("RSA key generation");

  impl->cert.reset(X509_new());
  X509* cert = impl->cert.get();
  X509_set_version(cert, 2);
  ASN1_INTEGER_set(X509_get_serialNumber(cert), 1);
  X509_gmtime_adj(X509_getm_notBefore(cert), 0);
  X509_gmtime_adj(X509_getm_notAfter(cert), kValiditySeconds);
  X509_set_pubkey(cert, impl->pkey.get());
  X509_NAME* name = X509_get_subject_name(cert);
  X509_NAME_add_entry_by_txt(name, "CN", MBSTRING_ASC,
                             reinterpret_cast<const unsigned char*>("appgrease user key"), -1, -1,
                             0);
  X509_NAME_add_entry_by_txt(name, "O", MBSTRING_ASC,
                             reinterpret_cast<const unsigned char*>("appgrease"), -1, -1, 0);
  X509_set_issuer_name(cert, name);
  if (X509_sign(cert, impl->pkey.get(), EVP_sha256()) <= 0) CryptoFail("certificate signing");
  return SigningKey(std::move(impl));
}

SigningKey SigningKey::FromPem(std::string_view pem) {
  auto corrupt = [](const std::string& why) { return Error(ErrorCode::kStoreCorrupt, why); };
  auto impl = std::make_unique<Impl>();
  {
    BioPtr bio(BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())), BIO_free);
    impl->pkey.reset(PEM_read_bio_PrivateKey(bio.get(), nullptr, nullptr, nullptr));
  }
  {
    BioPtr bio(BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())), BIO_free);
    impl->cert.reset(PEM_read_bio_X509(bio.get(), nullptr, nullptr, nullptr));
  }
  if (!impl->pkey) throw corrupt("no private key in store");
  if (!impl->cert) throw corrupt("no certificate in store");
  if (EVP_PKEY_get_base_id(impl->pkey.get()) != EVP_PKEY_RSA ||
      EVP_PKEY_get_bits(impl->pkey.get()) != 2048) {
    throw corrupt("store key is not RSA-2048");
  }
  if (X509_check_private_key(impl->cert.get(), impl->pkey.get()) != 1) {
    throw corrupt("certificate does not match private key");
  }
  return SigningKey(std::move(impl));
}

SigningKey SigningKey::LoadOrCreate(const std::string& path) {
  namespace fs = std::filesystem;
  if (fs::exists(path)) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot read key store " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return FromPem(ss.str());
  }
  SigningKey key = Generate();
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write key store " + path);
    out << key.ToPem();
    if (!out) throw Error(ErrorCode::kIo, "short write to key store " + path);
  }
  fs::permissions(tmp, fs::perms::owner_read | fs::perms::owner_write);
  fs::rename(tmp, p);
  return key;
}

std::string SigningKey::ToPem() const {
  BioPtr bio(BIO_new(BIO_s_mem()), BIO_free);
  if (PEM_write_bio_PrivateKey(bio.get(), impl_->pkey.get(), nullptr, nullptr, 0, nullptr,
                               nullptr) != 1 ||
      PEM_write_bio_X509(bio.get(), impl_->cert.get()) != 1) {
    CryptoFail("PEM encoding");
  }
  char* data = nullptr;
  long len = BIO_get_mem_data(bio.get(), &data);
  return std::string(data, static_cast<size_t>(len));
}

std::string SigningKey::Fingerprint() const { return Sha256Hex(certificate_der_); }

int SigningKey::ValidityDays() const {
  int days = 0, secs = 0;
  ASN1_TIME_diff(&days, &secs, X509_get0_notBefore(impl_->cert.get()),
                 X509_get0_notAfter(impl_->cert.get()));
  return days;
}

Bytes SigningKey::Sign(ByteView data) const {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_PKEY_CTX* pctx = nullptr;
  if (EVP_DigestSignInit(ctx.get(), &pctx, EVP_sha256(), nullptr, impl_->pkey.get()) != 1 ||
      EVP_PKEY_CTX_set_rsa_padding(pctx, RSA_PKCS1_PADDING) != 1) {
    CryptoFail("EVP_DigestSignInit");
  }
  size_t len = 0;
  if (EVP_DigestSign(ctx.get(), nullptr, &len, data.data(), data.size()) != 1) {
    CryptoFail("EVP_DigestSign size");
  }
  Bytes sig(len);
  if (EVP_DigestSign(ctx.get(), sig.data(), &len, data.data(), data.size()) != 1) {
    CryptoFail("EVP_DigestSign");
  }
  sig.resize(len);
  return sig;
}

Sha256Digest ComputeContentDigest(ByteView entries, ByteView central_directory, ByteView eocd,
                                  bool parallel) {
  std::array<ByteView, 3> sections = {entries, central_directory, eocd};
  std::vector<Sha256Digest> chunks =
      parallel ? kernels::ChunkDigestsParallel(sections, v2::kChunkSize)
               : kernels::ChunkDigestsSerial(sections, v2::kChunkSize);
  uint8_t prefix[5] = {0x5a};
  StoreLe32(prefix + 1, static_cast<uint32_t>(chunks.size()));
  Sha256Hasher h;
  h.Update(ByteView(prefix, 5));
  for (const Sha256Digest& d : chunks) h.Update(d);
  return h.Finish();
}

Bytes SignApk(ByteView apk, const SigningKey& key, const SignOptions& options) {
  ZipSections sections = LocateZipSections(apk);
  BlockLocation existing = FindSigningBlock(apk, sections);
  uint64_t entries_end = existing.found ? existing.start : sections.cd_offset;

  ByteView entries = apk.first(entries_end);
  ByteView cd = apk.subspan(sections.cd_offset, sections.eocd_offset - sections.cd_offset);
  Bytes eocd_for_digest = EocdWithCdOffset(apk, sections, entries_end);
  Sha256Digest digest =
      ComputeContentDigest(entries, cd, eocd_for_digest, options.parallel_digests);

  ByteWriter signed_data;
  {
    ByteWriter digest_item;
    digest_item.U32(v2::kRsaPkcs1Sha256);
    LengthPrefixed(digest_item, digest);
    ByteWriter digests;
    LengthPrefixed(digests, digest_item.bytes());
    LengthPrefixed(signed_data, digests.bytes());

    ByteWriter certs;
    LengthPrefixed(certs, key.certificate_der());
    LengthPrefixed(signed_data, certs.bytes());

    LengthPrefixed(signed_data, {});  // additional attributes
  }

  ByteWriter signer;
  LengthPrefixed(signer, signed_data.bytes());
  {
    ByteWriter sig_item;
    sig_item.U32(v2::kRsaPkcs1Sha256);
    LengthPrefixed(sig_item, key.Sign(signed_data.bytes()));
    ByteWriter sigs;
    LengthPrefixed(sigs, sig_item.bytes());
    LengthPrefixed(signer, sigs.bytes());
  }
  LengthPrefixed(signer, key.public_key_der());

  ByteWriter v2_value;
  {
    ByteWriter signers;
    LengthPrefixed(signers, signer.bytes());
    LengthPrefixed(v2_value, signers.bytes());
  }

  ByteWriter pairs;
  pairs.U64(4 + v2_value.size());
  pairs.U32(v2::kBlockId);
  pairs.Append(v2_value.bytes());

  uint64_t block_size = pairs.size() + 8 + kMagicSize;
  ByteWriter out;
  out.Append(entries);
  out.U64(block_size);
  out.Append(pairs.bytes());
  out.U64(block_size);
  out.Append(std::string_view(v2::kBlockMagic, kMagicSize));
  uint64_t new_cd_offset = out.size();
  out.Append(cd);
  Bytes eocd = EocdWithCdOffset(apk, sections, new_cd_offset);
  out.Append(eocd);
  return out.Release();
}

VerificationReport VerifyApk(ByteView apk) {
  VerificationReport report;
  auto fail = [&](VerifyStatus s, std::string detail) {
    report.status = s;
    report.detail = std::move(detail);
    return report;
  };

  ZipSections sections;
  BlockLocation block;
  try {
    sections = LocateZipSections(apk);
    block = FindSigningBlock(apk, sections);
  } catch (const Error& e) {
    return fail(VerifyStatus::kMalformedZip, e.what());
  }
  if (!block.found) return fail(VerifyStatus::kNoSigningBlock, "no APK signing block");

  try {
    ByteView pairs_view = apk.subspan(block.start + 8, block.size - 8 - kMagicSize);
    ByteReader pairs(pairs_view, ErrorCode::kMalformedZip);
    std::optional<ByteView> v2_value;
    while (pairs.remaining() > 0) {
      uint64_t len = pairs.U64();
      if (len < 4) pairs.Fail("pair too short");
      uint32_t id = pairs.U32();
      ByteView value = pairs.Take(len - 4);
      if (id == v2::kBlockId) v2_value = value;
    }
    if (!v2_value) return fail(VerifyStatus::kNoV2Signature, "no v2 block in signing block");

    ByteReader signers_outer(*v2_value, ErrorCode::kMalformedZip);
    ByteReader signers(TakePrefixed(signers_outer), ErrorCode::kMalformedZip);
    if (signers.remaining() == 0) return fail(VerifyStatus::kNoV2Signature, "no signers");

    std::optional<Sha256Digest> expected;
    while (signers.remaining() > 0) {
      ByteReader signer(TakePrefixed(signers), ErrorCode::kMalformedZip);
      ByteView signed_data = TakePrefixed(signer);
      ByteView signatures = TakePrefixed(signer);
      ByteView public_key = TakePrefixed(signer);

      ByteReader sigs(signatures, ErrorCode::kMalformedZip);
      std::optional<ByteView> signature;
      while (sigs.remaining() > 0) {
        ByteReader item(TakePrefixed(sigs), ErrorCode::kMalformedZip);
        uint32_t algo = item.U32();
        ByteView sig = TakePrefixed(item);
        if (algo == v2::kRsaPkcs1Sha256) signature = sig;
      }
      if (!signature) {
        return fail(VerifyStatus::kUnsupportedAlgorithm, "no RSA-PKCS1-SHA256 signature");
      }
      if (!VerifySignature(public_key, signed_data, *signature)) {
        return fail(VerifyStatus::kSignatureInvalid, "signature over signed data does not verify");
      }

      ByteReader sd(signed_data, ErrorCode::kMalformedZip);
      ByteReader digests(TakePrefixed(sd), ErrorCode::kMalformedZip);
      ByteReader certs(TakePrefixed(sd), ErrorCode::kMalformedZip);
      std::optional<ByteView> digest;
      while (digests.remaining() > 0) {
        ByteReader item(TakePrefixed(digests), ErrorCode::kMalformedZip);
        uint32_t algo = item.U32();
        ByteView d = TakePrefixed(item);
        if (algo == v2::kRsaPkcs1Sha256) digest = d;
      }
      if (!digest || digest->size() != 32) {
        return fail(VerifyStatus::kUnsupportedAlgorithm, "no SHA-256 content digest");
      }
      if (certs.remaining() == 0) return fail(VerifyStatus::kCertificateMismatch, "no certificate");
      ByteView cert_der = TakePrefixed(certs);
      const uint8_t* p = cert_der.data();
      std::unique_ptr<X509, decltype(&X509_free)> cert(
          d2i_X509(nullptr, &p, static_cast<long>(cert_der.size())), X509_free);
      if (!cert) return fail(VerifyStatus::kCertificateMismatch, "certificate does not parse");
      Bytes cert_key = PublicKeyDer(X509_get0_pubkey(cert.get()));
      if (!std::equal(cert_key.begin(), cert_key.end(), public_key.begin(), public_key.end())) {
        return fail(VerifyStatus::kCertificateMismatch, "certificate key differs from signer key");
      }
      Sha256Digest d;
      std::memcpy(d.data(), digest->data(), 32);
      if (expected && *expected != d) {
        return fail(VerifyStatus::kDigestMismatch, "signers disagree on content digest");
      }
      expected = d;
      if (report.certificate_fingerprint.empty()) report.certificate_fingerprint = Sha256Hex(cert_der);
    }

    ByteView entries = apk.first(block.start);
    ByteView cd = apk.subspan(sections.cd_offset, sections.eocd_offset - sections.cd_offset);
    Bytes eocd = EocdWithCdOffset(apk, sections, block.start);
    if (ComputeContentDigest(entries, cd, eocd) != *expected) {
      return fail(VerifyStatus::kDigestMismatch, "content digest does not match signed digest");
    }
  } catch (const Error& e) {
    return fail(VerifyStatus::kMalformedBlock, e.what());
  }
  return report;
}

std::string_view VerifyStatusName(VerifyStatus status) {
  switch (status) {
    case VerifyStatus::kOk: return "OK";
    case VerifyStatus::kMalformedZip: return "MalformedZip";
    case VerifyStatus::kNoSigningBlock: return "NoSigningBlock";
    case VerifyStatus::kMalformedBlock: return "MalformedBlock";
    case VerifyStatus::kNoV2Signature: return "NoV2Signature";
    case VerifyStatus::kUnsupportedAlgorithm: return "UnsupportedAlgorithm";
    case VerifyStatus::kSignatureInvalid: return "SignatureInvalid";
    case VerifyStatus::kCertificateMismatch: return "CertificateMismatch";
    case VerifyStatus::kDigestMismatch: return "DigestMismatch";
  }
  return "Unknown";
}

}  // namespace appgrease
