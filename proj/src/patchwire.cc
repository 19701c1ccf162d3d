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

#include "appgrease/patchwire.h"

#include <cstring>

#include "appgrease/kernels.h"
#include "appgrease/zip_archive.h"

namespace appgrease {
namespace {

constexpr char kMagic[4] = {'A', 'X', 'P', 'W'};
constexpr uint16_t kFlagDeflatedLiterals = 0x0001;
constexpr uint8_t kOpCopy = 0x01;
constexpr uint8_t kOpInsert = 0x02;

[[noreturn]] void Corrupt(const std::string& what) {
  throw Error(ErrorCode::kCorruptPatch, what);
}

}  // namespace

Bytes PatchSet::Encode() const {
  ByteWriter ops_stream;
  ByteWriter literals;
  for (const PatchOp& op : ops) {
    if (const auto* c = std::get_if<CopyOp>(&op)) {
      ops_stream.U8(kOpCopy);
      ops_stream.Varint(c->offset);
      ops_stream.Varint(c->length);
    } else {
      const auto& ins = std::get<InsertOp>(op);
      ops_stream.U8(kOpInsert);
      ops_stream.Varint(ins.bytes.size());
      literals.Append(ins.bytes);
    }
  }
  Bytes literal_section = literals.Release();
  const uint64_t raw_literal_size = literal_section.size();
  uint16_t flags = 0;
  if (compress_literals && !literal_section.empty()) {
    Bytes deflated = DeflateRaw(literal_section);
    if (deflated.size() < literal_section.size()) {
      literal_section = std::move(deflated);
      flags |= kFlagDeflatedLiterals;
    }
  }

  ByteWriter out;
  out.Append(std::string_view(kMagic, 4));
  out.U16(version);
  out.U16(flags);
  out.Append(old_digest);
  out.Append(new_digest);
  out.U64(new_length);
  out.U64(ops.size());
  out.U64(ops_stream.size());
  out.U64(literal_section.size());
  out.U64(raw_literal_size);
  out.Append(ops_stream.bytes());
  out.Append(literal_section);
  return out.Release();
}

PatchSet PatchSet::Decode(ByteView bytes) {
  ByteReader r(bytes, ErrorCode::kCorruptPatch);
  if (bytes.size() < kPatchHeaderSize) Corrupt("truncated header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) Corrupt("bad magic");
  r.Skip(4);
  PatchSet p;
  p.version = r.U16();
  if (p.version != kPatchFormatVersion) Corrupt("unsupported version " + std::to_string(p.version));
  uint16_t flags = r.U16();
  if (flags & ~kFlagDeflatedLiterals) Corrupt("unknown flags");
  p.compress_literals = (flags & kFlagDeflatedLiterals) != 0;
  ByteView od = r.Take(32);
  ByteView nd = r.Take(32);
  std::memcpy(p.old_digest.data(), od.data(), 32);
  std::memcpy(p.new_digest.data(), nd.data(), 32);
  p.new_length = r.U64();
  uint64_t op_count = r.U64();
  uint64_t ops_len = r.U64();
  uint64_t literal_len = r.U64();
  uint64_t raw_literal_len = r.U64();
  if (ops_len > r.remaining() || literal_len != r.remaining() - ops_len) {
    Corrupt("section lengths do not match patch size");
  }
  // Every op takes at least two bytes; bounds the allocation below.
  if (op_count > ops_len / 2) Corrupt("op count exceeds stream length");
  ByteView ops_bytes = r.Take(ops_len);
  ByteView literal_bytes = r.Take(literal_len);

  Bytes literals;
  if (flags & kFlagDeflatedLiterals) {
    // Deflate expands at most ~1032:1.
    if (raw_literal_len > literal_len * 1032 + 64) Corrupt("implausible literal size");
    literals = InflateRaw(literal_bytes, raw_literal_len, ErrorCode::kCorruptPatch);
  } else {
    if (raw_literal_len != literal_len) Corrupt("literal length mismatch");
    literals.assign(literal_bytes.begin(), literal_bytes.end());
  }

  ByteReader ops(ops_bytes, ErrorCode::kCorruptPatch);
  size_t literal_pos = 0;
  p.ops.reserve(op_count);
  for (uint64_t i = 0; i < op_count; ++i) {
    uint8_t code = ops.U8();
    if (code == kOpCopy) {
      CopyOp c;
      c.offset = ops.Varint();
      c.length = ops.Varint();
      p.ops.emplace_back(c);
    } else if (code == kOpInsert) {
      uint64_t n = ops.Varint();
      if (n > literals.size() - literal_pos) Corrupt("insert overruns literal section");
      InsertOp ins;
      ins.bytes.assign(literals.begin() + literal_pos, literals.begin() + literal_pos + n);
      literal_pos += n;
      p.ops.emplace_back(std::move(ins));
    } else {
      Corrupt("unknown opcode " + std::to_string(code));
    }
  }
  if (ops.remaining() != 0) Corrupt("trailing bytes in op stream");
  if (literal_pos != literals.size()) Corrupt("unused literal bytes");
  return p;
}

PatchSet MakePatch(ByteView old_data, ByteView new_data, const PatchOptions& options) {
  PatchSet patch;
  patch.old_digest = Sha256(old_data);
  patch.new_digest = Sha256(new_data);
  patch.new_length = new_data.size();
  patch.compress_literals = options.compress_literals;

  kernels::BlockIndex index =
      options.parallel ? kernels::BuildBlockIndexParallel(old_data, options.block_size)
                       : kernels::BuildBlockIndexSerial(old_data, options.block_size);
  std::vector<kernels::Span> spans =
      options.parallel
          ? kernels::MatchSegmentsParallel(old_data, new_data, index, options.segment_size)
          : kernels::MatchSegmentsSerial(old_data, new_data, index, options.segment_size);

  for (const kernels::Span& s : spans) {
    if (s.kind == kernels::Span::Kind::kCopy) {
      patch.ops.emplace_back(CopyOp{s.source, s.length});
    } else {
      InsertOp ins;
      ins.bytes.assign(new_data.begin() + s.source, new_data.begin() + s.source + s.length);
      patch.ops.emplace_back(std::move(ins));
    }
  }
  return patch;
}

Bytes ApplyPatch(ByteView old_data, const PatchSet& patch) {
  if (Sha256(old_data) != patch.old_digest) {
    throw Error(ErrorCode::kOldFileMismatch, "old file digest does not match patch");
  }
  Bytes out;
  out.reserve(std::min<uint64_t>(patch.new_length, uint64_t{1} << 30));
  for (const PatchOp& op : patch.ops) {
    if (const auto* c = std::get_if<CopyOp>(&op)) {
      if (c->offset > old_data.size() || c->length > old_data.size() - c->offset) {
        Corrupt("copy range outside old file");
      }
      if (c->length > patch.new_length - out.size()) Corrupt("output exceeds declared length");
      out.insert(out.end(), old_data.begin() + c->offset, old_data.begin() + c->offset + c->length);
    } else {
      const auto& ins = std::get<InsertOp>(op);
      if (ins.bytes.size() > patch.new_length - out.size()) {
        Corrupt("output exceeds declared length");
      }
      out.insert(out.end(), ins.bytes.begin(), ins.bytes.end());
    }
  }
  if (out.size() != patch.new_length) Corrupt("output shorter than declared length");
  if (Sha256(out) != patch.new_digest) Corrupt("output digest mismatch");
  return out;
}

Bytes ApplyPatch(ByteView old_data, ByteView encoded_patch) {
  return ApplyPatch(old_data, PatchSet::Decode(encoded_patch));
}

}  // namespace appgrease
