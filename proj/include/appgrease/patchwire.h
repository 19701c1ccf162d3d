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
#include <variant>
#include <vector>

#include "appgrease/bytes.h"
#include "appgrease/digest.h"

namespace appgrease {

struct CopyOp {
  uint64_t offset = 0;
  uint64_t length = 0;
  friend bool operator==(const CopyOp&, const CopyOp&) = default;
};

struct InsertOp {
  Bytes bytes;
  friend bool operator==(const InsertOp&, const InsertOp&) = default;
};

using PatchOp = std::variant<CopyOp, InsertOp>;

inline constexpr uint16_t kPatchFormatVersion = 1;
inline constexpr size_t kPatchHeaderSize = 112;

// Delta from an old file to a new one. Wire layout (little-endian):
//   0  "AXPW"             4  u16 version        6  u16 flags (bit0: literals deflated)
//   8  old SHA-256       40  new SHA-256       72  u64 new length
//  80  u64 op count      88  u64 op stream len 96  u64 literal section len (stored)
// 104  u64 literal section len (raw)           112 op stream, then literal section
// Ops: 0x01 COPY varint(offset) varint(length); 0x02 INSERT varint(length).
struct PatchSet {
  uint16_t version = kPatchFormatVersion;
  Sha256Digest old_digest{};
  Sha256Digest new_digest{};
  uint64_t new_length = 0;
  std::vector<PatchOp> ops;
  bool compress_literals = true;

  Bytes Encode() const;
  static PatchSet Decode(ByteView bytes);  // throws CorruptPatch

  friend bool operator==(const PatchSet&, const PatchSet&) = default;
};

struct PatchOptions {
  size_t block_size = 4096;
  size_t segment_size = 1 << 20;
  bool parallel = true;
  bool compress_literals = true;
};

PatchSet MakePatch(ByteView old_data, ByteView new_data, const PatchOptions& options = {});

// Throws OldFileMismatch when old_data is not the file the patch was made
// against, CorruptPatch for any inconsistency in the instruction stream.
Bytes ApplyPatch(ByteView old_data, const PatchSet& patch);
Bytes ApplyPatch(ByteView old_data, ByteView encoded_patch);

}  // namespace appgrease
