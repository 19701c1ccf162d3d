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

// Data-parallel inner loops. Every kernel has a serial reference with the
// same signature; the two must produce identical results for any input, and
// the tests and the benchmark compare them directly.

#include <cstdint>
#include <span>
#include <vector>

#include "appgrease/bytes.h"
#include "appgrease/digest.h"

namespace appgrease::kernels {

// ---- v2 signing: chunked content digests ---------------------------------

// SHA-256(0xa5 || le32(len) || chunk) for every chunk of every section, in
// order. Sections are split independently into chunks of chunk_size bytes.
std::vector<Sha256Digest> ChunkDigestsSerial(std::span<const ByteView> sections,
                                             size_t chunk_size);
std::vector<Sha256Digest> ChunkDigestsParallel(std::span<const ByteView> sections,
                                               size_t chunk_size);

// ---- delta encoding: rolling-hash block matching -------------------------

// rsync-style weak checksum over a window: low half = byte sum, high half =
// position-weighted sum, both mod 2^16.
struct RollingHash {
  uint32_t a = 0;
  uint32_t b = 0;
  size_t window = 0;

  static RollingHash Of(const uint8_t* data, size_t n);
  uint32_t value() const { return (a & 0xffff) | (b << 16); }
  void Roll(uint8_t out, uint8_t in) {
    a = (a - out + in) & 0xffff;
    b = (b - static_cast<uint32_t>(window) * out + a) & 0xffff;
  }
};

// (weak hash, block number) for every full block of `old`, sorted.
struct BlockIndex {
  size_t block_size = 0;
  std::vector<std::pair<uint32_t, uint32_t>> entries;
};

BlockIndex BuildBlockIndexSerial(ByteView old_data, size_t block_size);
BlockIndex BuildBlockIndexParallel(ByteView old_data, size_t block_size);

struct Span {
  enum class Kind : uint8_t { kCopy, kLiteral };
  Kind kind = Kind::kLiteral;
  uint64_t source = 0;  // old offset for kCopy, new offset for kLiteral
  uint64_t length = 0;

  friend bool operator==(const Span&, const Span&) = default;
};

// Greedy match search over fixed-size segments of `new_data`. Segments are
// scanned independently, then adjacent spans are coalesced, so the result
// does not depend on the thread count.
std::vector<Span> MatchSegmentsSerial(ByteView old_data, ByteView new_data,
                                      const BlockIndex& index, size_t segment_size);
std::vector<Span> MatchSegmentsParallel(ByteView old_data, ByteView new_data,
                                        const BlockIndex& index, size_t segment_size);

int MaxThreads();

}  // namespace appgrease::kernels
