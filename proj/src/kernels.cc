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

#include "appgrease/kernels.h"

#include <algorithm>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace appgrease::kernels {
namespace {

struct ChunkRef {
  const uint8_t* data;
  size_t size;
};

std::vector<ChunkRef> SplitChunks(std::span<const ByteView> sections, size_t chunk_size) {
  std::vector<ChunkRef> chunks;
  for (ByteView s : sections) {
    for (size_t off = 0; off < s.size(); off += chunk_size) {
      chunks.push_back({s.data() + off, std::min(chunk_size, s.size() - off)});
    }
  }
  return chunks;
}

Sha256Digest DigestChunk(const ChunkRef& c) {
  uint8_t prefix[5] = {0xa5};
  StoreLe32(prefix + 1, static_cast<uint32_t>(c.size));
  Sha256Hasher h;
  h.Update(ByteView(prefix, 5));
  h.Update(ByteView(c.data, c.size));
  return h.Finish();
}

constexpr size_t kMaxCandidates = 64;

void Emit(std::vector<Span>& out, Span s) {
  if (s.length == 0) return;
  if (!out.empty()) {
    Span& last = out.back();
    if (last.kind == s.kind) {
      if (s.kind == Span::Kind::kLiteral && last.source + last.length == s.source) {
        last.length += s.length;
        return;
      }
      if (s.kind == Span::Kind::kCopy && last.source + last.length == s.source) {
        last.length += s.length;
        return;
      }
    }
  }
  out.push_back(s);
}

std::vector<Span> MatchSegment(ByteView old_data, ByteView new_data, const BlockIndex& index,
                               size_t begin, size_t end) {
  std::vector<Span> out;
  const size_t block = index.block_size;
  size_t literal_start = begin;
  size_t p = begin;
  if (block == 0 || index.entries.empty() || end - begin < block) {
    Emit(out, {Span::Kind::kLiteral, begin, end - begin});
    return out;
  }

  RollingHash rh = RollingHash::Of(new_data.data() + p, block);
  while (p + block <= end) {
    uint32_t weak = rh.value();
    auto range = std::equal_range(
        index.entries.begin(), index.entries.end(), std::make_pair(weak, 0u),
        [](const auto& x, const auto& y) { return x.first < y.first; });
    size_t checked = 0;
    bool matched = false;
    for (auto it = range.first; it != range.second && checked < kMaxCandidates; ++it, ++checked) {
      size_t ob = static_cast<size_t>(it->second) * block;
      if (std::memcmp(old_data.data() + ob, new_data.data() + p, block) != 0) continue;

      size_t nb = p;
      while (nb > literal_start && ob > 0 && old_data[ob - 1] == new_data[nb - 1]) {
        --ob;
        --nb;
      }
      size_t ne = p + block;
      size_t oe = static_cast<size_t>(it->second) * block + block;
      while (ne < end && oe < old_data.size() && old_data[oe] == new_data[ne]) {
        ++ne;
        ++oe;
      }
      Emit(out, {Span::Kind::kLiteral, literal_start, nb - literal_start});
      Emit(out, {Span::Kind::kCopy, ob, ne - nb});
      literal_start = ne;
      p = ne;
      if (p + block <= end) rh = RollingHash::Of(new_data.data() + p, block);
      matched = true;
      break;
    }
    if (matched) continue;
    if (p + block < end) rh.Roll(new_data[p], new_data[p + block]);
    ++p;
  }
  Emit(out, {Span::Kind::kLiteral, literal_start, end - literal_start});
  return out;
}

std::vector<Span> Coalesce(const std::vector<std::vector<Span>>& parts) {
  std::vector<Span> out;
  for (const auto& part : parts) {
    for (const Span& s : part) Emit(out, s);
  }
  return out;
}

size_t SegmentCount(size_t n, size_t segment_size) {
  return n == 0 ? 0 : (n + segment_size - 1) / segment_size;
}

}  // namespace

int MaxThreads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::vector<Sha256Digest> ChunkDigestsSerial(std::span<const ByteView> sections,
                                             size_t chunk_size) {
  std::vector<ChunkRef> chunks = SplitChunks(sections, chunk_size);
  std::vector<Sha256Digest> out(chunks.size());
  for (size_t i = 0; i < chunks.size(); ++i) out[i] = DigestChunk(chunks[i]);
  return out;
}

std::vector<Sha256Digest> ChunkDigestsParallel(std::span<const ByteView> sections,
                                               size_t chunk_size) {
  std::vector<ChunkRef> chunks = SplitChunks(sections, chunk_size);
  std::vector<Sha256Digest> out(chunks.size());
  const long n = static_cast<long>(chunks.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) out[i] = DigestChunk(chunks[i]);
  return out;
}

RollingHash RollingHash::Of(const uint8_t* data, size_t n) {
  RollingHash h;
  h.window = n;
  for (size_t i = 0; i < n; ++i) {
    h.a += data[i];
    h.b += static_cast<uint32_t>(n - i) * data[i];
  }
  h.a &= 0xffff;
  h.b &= 0xffff;
  return h;
}

BlockIndex BuildBlockIndexSerial(ByteView old_data, size_t block_size) {
  BlockIndex index;
  index.block_size = block_size;
  size_t blocks = block_size == 0 ? 0 : old_data.size() / block_size;
  index.entries.resize(blocks);
  for (size_t i = 0; i < blocks; ++i) {
    uint32_t h = RollingHash::Of(old_data.data() + i * block_size, block_size).value();
    index.entries[i] = {h, static_cast<uint32_t>(i)};
  }
  std::sort(index.entries.begin(), index.entries.end());
  return index;
}

BlockIndex BuildBlockIndexParallel(ByteView old_data, size_t block_size) {
  BlockIndex index;
  index.block_size = block_size;
  const long blocks = block_size == 0 ? 0 : static_cast<long>(old_data.size() / block_size);
  index.entries.resize(static_cast<size_t>(blocks));
#pragma omp parallel for schedule(static)
  for (long i = 0; i < blocks; ++i) {
    uint32_t h = RollingHash::Of(old_data.data() + i * block_size, block_size).value();
    index.entries[i] = {h, static_cast<uint32_t>(i)};
  }
  std::sort(index.entries.begin(), index.entries.end());
  return index;
}

std::vector<Span> MatchSegmentsSerial(ByteView old_data, ByteView new_data,
                                      const BlockIndex& index, size_t segment_size) {
  size_t segments = SegmentCount(new_data.size(), segment_size);
  std::vector<std::vector<Span>> parts(segments);
  for (size_t s = 0; s < segments; ++s) {
    size_t begin = s * segment_size;
    size_t end = std::min(new_data.size(), begin + segment_size);
    parts[s] = MatchSegment(old_data, new_data, index, begin, end);
  }
  return Coalesce(parts);
}

std::vector<Span> MatchSegmentsParallel(ByteView old_data, ByteView new_data,
                                        const BlockIndex& index, size_t segment_size) {
  const long segments = static_cast<long>(SegmentCount(new_data.size(), segment_size));
  std::vector<std::vector<Span>> parts(static_cast<size_t>(segments));
#pragma omp parallel for schedule(dynamic, 1)
  for (long s = 0; s < segments; ++s) {
    size_t begin = static_cast<size_t>(s) * segment_size;
    size_t end = std::min(new_data.size(), begin + segment_size);
    parts[s] = MatchSegment(old_data, new_data, index, begin, end);
  }
  return Coalesce(parts);
}

}  // namespace appgrease::kernels
