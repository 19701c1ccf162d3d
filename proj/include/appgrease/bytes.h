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

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "appgrease/error.h"

namespace appgrease {

using Bytes = std::vector<uint8_t>;
using ByteView = std::span<const uint8_t>;

inline ByteView AsBytes(std::string_view s) {
  return {reinterpret_cast<const uint8_t*>(s.data()), s.size()};
}

inline Bytes ToBytes(std::string_view s) {
  return Bytes(s.begin(), s.end());
}

inline std::string ToString(ByteView b) {
  return std::string(reinterpret_cast<const char*>(b.data()), b.size());
}

inline uint16_t LoadLe16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

inline uint32_t LoadLe32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

inline uint64_t LoadLe64(const uint8_t* p) {
  return static_cast<uint64_t>(LoadLe32(p)) | (static_cast<uint64_t>(LoadLe32(p + 4)) << 32);
}

inline void StoreLe16(uint8_t* p, uint16_t v) {
  p[0] = static_cast<uint8_t>(v);
  p[1] = static_cast<uint8_t>(v >> 8);
}

inline void StoreLe32(uint8_t* p, uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<uint8_t>(v >> (8 * i));
}

inline void StoreLe64(uint8_t* p, uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = static_cast<uint8_t>(v >> (8 * i));
}

// Bounds-checked little-endian cursor. Every overrun throws Error(error_code).
class ByteReader {
 public:
  ByteReader(ByteView data, ErrorCode error_code) : data_(data), error_code_(error_code) {}

  size_t pos() const { return pos_; }
  size_t size() const { return data_.size(); }
  size_t remaining() const { return data_.size() - pos_; }
  ByteView data() const { return data_; }

  void Seek(size_t pos) {
    if (pos > data_.size()) Fail("seek past end");
    pos_ = pos;
  }

  void Skip(size_t n) {
    Need(n);
    pos_ += n;
  }

  uint8_t U8() {
    Need(1);
    return data_[pos_++];
  }

  uint16_t U16() {
    Need(2);
    uint16_t v = LoadLe16(&data_[pos_]);
    pos_ += 2;
    return v;
  }

  uint32_t U32() {
    Need(4);
    uint32_t v = LoadLe32(&data_[pos_]);
    pos_ += 4;
    return v;
  }

  uint64_t U64() {
    Need(8);
    uint64_t v = LoadLe64(&data_[pos_]);
    pos_ += 8;
    return v;
  }

  uint64_t Varint() {
    uint64_t result = 0;
    for (int shift = 0; shift < 64; shift += 7) {
      uint8_t b = U8();
      result |= static_cast<uint64_t>(b & 0x7f) << shift;
      if ((b & 0x80) == 0) return result;
    }
    Fail("varint too long");
  }

  ByteView Take(size_t n) {
    Need(n);
    ByteView out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  [[noreturn]] void Fail(const std::string& what) const {
    throw Error(error_code_, what + " at offset " + std::to_string(pos_));
  }

 private:
  void Need(size_t n) const {
    if (n > data_.size() - pos_) Fail("truncated input (need " + std::to_string(n) + " bytes)");
  }

  ByteView data_;
  ErrorCode error_code_;
  size_t pos_ = 0;
};

class ByteWriter {
 public:
  size_t size() const { return out_.size(); }
  Bytes& bytes() { return out_; }
  Bytes Release() { return std::move(out_); }

  void U8(uint8_t v) { out_.push_back(v); }
  void U16(uint16_t v) {
    uint8_t b[2];
    StoreLe16(b, v);
    out_.insert(out_.end(), b, b + 2);
  }
  void U32(uint32_t v) {
    uint8_t b[4];
    StoreLe32(b, v);
    out_.insert(out_.end(), b, b + 4);
  }
  void U64(uint64_t v) {
    uint8_t b[8];
    StoreLe64(b, v);
    out_.insert(out_.end(), b, b + 8);
  }
  void Varint(uint64_t v) {
    while (v >= 0x80) {
      out_.push_back(static_cast<uint8_t>(v | 0x80));
      v >>= 7;
    }
    out_.push_back(static_cast<uint8_t>(v));
  }
  void Append(ByteView b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void Append(std::string_view s) { Append(AsBytes(s)); }
  void Zeros(size_t n) { out_.insert(out_.end(), n, 0); }
  void PatchU32(size_t at, uint32_t v) { StoreLe32(&out_[at], v); }
  void PatchU16(size_t at, uint16_t v) { StoreLe16(&out_[at], v); }
  void PatchU64(size_t at, uint64_t v) { StoreLe64(&out_[at], v); }
  void AlignTo(size_t alignment) {
    while (out_.size() % alignment != 0) out_.push_back(0);
  }

 private:
  Bytes out_;
};

std::string HexEncode(ByteView data);

}  // namespace appgrease
