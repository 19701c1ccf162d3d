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

#include <stdexcept>
#include <string>
#include <string_view>

namespace appgrease {

enum class ErrorCode {
  // zip
  kMalformedZip,
  kUnsupportedCompression,
  kUnsupportedZipFeature,
  kCrcMismatch,
  kEntryNotFound,
  // axml
  kMalformedAxml,
  kCannotRemoveRoot,
  kStaleHandle,
  kSelectorParseError,
  // dex
  kMalformedDex,
  kDigestMismatch,
  kLengthMismatch,
  kStaleEntry,
  // extensions
  kInvalidManifest,
  kUnknownActionVariant,
  kActionFailed,
  kTreeModeUnavailable,
  kPatchContextMismatch,
  kNoFilesMatched,
  kNotApplicable,
  // signer
  kStoreCorrupt,
  kCryptoFailure,
  // patchwire
  kOldFileMismatch,
  kCorruptPatch,
  // generic
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures surface as this exception; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const { return code_; }
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace appgrease
