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

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "appgrease/extension.h"
#include "appgrease/signer.h"

namespace appgrease {

enum class JobState { kQueued, kDecoding, kDetecting, kApplying, kEncoding, kSigning, kDiffing, kDone, kFailed };

std::string_view JobStateName(JobState state);

struct ExtensionSummary {
  std::string id;
  int changes = 0;
  std::vector<std::string> warnings;
  std::vector<ActionRecord> actions;
};

struct PipelineRequest {
  Bytes original;
  std::vector<std::shared_ptr<const ExtensionPackage>> extensions;  // applied in this order
  bool force = false;
  std::optional<DecodedTree> tree;
};

struct PipelineResult {
  Bytes signed_apk;
  Bytes patch;  // encoded PatchSet from the original to signed_apk
  std::vector<ExtensionSummary> extensions;
  std::vector<DetectionHit> hits;
  std::optional<DecodedTree> tree;
};

// Ids of the extensions whose applicability rules fail for `app`.
std::vector<std::string> NotApplicableIds(
    const DecodedApp& app, const std::vector<std::shared_ptr<const ExtensionPackage>>& extensions,
    const SignatureList& signatures);

// decode -> detect -> apply -> encode -> sign -> diff. `on_state` sees each
// stage as it starts. Throws NotApplicable (unless forced) and anything the
// stages raise; the result's patch has been checked to rebuild signed_apk.
PipelineResult RunPipeline(const PipelineRequest& request, const SigningKey& key,
                           const SignatureList& signatures,
                           const std::function<void(JobState)>& on_state = {});

}  // namespace appgrease
