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

#include "appgrease/pipeline.h"

#include "appgrease/error.h"
#include "appgrease/patchwire.h"

namespace appgrease {

std::string_view JobStateName(JobState state) {
  switch (state) {
    case JobState::kQueued: return "queued";
    case JobState::kDecoding: return "decoding";
    case JobState::kDetecting: return "detecting";
    case JobState::kApplying: return "applying";
    case JobState::kEncoding: return "encoding";
    case JobState::kSigning: return "signing";
    case JobState::kDiffing: return "diffing";
    case JobState::kDone: return "done";
    case JobState::kFailed: return "failed";
  }
  return "failed";
}

std::vector<std::string> NotApplicableIds(
    const DecodedApp& app, const std::vector<std::shared_ptr<const ExtensionPackage>>& extensions,
    const SignatureList& signatures) {
  std::vector<std::string> out;
  for (const auto& pkg : extensions) {
    if (!CheckApplicability(*pkg, app.manifest, app.dexes, signatures).applicable) {
      out.push_back(pkg->id);
    }
  }
  return out;
}

PipelineResult RunPipeline(const PipelineRequest& request, const SigningKey& key,
                           const SignatureList& signatures,
                           const std::function<void(JobState)>& on_state) {
  auto enter = [&](JobState s) {
    if (on_state) on_state(s);
  };
  PipelineResult result;

  enter(JobState::kDecoding);
  DecodedApp app = DecodeApp(request.original, request.tree);

  enter(JobState::kDetecting);
  result.hits = DetectTrackers(app, signatures);
  if (!request.force) {
    std::vector<std::string> rejected = NotApplicableIds(app, request.extensions, signatures);
    if (!rejected.empty()) {
      std::string ids;
      for (const std::string& id : rejected) ids += (ids.empty() ? "" : ", ") + id;
      throw Error(ErrorCode::kNotApplicable, "not applicable: " + ids);
    }
  }

  enter(JobState::kApplying);
  for (const auto& pkg : request.extensions) {
    ApplyOutcome outcome = ApplyExtension(app, *pkg, signatures);
    app = std::move(outcome.app);
    result.extensions.push_back({pkg->id, outcome.log.total_changes(), outcome.log.warnings(),
                                 outcome.log.actions});
  }
  result.tree = app.tree;

  enter(JobState::kEncoding);
  Bytes unsigned_apk = EncodeApp(app);

  enter(JobState::kSigning);
  result.signed_apk = SignApk(unsigned_apk, key);

  enter(JobState::kDiffing);
  result.patch = MakePatch(request.original, result.signed_apk).Encode();
  if (ApplyPatch(request.original, result.patch) != result.signed_apk) {
    throw Error(ErrorCode::kCorruptPatch, "patch does not rebuild the signed APK");
  }
  return result;
}

}  // namespace appgrease
