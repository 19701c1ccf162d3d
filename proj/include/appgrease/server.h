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

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "appgrease/pipeline.h"
#include "appgrease/repository.h"
#include "appgrease/signer.h"

namespace appgrease {

struct ServerConfig {
  std::filesystem::path data_dir;
  std::filesystem::path extensions_dir;
  std::string signatures_path;  // empty: no signatures
  size_t max_upload_bytes = 200u << 20;
  int workers = 2;
};

struct AppRecord {
  std::string id;
  std::string package;
  int64_t version_code = 0;
  std::string version_name;
  int64_t uploaded_at = 0;  // unix seconds
  std::string sha256;
  uint64_t size = 0;
};

struct JobRecord {
  std::string id;
  std::string app_id;
  std::vector<std::string> requested;  // canonical extension ids, in order
  bool force = false;
  JobState state = JobState::kQueued;
  std::vector<ExtensionSummary> results;  // filled once applying completes
  std::string error;
  std::string apk_sha256;
  std::string patch_sha256;
};

// Upload store, job queue and worker pool. Thread-safe; the HTTP layer in
// HttpServer is a thin adapter over it.
class Service {
 public:
  Service(ServerConfig config, SigningKey key);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  const ServerConfig& config() const { return config_; }
  const SigningKey& key() const { return key_; }

  // Throws MalformedZip / MalformedAxml / MalformedDex for non-APK bodies.
  AppRecord AddApp(ByteView apk);
  std::optional<AppRecord> FindApp(const std::string& id) const;
  std::vector<AppRecord> Apps() const;
  Bytes Original(const std::string& app_id) const;  // throws EntryNotFound

  std::shared_ptr<const Repository> repository() const { return repo_->Snapshot(); }
  std::shared_ptr<const SignatureList> signatures() const;
  // Reloads packages and the signature list; returns the package count.
  size_t ReloadRepository();

  struct Submission {
    enum class Status { kAccepted, kUnknownApp, kUnknownExtension, kNotApplicable, kEmpty };
    Status status = Status::kAccepted;
    std::string job_id;
    std::vector<std::string> ids;  // offending ids for the error cases
  };
  Submission Submit(const std::string& app_id, const std::vector<std::string>& extension_ids,
                    bool force);
  std::optional<JobRecord> FindJob(const std::string& id) const;
  std::optional<Bytes> JobArtifact(const std::string& id, const std::string& name) const;
  // Blocks until the job reaches done or failed, or the timeout expires.
  std::optional<JobRecord> WaitForJob(const std::string& id, int timeout_ms) const;

  void Shutdown();

 private:
  struct Job {
    JobRecord record;
    std::vector<std::shared_ptr<const ExtensionPackage>> packages;
  };

  std::filesystem::path AppDir(const std::string& id) const;
  std::filesystem::path JobDir(const std::string& id) const;
  void LoadState();
  void SaveIndex();
  void SaveJob(const JobRecord& record);
  void SetState(const std::string& id, JobState state);
  void WorkerLoop();
  void RunJob(const std::string& id);

  ServerConfig config_;
  SigningKey key_;
  std::unique_ptr<RepositoryIndex> repo_;

  mutable std::mutex mu_;
  mutable std::condition_variable job_changed_;
  std::condition_variable queue_cv_;
  std::map<std::string, AppRecord> apps_;
  std::map<std::string, std::shared_ptr<Job>> jobs_;
  std::deque<std::string> queue_;
  uint64_t next_app_ = 1;
  uint64_t next_job_ = 1;
  std::shared_ptr<const SignatureList> signatures_;
  bool stopping_ = false;
  std::vector<std::thread> workers_;
};

class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  // Binds `host:port` (port 0 picks a free one) and returns the bound port.
  // Throws Io with a "BindFailed" message when the address is unavailable.
  int Bind(const std::string& host, int port);
  // Serves until Stop(); call after Bind.
  void Listen();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace appgrease
