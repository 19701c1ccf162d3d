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

#include "appgrease/server.h"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iterator>

#include "appgrease/error.h"
#include "httplib.h"
#include "json.hpp"

namespace appgrease {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kApkMime = "application/vnd.android.package-archive";
constexpr const char* kOctetMime = "application/octet-stream";

Bytes ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  return Bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void WriteFileAtomic(const fs::path& path, ByteView data) {
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

void WriteJson(const fs::path& path, const json& j) {
  std::string text = j.dump(2) + "\n";
  WriteFileAtomic(path, AsBytes(text));
}

json ReadJson(const fs::path& path) {
  Bytes data = ReadFile(path);
  try {
    return json::parse(data.begin(), data.end());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kStoreCorrupt, path.string() + ": " + e.what());
  }
}

json ToJson(const AppRecord& r) {
  return {{"id", r.id},
          {"package", r.package},
          {"version_code", r.version_code},
          {"version_name", r.version_name},
          {"uploaded_at", r.uploaded_at},
          {"sha256", r.sha256},
          {"size", r.size}};
}

AppRecord AppFromJson(const json& j) {
  AppRecord r;
  r.id = j.at("id").get<std::string>();
  r.package = j.at("package").get<std::string>();
  r.version_code = j.at("version_code").get<int64_t>();
  r.version_name = j.at("version_name").get<std::string>();
  r.uploaded_at = j.at("uploaded_at").get<int64_t>();
  r.sha256 = j.at("sha256").get<std::string>();
  r.size = j.at("size").get<uint64_t>();
  return r;
}

JobState StateFromName(const std::string& name) {
  for (int s = 0; s <= static_cast<int>(JobState::kFailed); ++s) {
    if (JobStateName(static_cast<JobState>(s)) == name) return static_cast<JobState>(s);
  }
  throw Error(ErrorCode::kStoreCorrupt, "unknown job state " + name);
}

bool Terminal(JobState s) { return s == JobState::kDone || s == JobState::kFailed; }

// Public status document: requested extensions in order, with results once known.
json StatusJson(const JobRecord& r) {
  json exts = json::array();
  for (size_t i = 0; i < r.requested.size(); ++i) {
    json e = {{"id", r.requested[i]}, {"changes", nullptr}, {"warnings", json::array()}};
    if (i < r.results.size()) {
      e["changes"] = r.results[i].changes;
      e["warnings"] = r.results[i].warnings;
    }
    exts.push_back(std::move(e));
  }
  json j = {{"id", r.id},
            {"app_id", r.app_id},
            {"state", std::string(JobStateName(r.state))},
            {"extensions", std::move(exts)},
            {"error", r.error.empty() ? json(nullptr) : json(r.error)},
            {"force", r.force}};
  if (!r.apk_sha256.empty()) j["apk_sha256"] = r.apk_sha256;
  if (!r.patch_sha256.empty()) j["patch_sha256"] = r.patch_sha256;
  return j;
}

JobRecord JobFromJson(const json& j) {
  JobRecord r;
  r.id = j.at("id").get<std::string>();
  r.app_id = j.at("app_id").get<std::string>();
  r.state = StateFromName(j.at("state").get<std::string>());
  r.force = j.value("force", false);
  if (j.contains("error") && j["error"].is_string()) r.error = j["error"].get<std::string>();
  r.apk_sha256 = j.value("apk_sha256", "");
  r.patch_sha256 = j.value("patch_sha256", "");
  for (const json& e : j.at("extensions")) {
    r.requested.push_back(e.at("id").get<std::string>());
    if (e.contains("changes") && e["changes"].is_number()) {
      r.results.push_back({r.requested.back(), e["changes"].get<int>(),
                           e.value("warnings", std::vector<std::string>{}), {}});
    }
  }
  return r;
}

json ExtensionJson(const ExtensionPackage& pkg) {
  json j = {{"id", pkg.id},
            {"short_name", pkg.ShortName()},
            {"name", pkg.name},
            {"description", pkg.description},
            {"category", std::string(CategoryName(pkg.category))},
            {"scope", pkg.scope == Scope::kAppSpecific ? "app-specific" : "app-agnostic"},
            {"actions", pkg.actions.size()}};
  json rules = json::array();
  for (const ApplicabilityRule& r : pkg.applicability) {
    rules.push_back({{"kind", std::string(RuleKindName(r.kind))}, {"argument", r.argument}});
  }
  j["applicability"] = std::move(rules);
  return j;
}

json HitJson(const DetectionHit& h) {
  return {{"tracker", h.tracker},
          {"pattern", h.pattern},
          {"dex_path", h.dex_path},
          {"string_index", h.string_index}};
}

int64_t NowSeconds() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

// ---------------------------------------------------------------------------
// Service

Service::Service(ServerConfig config, SigningKey key)
    : config_(std::move(config)),
      key_(std::move(key)),
      repo_(std::make_unique<RepositoryIndex>(config_.extensions_dir)) {
  if (!config_.extensions_dir.empty()) repo_->Reload();
  signatures_ = std::make_shared<const SignatureList>(
      config_.signatures_path.empty() ? SignatureList{} : SignatureList::Load(config_.signatures_path));
  fs::create_directories(config_.data_dir / "apps");
  fs::create_directories(config_.data_dir / "jobs");
  LoadState();
  int n = config_.workers < 1 ? 1 : config_.workers;
  for (int i = 0; i < n; ++i) workers_.emplace_back([this] { WorkerLoop(); });
}

Service::~Service() { Shutdown(); }

void Service::Shutdown() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (stopping_ && workers_.empty()) return;
    stopping_ = true;
  }
  queue_cv_.notify_all();
  for (std::thread& t : workers_) t.join();
  workers_.clear();
}

fs::path Service::AppDir(const std::string& id) const { return config_.data_dir / "apps" / id; }
fs::path Service::JobDir(const std::string& id) const { return config_.data_dir / "jobs" / id; }

void Service::LoadState() {
  fs::path index = config_.data_dir / "index.json";
  if (fs::exists(index)) {
    json j = ReadJson(index);
    next_app_ = j.value("next_app", uint64_t{1});
    next_job_ = j.value("next_job", uint64_t{1});
  }
  for (const fs::directory_entry& e : fs::directory_iterator(config_.data_dir / "apps")) {
    fs::path rec = e.path() / "record.json";
    if (!fs::exists(rec) || !fs::exists(e.path() / "original.apk")) continue;
    AppRecord r = AppFromJson(ReadJson(rec));
    apps_[r.id] = r;
  }
  std::vector<std::pair<uint64_t, std::string>> pending;
  auto repo = repo_->Snapshot();
  for (const fs::directory_entry& e : fs::directory_iterator(config_.data_dir / "jobs")) {
    fs::path status = e.path() / "status.json";
    if (!fs::exists(status)) continue;
    auto job = std::make_shared<Job>();
    job->record = JobFromJson(ReadJson(status));
    if (!Terminal(job->record.state)) {
      // Interrupted by a restart: run again from the start.
      job->record.state = JobState::kQueued;
      job->record.results.clear();
      for (const std::string& id : job->record.requested) {
        auto pkg = repo->Find(id);
        if (!pkg) {
          job->record.state = JobState::kFailed;
          job->record.error = "extension " + id + " is no longer in the repository";
          break;
        }
        job->packages.push_back(pkg);
      }
      SaveJob(job->record);
      if (job->record.state == JobState::kQueued) {
        pending.emplace_back(std::strtoull(job->record.id.c_str() + 4, nullptr, 10), job->record.id);
      }
    }
    jobs_[job->record.id] = job;
  }
  std::sort(pending.begin(), pending.end());
  for (const auto& [n, id] : pending) queue_.push_back(id);
}

void Service::SaveIndex() {
  WriteJson(config_.data_dir / "index.json", {{"next_app", next_app_}, {"next_job", next_job_}});
}

void Service::SaveJob(const JobRecord& record) {
  WriteJson(JobDir(record.id) / "status.json", StatusJson(record));
}

AppRecord Service::AddApp(ByteView apk) {
  DecodedApp app = DecodeApp(apk);
  ManifestInfo info = ReadManifestInfo(app.manifest);
  AppRecord r;
  r.package = info.package;
  r.version_code = info.version_code;
  r.version_name = info.version_name;
  r.uploaded_at = NowSeconds();
  r.sha256 = Sha256Hex(apk);
  r.size = apk.size();

  std::lock_guard<std::mutex> lock(mu_);
  r.id = "app-" + std::to_string(next_app_++);
  WriteFileAtomic(AppDir(r.id) / "original.apk", apk);
  WriteJson(AppDir(r.id) / "record.json", ToJson(r));
  SaveIndex();
  apps_[r.id] = r;
  return r;
}

std::optional<AppRecord> Service::FindApp(const std::string& id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = apps_.find(id);
  if (it == apps_.end()) return std::nullopt;
  return it->second;
}

std::vector<AppRecord> Service::Apps() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<AppRecord> out;
  for (const auto& [id, r] : apps_) out.push_back(r);
  std::sort(out.begin(), out.end(), [](const AppRecord& a, const AppRecord& b) {
    return a.id.size() != b.id.size() ? a.id.size() < b.id.size() : a.id < b.id;
  });
  return out;
}

Bytes Service::Original(const std::string& app_id) const {
  if (!FindApp(app_id)) throw Error(ErrorCode::kEntryNotFound, "no app " + app_id);
  return ReadFile(AppDir(app_id) / "original.apk");
}

std::shared_ptr<const SignatureList> Service::signatures() const {
  std::lock_guard<std::mutex> lock(mu_);
  return signatures_;
}

size_t Service::ReloadRepository() {
  auto fresh = std::make_shared<const SignatureList>(
      config_.signatures_path.empty() ? SignatureList{} : SignatureList::Load(config_.signatures_path));
  size_t n = config_.extensions_dir.empty() ? 0 : repo_->Reload();
  std::lock_guard<std::mutex> lock(mu_);
  signatures_ = fresh;
  return n;
}

Service::Submission Service::Submit(const std::string& app_id,
                                    const std::vector<std::string>& extension_ids, bool force) {
  Submission sub;
  if (!FindApp(app_id)) {
    sub.status = Submission::Status::kUnknownApp;
    sub.ids = {app_id};
    return sub;
  }
  if (extension_ids.empty()) {
    sub.status = Submission::Status::kEmpty;
    return sub;
  }
  auto repo = repository();
  auto job = std::make_shared<Job>();
  for (const std::string& id : extension_ids) {
    auto pkg = repo->Find(id);
    if (!pkg) {
      sub.ids.push_back(id);
      continue;
    }
    job->packages.push_back(pkg);
    job->record.requested.push_back(pkg->id);
  }
  if (!sub.ids.empty()) {
    sub.status = Submission::Status::kUnknownExtension;
    return sub;
  }
  if (!force) {
    DecodedApp app = DecodeApp(Original(app_id));
    sub.ids = NotApplicableIds(app, job->packages, *signatures());
    if (!sub.ids.empty()) {
      sub.status = Submission::Status::kNotApplicable;
      return sub;
    }
  }
  job->record.app_id = app_id;
  job->record.force = force;
  {
    std::lock_guard<std::mutex> lock(mu_);
    job->record.id = "job-" + std::to_string(next_job_++);
    SaveJob(job->record);
    SaveIndex();
    jobs_[job->record.id] = job;
    queue_.push_back(job->record.id);
    sub.job_id = job->record.id;
  }
  queue_cv_.notify_one();
  return sub;
}

std::optional<JobRecord> Service::FindJob(const std::string& id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second->record;
}

std::optional<Bytes> Service::JobArtifact(const std::string& id, const std::string& name) const {
  fs::path path = JobDir(id) / name;
  if (!fs::exists(path)) return std::nullopt;
  return ReadFile(path);
}

std::optional<JobRecord> Service::WaitForJob(const std::string& id, int timeout_ms) const {
  std::unique_lock<std::mutex> lock(mu_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return std::nullopt;
  std::shared_ptr<Job> job = it->second;
  job_changed_.wait_for(lock, std::chrono::milliseconds(timeout_ms),
                        [&] { return Terminal(job->record.state); });
  return job->record;
}

void Service::SetState(const std::string& id, JobState state) {
  std::lock_guard<std::mutex> lock(mu_);
  JobRecord& r = jobs_.at(id)->record;
  r.state = state;
  SaveJob(r);
  job_changed_.notify_all();
}

void Service::WorkerLoop() {
  for (;;) {
    std::string id;
    {
      std::unique_lock<std::mutex> lock(mu_);
      queue_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      id = queue_.front();
      queue_.pop_front();
    }
    RunJob(id);
  }
}

void Service::RunJob(const std::string& id) {
  std::shared_ptr<Job> job;
  {
    std::lock_guard<std::mutex> lock(mu_);
    job = jobs_.at(id);
  }
  try {
    PipelineRequest request;
    request.original = Original(job->record.app_id);
    request.extensions = job->packages;
    request.force = job->record.force;
    PipelineResult result = RunPipeline(request, key_, *signatures(),
                                        [&](JobState s) { SetState(id, s); });
    WriteFileAtomic(JobDir(id) / "signed.apk", result.signed_apk);
    WriteFileAtomic(JobDir(id) / "patch.axpw", result.patch);
    std::lock_guard<std::mutex> lock(mu_);
    JobRecord& r = job->record;
    r.results = result.extensions;
    r.apk_sha256 = Sha256Hex(result.signed_apk);
    r.patch_sha256 = Sha256Hex(result.patch);
    r.state = JobState::kDone;
    SaveJob(r);
  } catch (const std::exception& e) {
    std::lock_guard<std::mutex> lock(mu_);
    job->record.state = JobState::kFailed;
    job->record.error = e.what();
    SaveJob(job->record);
  }
  job_changed_.notify_all();
}

// ---------------------------------------------------------------------------
// HTTP

struct HttpServer::Impl {
  Service& service;
  httplib::Server http;

  explicit Impl(Service& s) : service(s) { Routes(); }

  static void SendJson(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void SendError(httplib::Response& res, int status, const std::string& error,
                        const std::string& detail = {}, const json& ids = nullptr) {
    json body = {{"error", error}};
    if (!detail.empty()) body["detail"] = detail;
    if (!ids.is_null()) body["ids"] = ids;
    SendJson(res, status, body);
  }

  static void SendBytes(httplib::Response& res, const Bytes& data, const char* mime,
                        const std::string& filename) {
    res.status = 200;
    res.set_header("Content-Disposition", "attachment; filename=\"" + filename + "\"");
    res.set_content(std::string(data.begin(), data.end()), mime);
  }

  void Routes() {
    http.set_payload_max_length(service.config().max_upload_bytes);

    http.Post("/api/apps", [this](const httplib::Request& req, httplib::Response& res) {
      std::string body;
      if (req.is_multipart_form_data()) {
        if (!req.has_file("apk")) return SendError(res, 400, "MalformedApk", "missing form field 'apk'");
        body = req.get_file_value("apk").content;
      } else {
        body = req.body;
      }
      if (body.size() > service.config().max_upload_bytes) {
        return SendError(res, 413, "TooLarge");
      }
      try {
        AppRecord r = service.AddApp(AsBytes(body));
        SendJson(res, 201, ToJson(r));
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kIo) return SendError(res, 500, "StoreError", e.what());
        SendError(res, 400, "MalformedApk", e.what());
      }
    });

    http.Get("/api/apps", [this](const httplib::Request&, httplib::Response& res) {
      json list = json::array();
      for (const AppRecord& r : service.Apps()) list.push_back(ToJson(r));
      SendJson(res, 200, list);
    });

    http.Get(R"(/api/apps/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      auto r = service.FindApp(req.matches[1]);
      if (!r) return SendError(res, 404, "NotFound");
      SendJson(res, 200, ToJson(*r));
    });

    http.Get(R"(/api/apps/([^/]+)/extensions)",
             [this](const httplib::Request& req, httplib::Response& res) {
               std::string id = req.matches[1];
               if (!service.FindApp(id)) return SendError(res, 404, "NotFound");
               DecodedApp app = DecodeApp(service.Original(id));
               auto signatures = service.signatures();
               json list = json::array();
               for (const auto& pkg : service.repository()->All()) {
                 ApplicabilityReport report =
                     CheckApplicability(*pkg, app.manifest, app.dexes, *signatures);
                 json item = ExtensionJson(*pkg);
                 item["applicable"] = report.applicable;
                 json rules = json::array();
                 for (const RuleEvaluation& ev : report.rules) {
                   rules.push_back({{"kind", std::string(RuleKindName(ev.rule.kind))},
                                    {"argument", ev.rule.argument},
                                    {"satisfied", ev.satisfied},
                                    {"detail", ev.detail}});
                 }
                 item["rules"] = std::move(rules);
                 json hits = json::array();
                 for (const DetectionHit& h : report.hits) hits.push_back(HitJson(h));
                 item["hit_count"] = hits.size();
                 item["hits"] = std::move(hits);
                 list.push_back(std::move(item));
               }
               SendJson(res, 200, list);
             });

    http.Post(R"(/api/apps/([^/]+)/revert)",
              [this](const httplib::Request& req, httplib::Response& res) {
                std::string id = req.matches[1];
                if (!service.FindApp(id)) return SendError(res, 404, "NotFound");
                SendBytes(res, service.Original(id), kApkMime, id + ".apk");
              });

    http.Get("/api/extensions", [this](const httplib::Request&, httplib::Response& res) {
      json list = json::array();
      for (const auto& pkg : service.repository()->All()) list.push_back(ExtensionJson(*pkg));
      SendJson(res, 200, list);
    });

    http.Post("/api/repository/reload", [this](const httplib::Request&, httplib::Response& res) {
      try {
        size_t n = service.ReloadRepository();
        SendJson(res, 200, {{"extensions", n}});
      } catch (const Error& e) {
        SendError(res, 500, "RepositoryLoadError", e.what());
      }
    });

    http.Post("/api/jobs", [this](const httplib::Request& req, httplib::Response& res) {
      json body;
      try {
        body = json::parse(req.body);
      } catch (const json::exception& e) {
        return SendError(res, 400, "BadRequest", e.what());
      }
      if (!body.is_object() || !body.contains("app_id") || !body["app_id"].is_string() ||
          !body.contains("extensions") || !body["extensions"].is_array()) {
        return SendError(res, 400, "BadRequest", "expected {app_id, extensions[, force]}");
      }
      std::vector<std::string> ids;
      for (const json& id : body["extensions"]) {
        if (!id.is_string()) return SendError(res, 400, "BadRequest", "extension ids must be strings");
        ids.push_back(id.get<std::string>());
      }
      bool force = body.value("force", false);
      Service::Submission sub;
      try {
        sub = service.Submit(body["app_id"].get<std::string>(), ids, force);
      } catch (const Error& e) {
        return SendError(res, 500, "StoreError", e.what());
      }
      switch (sub.status) {
        case Service::Submission::Status::kAccepted:
          return SendJson(res, 202, {{"id", sub.job_id}, {"state", "queued"}});
        case Service::Submission::Status::kUnknownApp:
          return SendError(res, 404, "UnknownApp", "", sub.ids);
        case Service::Submission::Status::kUnknownExtension:
          return SendError(res, 404, "UnknownExtension", "", sub.ids);
        case Service::Submission::Status::kNotApplicable:
          return SendError(res, 409, "NotApplicable", "", sub.ids);
        case Service::Submission::Status::kEmpty:
          return SendError(res, 400, "BadRequest", "no extensions selected");
      }
    });

    http.Get(R"(/api/jobs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      auto r = service.FindJob(req.matches[1]);
      if (!r) return SendError(res, 404, "NotFound");
      SendJson(res, 200, StatusJson(*r));
    });

    auto artifact = [this](const char* file, const char* mime, const char* ext) {
      return [this, file, mime, ext](const httplib::Request& req, httplib::Response& res) {
        std::string id = req.matches[1];
        auto r = service.FindJob(id);
        if (!r) return SendError(res, 404, "NotFound");
        if (r->state != JobState::kDone) {
          json body = {{"error", "NotReady"}, {"state", std::string(JobStateName(r->state))}};
          return SendJson(res, 409, body);
        }
        auto data = service.JobArtifact(id, file);
        if (!data) return SendError(res, 500, "StoreError", "artifact missing");
        SendBytes(res, *data, mime, id + ext);
      };
    };
    http.Get(R"(/api/jobs/([^/]+)/patch)", artifact("patch.axpw", kOctetMime, ".axpw"));
    http.Get(R"(/api/jobs/([^/]+)/apk)", artifact("signed.apk", kApkMime, ".apk"));

    http.set_exception_handler([](const httplib::Request&, httplib::Response& res,
                                  std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        SendError(res, 500, "InternalError", e.what());
      } catch (...) {
        SendError(res, 500, "InternalError");
      }
    });
  }
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { Stop(); }

int HttpServer::Bind(const std::string& host, int port) {
  int bound = port == 0 ? impl_->http.bind_to_any_port(host) : (impl_->http.bind_to_port(host, port) ? port : -1);
  if (bound <= 0) {
    throw Error(ErrorCode::kIo, "BindFailed: cannot listen on " + host + ":" + std::to_string(port));
  }
  return bound;
}

void HttpServer::Listen() { impl_->http.listen_after_bind(); }

void HttpServer::Stop() {
  if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

}  // namespace appgrease
