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

// appgrease: command-line driver for the extension pipeline and server.

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "appgrease/error.h"
#include "appgrease/patchwire.h"
#include "appgrease/pipeline.h"
#include "appgrease/repository.h"
#include "appgrease/server.h"
#include "appgrease/signer.h"
#include "httplib.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace appgrease {
namespace {

enum ExitCode { kExitOk = 0, kExitEnv = 1, kExitUsage = 2, kExitPipeline = 3 };

// Thrown to leave a command with a specific exit code.
struct Exit {
  int code;
  std::string message;
};

struct Config {
  std::string server;
  std::string data_dir;
  std::string extensions_dir = APPGREASE_DEFAULT_EXTENSIONS_DIR;
  std::string key_store;
  std::string signatures = APPGREASE_DEFAULT_SIGNATURES;
  bool json = false;
  bool force = false;
};

std::string ExpandUser(const std::string& path) {
  if (path.empty() || path[0] != '~') return path;
  const char* home = std::getenv("HOME");
  return std::string(home != nullptr ? home : "") + path.substr(1);
}

std::string DefaultHomePath(const char* leaf) {
  const char* home = std::getenv("HOME");
  return (fs::path(home != nullptr ? home : ".") / ".appgrease" / leaf).string();
}

Bytes ReadFileOrExit(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Exit{kExitEnv, "cannot read " + path};
  return Bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void WriteFileOrExit(const std::string& path, ByteView data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (out) out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw Exit{kExitEnv, "cannot write " + path};
}

SignatureList LoadSignatures(const Config& cfg) {
  if (cfg.signatures.empty()) return {};
  try {
    return SignatureList::Load(cfg.signatures);
  } catch (const Error& e) {
    throw Exit{kExitEnv, e.what()};
  }
}

Repository LoadRepository(const Config& cfg) {
  try {
    return Repository::LoadDir(cfg.extensions_dir);
  } catch (const Error& e) {
    throw Exit{kExitEnv, std::string("RepositoryLoadError: ") + e.what()};
  }
}

SigningKey LoadKey(const Config& cfg) {
  try {
    return SigningKey::LoadOrCreate(cfg.key_store);
  } catch (const Error& e) {
    throw Exit{kExitEnv, e.what()};
  }
}

std::string UnknownIdMessage(const std::vector<std::string>& unknown, const std::vector<std::string>& known) {
  std::string msg = "unknown extension id";
  msg += unknown.size() > 1 ? "s: " : ": ";
  for (size_t i = 0; i < unknown.size(); ++i) msg += (i ? ", " : "") + unknown[i];
  msg += "\nknown ids:";
  for (const std::string& id : known) msg += "\n  " + id;
  return msg;
}

std::string Noun(const std::string& action, int n) {
  std::string word = action == "DexStringReplace"    ? "replacement"
                     : action == "AxmlRemoveElement" ? "removal"
                     : action == "FileAdd"           ? "file"
                     : action == "FileDiffPatch"     ? "hunk"
                                                     : "edit";
  return std::to_string(n) + " " + word + (n == 1 ? "" : "s");
}

void PrintSummary(const std::vector<ExtensionSummary>& exts) {
  std::printf("%-40s %-28s %s\n", "EXTENSION", "ACTION", "RESULT");
  for (const ExtensionSummary& e : exts) {
    for (const ActionRecord& a : e.actions) {
      std::printf("%-40s %-28s %s\n", e.id.c_str(), a.action.c_str(), Noun(a.action, a.changes).c_str());
      for (const std::string& w : a.warnings) std::printf("  warning: %s\n", w.c_str());
    }
  }
}

json SummaryJson(const std::vector<ExtensionSummary>& exts) {
  json out = json::array();
  for (const ExtensionSummary& e : exts) {
    json actions = json::array();
    for (const ActionRecord& a : e.actions) {
      actions.push_back({{"index", a.index}, {"action", a.action}, {"changes", a.changes}, {"warnings", a.warnings}});
    }
    out.push_back({{"id", e.id}, {"changes", e.changes}, {"warnings", e.warnings}, {"actions", actions}});
  }
  return out;
}

DecodedTree LoadTree(const std::string& dir) {
  DecodedTree tree;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Exit{kExitEnv, "decoded tree " + dir + " is not a directory"};
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    Bytes data = ReadFileOrExit(entry.path().string());
    tree[fs::relative(entry.path(), dir).generic_string()] = ToString(data);
  }
  return tree;
}

void SaveTree(const std::string& dir, const DecodedTree& tree) {
  for (const auto& [path, text] : tree) {
    fs::path out = fs::path(dir) / path;
    std::error_code ec;
    fs::create_directories(out.parent_path(), ec);
    WriteFileOrExit(out.string(), AsBytes(text));
  }
}

std::string PatchPathFor(const std::string& out) {
  fs::path p(out);
  if (p.extension() == ".apk") p.replace_extension(".axpw");
  else p += ".axpw";
  return p.string();
}

// ---------------------------------------------------------------------------

struct ExtendArgs {
  std::string apk;
  std::vector<std::string> ids;
  std::string out;
  std::string patch_out;
  std::string tree;
  std::string tree_out;
};

void CheckWritable(const std::string& path) {
  fs::path parent = fs::absolute(path).parent_path();
  std::error_code ec;
  if (!fs::is_directory(parent, ec)) throw Exit{kExitEnv, "output directory " + parent.string() + " does not exist"};
}

int ExtendLocal(const Config& cfg, const ExtendArgs& args) {
  Repository repo = LoadRepository(cfg);
  PipelineRequest request;
  std::vector<std::string> unknown;
  for (const std::string& id : args.ids) {
    auto pkg = repo.Find(id);
    if (!pkg) unknown.push_back(id);
    else request.extensions.push_back(pkg);
  }
  if (!unknown.empty()) throw Exit{kExitUsage, UnknownIdMessage(unknown, repo.Ids())};
  std::string patch_out = args.patch_out.empty() ? PatchPathFor(args.out) : args.patch_out;
  CheckWritable(args.out);
  CheckWritable(patch_out);

  request.original = ReadFileOrExit(args.apk);
  request.force = cfg.force;
  if (!args.tree.empty()) request.tree = LoadTree(args.tree);
  SignatureList signatures = LoadSignatures(cfg);
  SigningKey key = LoadKey(cfg);

  PipelineResult result;
  try {
    result = RunPipeline(request, key, signatures);
  } catch (const Error& e) {
    throw Exit{kExitPipeline, e.what()};
  }
  WriteFileOrExit(args.out, result.signed_apk);
  WriteFileOrExit(patch_out, result.patch);
  if (!args.tree_out.empty() && result.tree) SaveTree(args.tree_out, *result.tree);

  if (cfg.json) {
    json j = {{"apk", args.out},
              {"patch", patch_out},
              {"apk_sha256", Sha256Hex(result.signed_apk)},
              {"patch_sha256", Sha256Hex(result.patch)},
              {"extensions", SummaryJson(result.extensions)}};
    std::cout << j.dump(2) << "\n";
  } else {
    PrintSummary(result.extensions);
    std::printf("wrote %s (%zu bytes) and %s (%zu bytes)\n", args.out.c_str(), result.signed_apk.size(),
                patch_out.c_str(), result.patch.size());
  }
  return kExitOk;
}

httplib::Client MakeClient(const std::string& server) {
  std::string url = server.find("://") == std::string::npos ? "http://" + server : server;
  httplib::Client client(url);
  client.set_read_timeout(600, 0);
  client.set_write_timeout(600, 0);
  return client;
}

json ParseBody(const httplib::Result& res) {
  try {
    return json::parse(res->body);
  } catch (const json::exception&) {
    return json::object();
  }
}

int ExtendRemote(const Config& cfg, const ExtendArgs& args) {
  httplib::Client client = MakeClient(cfg.server);
  std::string patch_out = args.patch_out.empty() ? PatchPathFor(args.out) : args.patch_out;
  CheckWritable(args.out);
  CheckWritable(patch_out);
  Bytes apk = ReadFileOrExit(args.apk);
  auto need = [&](const httplib::Result& r, const char* what) {
    if (!r) throw Exit{kExitEnv, std::string("cannot reach server for ") + what + ": " + httplib::to_string(r.error())};
  };

  auto up = client.Post("/api/apps", std::string(apk.begin(), apk.end()), "application/vnd.android.package-archive");
  need(up, "upload");
  if (up->status != 201) throw Exit{kExitPipeline, "upload rejected: " + up->body};
  std::string app_id = ParseBody(up)["id"].get<std::string>();

  json req = {{"app_id", app_id}, {"extensions", args.ids}, {"force", cfg.force}};
  auto sub = client.Post("/api/jobs", req.dump(), "application/json");
  need(sub, "job submission");
  if (sub->status == 404) {
    json body = ParseBody(sub);
    if (body.value("error", "") == "UnknownExtension") {
      std::vector<std::string> known;
      if (auto list = client.Get("/api/extensions"); list && list->status == 200) {
        for (const json& e : ParseBody(list)) known.push_back(e["id"].get<std::string>());
      }
      throw Exit{kExitUsage, UnknownIdMessage(body["ids"].get<std::vector<std::string>>(), known)};
    }
  }
  if (sub->status != 202) throw Exit{kExitPipeline, "job rejected: " + sub->body};
  std::string job_id = ParseBody(sub)["id"].get<std::string>();

  json status;
  for (;;) {
    auto st = client.Get("/api/jobs/" + job_id);
    need(st, "job status");
    status = ParseBody(st);
    std::string state = status.value("state", "");
    if (state == "done" || state == "failed") break;
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  if (status["state"] == "failed") throw Exit{kExitPipeline, status.value("error", std::string("job failed"))};

  auto apk_res = client.Get("/api/jobs/" + job_id + "/apk");
  need(apk_res, "apk download");
  auto patch_res = client.Get("/api/jobs/" + job_id + "/patch");
  need(patch_res, "patch download");
  WriteFileOrExit(args.out, AsBytes(apk_res->body));
  WriteFileOrExit(patch_out, AsBytes(patch_res->body));

  if (cfg.json) {
    status["apk"] = args.out;
    status["patch"] = patch_out;
    std::cout << status.dump(2) << "\n";
  } else {
    std::printf("%-40s %s\n", "EXTENSION", "CHANGES");
    for (const json& e : status["extensions"]) {
      std::printf("%-40s %d\n", e["id"].get<std::string>().c_str(), e["changes"].get<int>());
    }
    std::printf("job %s done; wrote %s and %s\n", job_id.c_str(), args.out.c_str(), patch_out.c_str());
  }
  return kExitOk;
}

int Detect(const Config& cfg, const std::string& apk_path) {
  Bytes apk = ReadFileOrExit(apk_path);
  SignatureList signatures = LoadSignatures(cfg);
  std::vector<DetectionHit> hits;
  try {
    hits = DetectTrackers(DecodeApp(apk), signatures);
  } catch (const Error& e) {
    throw Exit{kExitPipeline, e.what()};
  }
  if (cfg.json) {
    json out = json::array();
    for (const DetectionHit& h : hits) {
      out.push_back({{"tracker", h.tracker}, {"pattern", h.pattern}, {"dex_path", h.dex_path}, {"string_index", h.string_index}});
    }
    std::cout << out.dump(2) << "\n";
    return kExitOk;
  }
  std::printf("%-24s %-32s %-16s %s\n", "TRACKER", "PATTERN", "DEX", "STRING");
  for (const DetectionHit& h : hits) {
    std::printf("%-24s %-32s %-16s %u\n", h.tracker.c_str(), h.pattern.c_str(), h.dex_path.c_str(), h.string_index);
  }
  std::printf("%zu hit%s, %zu tracker%s\n", hits.size(), hits.size() == 1 ? "" : "s",
              SummarizeTrackers(hits).size(), SummarizeTrackers(hits).size() == 1 ? "" : "s");
  return kExitOk;
}

int Verify(const Config& cfg, const std::string& apk_path) {
  VerificationReport report = VerifyApk(ReadFileOrExit(apk_path));
  if (cfg.json) {
    json j = {{"ok", report.ok()},
              {"status", std::string(VerifyStatusName(report.status))},
              {"detail", report.detail},
              {"certificate_sha256", report.certificate_fingerprint}};
    std::cout << j.dump(2) << "\n";
  } else if (report.ok()) {
    std::printf("OK: v2 signature valid, certificate sha256 %s\n", report.certificate_fingerprint.c_str());
  } else {
    std::printf("FAIL: %s", std::string(VerifyStatusName(report.status)).c_str());
    if (!report.detail.empty()) std::printf(" (%s)", report.detail.c_str());
    std::printf("\n");
  }
  return report.ok() ? kExitOk : kExitEnv;
}

int Diff(const Config& cfg, const std::string& old_path, const std::string& new_path, const std::string& out) {
  Bytes old_data = ReadFileOrExit(old_path);
  Bytes new_data = ReadFileOrExit(new_path);
  Bytes patch = MakePatch(old_data, new_data).Encode();
  WriteFileOrExit(out, patch);
  if (cfg.json) {
    std::cout << json{{"patch", out}, {"size", patch.size()}, {"new_size", new_data.size()}}.dump(2) << "\n";
  } else {
    std::printf("wrote %s: %zu bytes for a %zu byte target\n", out.c_str(), patch.size(), new_data.size());
  }
  return kExitOk;
}

int Patch(const Config& cfg, const std::string& old_path, const std::string& patch_path, const std::string& out) {
  Bytes old_data = ReadFileOrExit(old_path);
  Bytes patch = ReadFileOrExit(patch_path);
  Bytes result;
  try {
    result = ApplyPatch(old_data, patch);
  } catch (const Error& e) {
    throw Exit{kExitPipeline, e.what()};
  }
  WriteFileOrExit(out, result);
  if (cfg.json) {
    std::cout << json{{"output", out}, {"size", result.size()}, {"sha256", Sha256Hex(result)}}.dump(2) << "\n";
  } else {
    std::printf("wrote %s (%zu bytes, sha256 %s)\n", out.c_str(), result.size(), Sha256Hex(result).c_str());
  }
  return kExitOk;
}

int ListExtensions(const Config& cfg) {
  Repository repo = LoadRepository(cfg);
  if (cfg.json) {
    json out = json::array();
    for (const auto& pkg : repo.All()) {
      out.push_back({{"id", pkg->id}, {"name", pkg->name}, {"category", std::string(CategoryName(pkg->category))}});
    }
    std::cout << out.dump(2) << "\n";
    return kExitOk;
  }
  for (const auto& pkg : repo.All()) {
    std::printf("%-40s %-14s %s\n", pkg->id.c_str(), std::string(CategoryName(pkg->category)).c_str(), pkg->name.c_str());
  }
  return kExitOk;
}

HttpServer* g_http = nullptr;

void HandleSignal(int) {
  if (g_http != nullptr) g_http->Stop();
}

int Serve(const Config& cfg, int workers, size_t max_upload_mb) {
  std::string addr = cfg.server.empty() ? "127.0.0.1:8080" : cfg.server;
  size_t scheme = addr.find("://");
  if (scheme != std::string::npos) addr = addr.substr(scheme + 3);
  size_t colon = addr.rfind(':');
  if (colon == std::string::npos) throw Exit{kExitUsage, "--server must be host:port, got " + addr};
  std::string host = addr.substr(0, colon);
  int port = std::atoi(addr.c_str() + colon + 1);

  ServerConfig sc;
  sc.data_dir = cfg.data_dir;
  sc.extensions_dir = cfg.extensions_dir;
  sc.signatures_path = cfg.signatures;
  sc.workers = workers;
  sc.max_upload_bytes = max_upload_mb << 20;
  std::error_code ec;
  fs::create_directories(sc.data_dir, ec);
  if (ec) throw Exit{kExitEnv, "cannot create data directory " + cfg.data_dir + ": " + ec.message()};

  std::unique_ptr<Service> service;
  try {
    service = std::make_unique<Service>(sc, LoadKey(cfg));
  } catch (const Error& e) {
    throw Exit{kExitEnv, std::string("RepositoryLoadError: ") + e.what()};
  }
  HttpServer http(*service);
  int bound = 0;
  try {
    bound = http.Bind(host, port);
  } catch (const Error& e) {
    throw Exit{kExitEnv, e.detail()};
  }
  std::fprintf(stderr, "appgrease: serving on http://%s:%d with %zu extension%s, data in %s\n", host.c_str(), bound,
               service->repository()->size(), service->repository()->size() == 1 ? "" : "s", cfg.data_dir.c_str());
  g_http = &http;
  std::signal(SIGINT, HandleSignal);
  std::signal(SIGTERM, HandleSignal);
  http.Listen();
  g_http = nullptr;
  service->Shutdown();
  return kExitOk;
}

int Main(int argc, char** argv) {
  CLI::App app{"appgrease: apply declarative extensions to Android apps"};
  app.require_subcommand(1);
  Config cfg;
  app.add_option("--server", cfg.server, "Server address (host:port); serve binds it, extend delegates to it")
      ->envname("APPGREASE_SERVER");
  app.add_option("--data-dir", cfg.data_dir, "Server data directory")->envname("APPGREASE_DATA_DIR");
  app.add_option("--extensions-dir", cfg.extensions_dir, "Extension repository directory")
      ->envname("APPGREASE_EXTENSIONS_DIR");
  app.add_option("--key-store", cfg.key_store, "PEM file holding the signing key and certificate")
      ->envname("APPGREASE_KEY_STORE");
  app.add_option("--signatures", cfg.signatures, "Tracker signature list")->envname("APPGREASE_SIGNATURES");
  app.add_flag("--json", cfg.json, "Machine-readable output");
  app.add_flag("--force", cfg.force, "Apply extensions even when not applicable");

  int workers = 2;
  size_t max_upload_mb = 200;
  CLI::App* serve = app.add_subcommand("serve", "Run the HTTP job server");
  serve->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  serve->add_option("--max-upload-mb", max_upload_mb, "Upload size cap in MiB")->check(CLI::PositiveNumber);

  ExtendArgs ext;
  CLI::App* extend = app.add_subcommand("extend", "Apply extensions, sign, and write the APK plus a patch");
  extend->add_option("apk", ext.apk, "Input APK")->required();
  extend->add_option("-e,--extension", ext.ids, "Extension id (repeatable, applied in order)")->required();
  extend->add_option("-o,--out", ext.out, "Output APK path")->required();
  extend->add_option("--patch-out", ext.patch_out, "Patch path (default: output with .axpw)");
  extend->add_option("--tree", ext.tree, "Decoded text tree for FileTextPatch/FileDiffPatch actions");
  extend->add_option("--tree-out", ext.tree_out, "Where to write the patched decoded tree");

  std::string apk_path;
  CLI::App* detect = app.add_subcommand("detect", "List tracker signature hits");
  detect->add_option("apk", apk_path, "APK")->required();
  CLI::App* verify = app.add_subcommand("verify", "Check the v2 signature");
  verify->add_option("apk", apk_path, "APK")->required();

  std::string a, b, out;
  CLI::App* diff = app.add_subcommand("diff", "Compute a patch from OLD to NEW");
  diff->add_option("old", a)->required();
  diff->add_option("new", b)->required();
  diff->add_option("out", out)->required();
  CLI::App* patch = app.add_subcommand("patch", "Apply PATCH to OLD");
  patch->add_option("old", a)->required();
  patch->add_option("patch", b)->required();
  patch->add_option("out", out)->required();
  CLI::App* list = app.add_subcommand("extensions", "List the extension repository");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  cfg.data_dir = ExpandUser(cfg.data_dir.empty() ? DefaultHomePath("data") : cfg.data_dir);
  cfg.key_store = ExpandUser(cfg.key_store.empty() ? DefaultHomePath("key.pem") : cfg.key_store);
  cfg.extensions_dir = ExpandUser(cfg.extensions_dir);
  cfg.signatures = ExpandUser(cfg.signatures);

  try {
    if (*serve) return Serve(cfg, workers, max_upload_mb);
    if (*extend) return cfg.server.empty() ? ExtendLocal(cfg, ext) : ExtendRemote(cfg, ext);
    if (*detect) return Detect(cfg, apk_path);
    if (*verify) return Verify(cfg, apk_path);
    if (*diff) return Diff(cfg, a, b, out);
    if (*patch) return Patch(cfg, a, b, out);
    if (*list) return ListExtensions(cfg);
  } catch (const Exit& e) {
    if (!e.message.empty()) std::fprintf(stderr, "appgrease: %s\n", e.message.c_str());
    return e.code;
  } catch (const Error& e) {
    std::fprintf(stderr, "appgrease: %s\n", e.what());
    return e.code() == ErrorCode::kIo ? kExitEnv : kExitPipeline;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "appgrease: %s\n", e.what());
    return kExitEnv;
  }
  return kExitUsage;
}

}  // namespace
}  // namespace appgrease

int main(int argc, char** argv) { return appgrease::Main(argc, argv); }
