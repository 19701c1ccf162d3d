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

// Acceptance run: one PASS/FAIL/SKIP line per release criterion.
// Exit status is 0 only when nothing failed.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <thread>

#include "appgrease/patchwire.h"
#include "appgrease/pipeline.h"
#include "appgrease/repository.h"
#include "appgrease/server.h"
#include "httplib.h"
#include "json.hpp"
#include "support/fixtures.h"
#include "support/generators.h"
#include "support/oracles.h"

namespace appgrease {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr double kPipelineSecondsLimit = 10.0;
constexpr int kRoundTripCases = 200;
constexpr int kDexCases = 200;
constexpr int kTamperCases = 100;
constexpr size_t kDeltaApkBytes = 20u << 20;
constexpr size_t kDeltaEntryBytes = 50u << 10;
constexpr double kDeltaRatioLimit = 0.15;

int g_failures = 0;

void Report(const char* verdict, const std::string& name, const std::string& detail) {
  std::printf("%-4s  %-22s %s\n", verdict, name.c_str(), detail.c_str());
  std::fflush(stdout);
}

// Runs `body`, which returns "" on success or a failure description.
void Criterion(const std::string& name, const std::function<std::string(std::string&)>& body) {
  std::string detail;
  std::string failure;
  try {
    failure = body(detail);
  } catch (const std::exception& e) {
    failure = std::string("exception: ") + e.what();
  }
  if (failure == "SKIP") {
    Report("SKIP", name, detail);
  } else if (failure.empty()) {
    Report("PASS", name, detail);
  } else {
    ++g_failures;
    Report("FAIL", name, failure);
  }
}

const std::string& KeyPem() {
  static const std::string pem = SigningKey::Generate().ToPem();
  return pem;
}

const SignatureList& Signatures() {
  static SignatureList list = SignatureList::Load(fixture::SignaturesPath());
  return list;
}

const Repository& Repo() {
  static Repository repo = Repository::LoadDir(fixture::ExtensionsDir());
  return repo;
}

PipelineRequest EndToEndRequest() {
  PipelineRequest req;
  req.original = fixture::BuildFixtureApk();
  for (const char* id : {"disable-billing", "tracker-removal", "stories-removal", "network-security-config"}) {
    req.extensions.push_back(Repo().Find(id));
  }
  return req;
}

std::string Fmt(const char* format, double a, double b = 0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, format, a, b);
  return buf;
}

// ---------------------------------------------------------------------------

std::string EndToEnd(std::string& detail) {
  PipelineRequest req = EndToEndRequest();
  auto start = Clock::now();
  PipelineResult r = RunPipeline(req, SigningKey::FromPem(KeyPem()), Signatures());
  double seconds = std::chrono::duration<double>(Clock::now() - start).count();

  VerificationReport v = VerifyApk(r.signed_apk);
  if (!v.ok()) return "signature does not verify: " + std::string(VerifyStatusName(v.status));

  ApkArchive before = OpenArchive(req.original);
  ApkArchive after = OpenArchive(r.signed_apk);
  const ZipEntry* dex_before = before.Find("classes.dex");
  const ZipEntry* dex_after = after.Find("classes.dex");
  if (dex_after == nullptr || dex_after->data.size() != dex_before->data.size()) return "DEX length changed";
  std::string dex_text(dex_after->data.begin(), dex_after->data.end());
  if (dex_text.find(fixture::kBillingString) != std::string::npos) return "billing string still present";
  if (dex_text.find(fixture::kTrackerHost) != std::string::npos) return "tracker host still present";

  // The blanked host keeps the URL length and ends in .invalid.
  std::string url = fixture::kTrackerUrl;
  size_t host_at = url.find(fixture::kTrackerHost);
  size_t host_len = std::string_view(fixture::kTrackerHost).size();
  size_t url_at = dex_text.find(url.substr(0, host_at));
  bool blanked = false;
  for (; url_at != std::string::npos; url_at = dex_text.find(url.substr(0, host_at), url_at + 1)) {
    std::string candidate = dex_text.substr(url_at, url.size());
    std::string host = candidate.substr(host_at, host_len);
    if (candidate.substr(host_at + host_len) == url.substr(host_at + host_len) &&
        host.size() == host_len && host.compare(host_len - 8, 8, ".invalid") == 0) {
      blanked = true;
    }
  }
  if (!blanked) return "no equal-length .invalid host in the DEX";

  AxmlDocument layout = ParseAxml(after.Find(fixture::kLayoutEntry)->data);
  if (!layout.FindElements(ElementSelector::Parse("LinearLayout[id=stories_bar]")).empty()) {
    return "stories element still in layout";
  }
  size_t untouched = 0;
  for (const ZipEntry& e : before.entries()) {
    if (e.name == "classes.dex" || e.name == "AndroidManifest.xml" || e.name == fixture::kLayoutEntry) continue;
    const ZipEntry* a = after.Find(e.name);
    if (a == nullptr || a->data != e.data || a->compressed != e.compressed) {
      return "untouched entry " + e.name + " changed";
    }
    ++untouched;
  }
  if (seconds >= kPipelineSecondsLimit) return Fmt("took %.2f s (limit %.0f s)", seconds, kPipelineSecondsLimit);
  detail = Fmt("%.3f s (limit %.0f s)", seconds, kPipelineSecondsLimit) + ", verify ok, " +
           std::to_string(untouched) + " untouched entries byte-identical";
  return {};
}

std::string Determinism(std::string& detail) {
  PipelineRequest req = EndToEndRequest();
  PipelineResult a = RunPipeline(req, SigningKey::FromPem(KeyPem()), Signatures());
  PipelineResult b = RunPipeline(req, SigningKey::FromPem(KeyPem()), Signatures());
  if (a.signed_apk != b.signed_apk) return "signed APKs differ";
  if (a.patch != b.patch) return "patches differ";
  detail = "apk sha256 " + oracle::Hex(oracle::Sha256(a.signed_apk)).substr(0, 16) + "..., patch identical";
  return {};
}

std::string RoundTrips(std::string& detail) {
  std::mt19937_64 rng(0x5eed);
  for (int c = 0; c < kRoundTripCases; ++c) {
    ApkArchive a = OpenArchive(fixture::BuildZip(fixture::RandomItems(rng)));
    Bytes w = WriteArchive(a);
    ApkArchive b = OpenArchive(w);
    if (!(a == b) || WriteArchive(b) != w) return "ZIP case " + std::to_string(c);
  }
  for (int c = 0; c < kRoundTripCases; ++c) {
    Bytes bytes = fixture::EncodeAxml(fixture::RandomNode(rng, 0), c % 2 == 0);
    if (SerializeAxml(ParseAxml(bytes)) != bytes) return "AXML case " + std::to_string(c);
  }
  for (int c = 0; c < kRoundTripCases; ++c) {
    Bytes old_data = fixture::RandomBytes(rng, rng() % 150000);
    Bytes new_data = fixture::Mutate(rng, old_data);
    PatchOptions options;
    options.parallel = c % 2 == 0;
    Bytes encoded = MakePatch(old_data, new_data, options).Encode();
    if (PatchSet::Decode(encoded).Encode() != encoded || ApplyPatch(old_data, encoded) != new_data) {
      return "patchwire case " + std::to_string(c);
    }
  }
  detail = std::to_string(kRoundTripCases) + " cases each: ZIP, AXML, patchwire; exact equality";
  return {};
}

std::string DexIntegrity(std::string& detail) {
  std::mt19937_64 rng(0xdec0de);
  auto check = [](const Bytes& dex) {
    uint32_t checksum = LoadLe32(&dex[8]);
    auto sha1 = oracle::Sha1(oracle::ByteSpan(dex).subspan(32));
    return checksum == oracle::Adler32(oracle::ByteSpan(dex).subspan(12)) &&
           std::equal(sha1.begin(), sha1.end(), dex.begin() + 12);
  };
  for (int c = 0; c < kDexCases; ++c) {
    std::vector<std::string> strings;
    size_t n = 1 + rng() % 30;
    for (size_t i = 0; i < n; ++i) {
      std::string s;
      size_t len = 1 + rng() % 100;
      for (size_t k = 0; k < len; ++k) s += static_cast<char>('a' + rng() % 26);
      strings.push_back(s);
    }
    DexImage image = DexImage::Parse(fixture::BuildDex(strings));
    const StringEntry& target = image.strings()[rng() % image.strings().size()];
    std::string replacement;
    for (size_t k = 0; k < target.bytes.size(); ++k) replacement += static_cast<char>('A' + rng() % 26);
    image.ReplaceStringSameLength(target, replacement);
    image.Reseal();
    if (!check(image.bytes())) return "case " + std::to_string(c);
  }
  PipelineResult r = RunPipeline(EndToEndRequest(), SigningKey::FromPem(KeyPem()), Signatures());
  if (!check(OpenArchive(r.signed_apk).Find("classes.dex")->data)) return "pipeline output DEX";
  detail = std::to_string(kDexCases) + " edit+reseal cases and the pipeline DEX match oracle adler-32/SHA-1";
  return {};
}

std::string Tamper(std::string& detail) {
  PipelineResult r = RunPipeline(EndToEndRequest(), SigningKey::FromPem(KeyPem()), Signatures());
  const Bytes& apk = r.signed_apk;
  ZipSections z = LocateZipSections(apk);
  uint64_t block_size = LoadLe64(&apk[z.cd_offset - 24]);
  uint64_t block_start = z.cd_offset - block_size - 8;
  std::mt19937_64 rng(0x7a3);
  uint64_t outside = apk.size() - (z.cd_offset - block_start);
  for (int c = 0; c < kTamperCases; ++c) {
    uint64_t k = rng() % outside;
    uint64_t pos = k < block_start ? k : k + (z.cd_offset - block_start);
    Bytes copy = apk;
    copy[pos] ^= static_cast<uint8_t>(1 + rng() % 255);
    if (VerifyApk(copy).ok()) return "mutation at offset " + std::to_string(pos) + " still verifies";
  }
  detail = std::to_string(kTamperCases) + "/" + std::to_string(kTamperCases) + " single-byte mutations rejected";
  return {};
}

std::string Idempotence(std::string& detail) {
  fixture::ApkOptions pinned;
  pinned.pinned_config = true;
  struct Subject {
    std::string id;
    fixture::ApkOptions options;
  };
  std::vector<Subject> subjects;
  for (const std::string& id : Repo().Ids()) subjects.push_back({id, {}});
  subjects.push_back({"org.appgrease.network-security-config", pinned});
  for (const Subject& s : subjects) {
    auto pkg = Repo().Find(s.id);
    DecodedApp app = DecodeApp(fixture::BuildFixtureApk(s.options), fixture::FixtureSmaliTree());
    ApplyOutcome once = ApplyExtension(app, *pkg, Signatures());
    ApplyOutcome twice = ApplyExtension(once.app, *pkg, Signatures());
    if (EncodeApp(once.app) != EncodeApp(twice.app) || once.app.tree != twice.app.tree) return s.id;
  }
  detail = std::to_string(subjects.size()) + " extension/fixture pairs byte-identical after a second apply";
  return {};
}

// Delta efficiency and revert both run against a live server.
struct LiveServer {
  fixture::TempDir dir;
  std::unique_ptr<Service> service;
  std::unique_ptr<HttpServer> http;
  std::thread thread;
  std::unique_ptr<httplib::Client> client;

  LiveServer() {
    fs::path ext = dir / "extensions";
    fs::copy(fixture::ExtensionsDir(), ext, fs::copy_options::recursive);
    fs::create_directories(ext / "swap-chunk/files");
    std::string manifest = R"({"id":"org.example.swap-chunk","name":"swap chunk","category":"other",
      "actions":[{"type":"FileAdd","entry":"assets/chunk.bin","source":"files/chunk.bin","compression":"stored"}]})";
    fixture::WriteFile(ext / "swap-chunk/extension.json", fixture::Bytes(manifest.begin(), manifest.end()));
    std::mt19937_64 rng(0xc4);
    fixture::WriteFile(ext / "swap-chunk/files/chunk.bin", fixture::RandomBytes(rng, kDeltaEntryBytes));

    ServerConfig config;
    config.data_dir = dir / "data";
    config.extensions_dir = ext;
    config.signatures_path = fixture::SignaturesPath();
    config.max_upload_bytes = 64u << 20;
    service = std::make_unique<Service>(config, SigningKey::FromPem(KeyPem()));
    http = std::make_unique<HttpServer>(*service);
    int port = http->Bind("127.0.0.1", 0);
    thread = std::thread([this] { http->Listen(); });
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
    client->set_read_timeout(120, 0);
    client->set_write_timeout(120, 0);
    for (int i = 0; i < 200 && !client->Get("/api/extensions"); ++i) {
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
  }

  ~LiveServer() {
    http->Stop();
    thread.join();
  }

  json Upload(const Bytes& apk) {
    auto res = client->Post("/api/apps", std::string(apk.begin(), apk.end()), "application/octet-stream");
    if (!res || res->status != 201) throw std::runtime_error("upload failed");
    return json::parse(res->body);
  }

  std::string RunJob(const std::string& app, const std::vector<std::string>& ids) {
    json body = {{"app_id", app}, {"extensions", ids}};
    auto res = client->Post("/api/jobs", body.dump(), "application/json");
    if (!res || res->status != 202) throw std::runtime_error("job rejected");
    std::string job = json::parse(res->body)["id"];
    auto record = service->WaitForJob(job, 300000);
    if (!record || record->state != JobState::kDone) throw std::runtime_error("job did not finish: " + job);
    return job;
  }

  std::string Get(const std::string& path) {
    auto res = client->Get(path);
    if (!res || res->status != 200) throw std::runtime_error("GET " + path + " failed");
    return res->body;
  }
};

Bytes DeltaFixture() {
  fixture::ApkOptions options;
  options.blob_bytes = kDeltaApkBytes - kDeltaEntryBytes;
  options.seed = 20;
  std::vector<fixture::ZipItem> items = fixture::FixtureItems(options);
  std::mt19937_64 rng(0x50);
  items.push_back({"assets/chunk.bin", fixture::RandomBytes(rng, kDeltaEntryBytes), false});
  return fixture::BuildZip(items);
}

std::string DeltaEfficiency(LiveServer& server, std::string& detail) {
  Bytes original = DeltaFixture();
  json app = server.Upload(original);
  std::string job = server.RunJob(app["id"], {"org.example.swap-chunk"});
  std::string apk = server.Get("/api/jobs/" + job + "/apk");
  std::string patch = server.Get("/api/jobs/" + job + "/patch");
  double ratio = static_cast<double>(patch.size()) / static_cast<double>(apk.size());
  if (ApplyPatch(original, AsBytes(patch)) != ToBytes(apk)) return "patched bytes differ from the APK endpoint";
  if (ratio > kDeltaRatioLimit) return Fmt("patch is %.2f%% of the APK (limit %.0f%%)", ratio * 100, kDeltaRatioLimit * 100);
  detail = std::to_string(patch.size()) + " / " + std::to_string(apk.size()) + " bytes = " +
           Fmt("%.3f%% (limit %.0f%%)", ratio * 100, kDeltaRatioLimit * 100) + ", apply == /apk bytes";
  return {};
}

std::string Revert(LiveServer& server, std::string& detail) {
  Bytes original = fixture::BuildFixtureApk();
  json app = server.Upload(original);
  std::string id = app["id"];
  server.RunJob(id, {"disable-billing", "stories-removal"});
  auto res = server.client->Post("/api/apps/" + id + "/revert");
  if (!res || res->status != 200) return "revert request failed";
  std::string digest = oracle::Hex(oracle::Sha256(oracle::Span(res->body)));
  if (digest != app["sha256"].get<std::string>()) return "revert digest differs from upload digest";
  if (digest != oracle::Hex(oracle::Sha256(original))) return "upload digest differs from the uploaded bytes";
  detail = "sha256 " + digest.substr(0, 16) + "... matches the upload";
  return {};
}

std::string FindTool(const char* env, const char* name) {
  if (const char* v = std::getenv(env); v != nullptr && *v != '\0') return v;
  std::stringstream path(std::getenv("PATH") ? std::getenv("PATH") : "");
  std::string dir;
  while (std::getline(path, dir, ':')) {
    std::error_code ec;
    if (fs::is_regular_file(fs::path(dir) / name, ec)) return (fs::path(dir) / name).string();
  }
  return {};
}

std::pair<int, std::string> Capture(const std::string& cmd, const fixture::TempDir& dir) {
  std::string out = dir / "tool.txt";
  int status = std::system((cmd + " > '" + out + "' 2>&1").c_str());
  Bytes b = fixture::ReadFile(out);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, std::string(b.begin(), b.end())};
}

std::string OracleTools(std::string& detail) {
  std::string apksigner = FindTool("APKSIGNER", "apksigner");
  std::string aapt2 = FindTool("AAPT2", "aapt2");
  if (apksigner.empty() && aapt2.empty()) {
    detail = "apksigner and aapt2 not installed";
    return "SKIP";
  }
  fixture::TempDir dir;
  PipelineResult r = RunPipeline(EndToEndRequest(), SigningKey::FromPem(KeyPem()), Signatures());
  std::string apk = dir / "signed.apk";
  fixture::WriteFile(apk, r.signed_apk);
  std::vector<std::string> ran;
  if (!apksigner.empty()) {
    auto [code, out] = Capture("'" + apksigner + "' verify --verbose '" + apk + "'", dir);
    if (code != 0 || out.find("Verified using v2 scheme (APK Signature Scheme v2): true") == std::string::npos) {
      return "apksigner rejected the output: " + out.substr(0, 200);
    }
    ran.push_back("apksigner");
  }
  if (!aapt2.empty()) {
    std::string manifest = dir / "manifest.apk";
    fixture::WriteFile(manifest, fixture::BuildFixtureApk());
    auto [code, out] = Capture("'" + aapt2 + "' dump xmltree --file AndroidManifest.xml '" + manifest + "'", dir);
    if (code != 0) return "aapt2 failed: " + out.substr(0, 200);
    AxmlDocument doc = DecodeApp(fixture::BuildFixtureApk()).manifest;
    ManifestInfo info = ReadManifestInfo(doc);
    for (const std::string& needle :
         {info.package, info.version_name, std::string("E: manifest"), std::string("E: application"),
          std::string("E: uses-permission"), std::string("E: activity")}) {
      if (out.find(needle) == std::string::npos) return "aapt2 dump lacks '" + needle + "'";
    }
    ran.push_back("aapt2");
  }
  for (const std::string& t : ran) detail += (detail.empty() ? "" : ", ") + t;
  detail += " agree";
  if (apksigner.empty() || aapt2.empty()) detail += std::string("; ") + (apksigner.empty() ? "apksigner" : "aapt2") + " not installed";
  return {};
}

}  // namespace
}  // namespace appgrease

int main() {
  using namespace appgrease;
  Criterion("end-to-end", EndToEnd);
  Criterion("determinism", Determinism);
  Criterion("round-trips", RoundTrips);
  Criterion("dex-integrity", DexIntegrity);
  Criterion("tamper-evidence", Tamper);
  {
    std::unique_ptr<LiveServer> server;
    std::string startup;
    try {
      server = std::make_unique<LiveServer>();
    } catch (const std::exception& e) {
      startup = e.what();
    }
    auto live = [&](auto fn) {
      return [&, fn](std::string& detail) -> std::string {
        if (!server) return "server did not start: " + startup;
        return fn(*server, detail);
      };
    };
    Criterion("delta-efficiency", live(DeltaEfficiency));
    Criterion("idempotence", Idempotence);
    Criterion("revert", live(Revert));
  }
  Criterion("oracle-tools", OracleTools);
  std::printf("%s: %d failing criteria\n", g_failures == 0 ? "ACCEPTED" : "REJECTED", g_failures);
  return g_failures == 0 ? 0 : 1;
}
