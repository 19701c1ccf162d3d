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

#include "appgrease/repository.h"

#include <algorithm>
#include <fstream>
#include <iterator>

#include "appgrease/error.h"

namespace appgrease {

namespace fs = std::filesystem;

Repository Repository::LoadDir(const fs::path& dir) {
  Repository repo;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw Error(ErrorCode::kIo, "extensions directory " + dir.string() + " does not exist");
  }
  std::vector<fs::path> candidates;
  for (const fs::directory_entry& e : fs::directory_iterator(dir)) candidates.push_back(e.path());
  std::sort(candidates.begin(), candidates.end());
  for (const fs::path& p : candidates) {
    if (fs::is_directory(p) && fs::exists(p / kExtensionManifestName)) {
      repo.Add(LoadExtensionDir(p));
    } else if (fs::is_regular_file(p) && p.extension() == ".zip") {
      std::ifstream in(p, std::ios::binary);
      Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      repo.Add(LoadExtension(data));
    }
  }
  return repo;
}

void Repository::Add(ExtensionPackage pkg) {
  std::string id = pkg.id;
  auto [it, inserted] =
      packages_.emplace(id, std::make_shared<const ExtensionPackage>(std::move(pkg)));
  if (!inserted) throw Error(ErrorCode::kInvalidManifest, "duplicate extension id " + id);
}

std::shared_ptr<const ExtensionPackage> Repository::Find(std::string_view id) const {
  auto it = packages_.find(id);
  if (it != packages_.end()) return it->second;
  std::shared_ptr<const ExtensionPackage> match;
  for (const auto& [key, pkg] : packages_) {
    if (pkg->ShortName() != id) continue;
    if (match) return nullptr;  // ambiguous
    match = pkg;
  }
  return match;
}

std::vector<std::shared_ptr<const ExtensionPackage>> Repository::All() const {
  std::vector<std::shared_ptr<const ExtensionPackage>> out;
  for (const auto& [id, pkg] : packages_) out.push_back(pkg);
  return out;
}

std::vector<std::string> Repository::Ids() const {
  std::vector<std::string> out;
  for (const auto& [id, pkg] : packages_) out.push_back(id);
  return out;
}

RepositoryIndex::RepositoryIndex(fs::path dir)
    : dir_(std::move(dir)), current_(std::make_shared<const Repository>()) {}

std::shared_ptr<const Repository> RepositoryIndex::Snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  return current_;
}

size_t RepositoryIndex::Reload() {
  auto fresh = std::make_shared<const Repository>(Repository::LoadDir(dir_));
  std::lock_guard<std::mutex> lock(mu_);
  current_ = fresh;
  return current_->size();
}

}  // namespace appgrease
