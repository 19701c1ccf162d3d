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

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "appgrease/extension.h"

namespace appgrease {

// An immutable set of loaded extension packages keyed by id.
class Repository {
 public:
  Repository() = default;

  // Loads every subdirectory holding extension.json and every *.zip package
  // directly inside `dir`. Throws on the first invalid package or duplicate id.
  static Repository LoadDir(const std::filesystem::path& dir);

  void Add(ExtensionPackage pkg);  // throws InvalidManifest on duplicate id

  // Exact id, or the short name when exactly one package carries it.
  std::shared_ptr<const ExtensionPackage> Find(std::string_view id) const;
  std::vector<std::shared_ptr<const ExtensionPackage>> All() const;
  std::vector<std::string> Ids() const;
  size_t size() const { return packages_.size(); }

 private:
  std::map<std::string, std::shared_ptr<const ExtensionPackage>, std::less<>> packages_;
};

// Shared, reloadable view of a repository. Readers take a snapshot; reload
// swaps it atomically so in-flight jobs keep the packages they started with.
class RepositoryIndex {
 public:
  explicit RepositoryIndex(std::filesystem::path dir);

  std::shared_ptr<const Repository> Snapshot() const;
  // Returns the number of packages now loaded. On error the old set stays.
  size_t Reload();
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::mutex mu_;
  std::shared_ptr<const Repository> current_;
};

}  // namespace appgrease
