// Copyright 2026 The nvlayer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nvlayer/pauli/action_table.h"

namespace nvlayer {

/// Version string written into cache files; tables from other versions are refused.
std::string table_code_version();

/// Binary container: magic, format version, hashes, code version, compressed rows, and a
/// trailing FNV-1a checksum over all preceding bytes.
void write_table(std::ostream& os, const ActionTable& table);
/// Throws CacheError on a bad magic, version, checksum or structure.
ActionTable read_table(std::istream& is);

class TableCache {
 public:
  struct Entry {
    std::filesystem::path path;
    std::uint64_t basis_hash = 0;
    std::uint64_t hamiltonian_hash = 0;
    std::string code_version;
    std::uint64_t dim = 0;
    std::uint64_t nnz = 0;
    std::uintmax_t bytes = 0;
    bool valid = false;
    std::string problem;
  };

  explicit TableCache(std::filesystem::path dir);

  /// $NVLAYER_CACHE_DIR, else ".nvlayer-cache" in the working directory.
  static std::filesystem::path default_dir();

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path path_for(std::uint64_t basis_hash, std::uint64_t hamiltonian_hash,
                                 TableLayout layout) const;

  /// Returns the cached table, or nullopt with *reason set when absent or refused.
  std::optional<ActionTable> load(std::uint64_t basis_hash, std::uint64_t hamiltonian_hash,
                                  TableLayout layout, std::string* reason = nullptr) const;
  /// Atomic write (temporary file, then rename).
  void store(const ActionTable& table) const;

  /// Loads when valid, otherwise builds and stores. *rebuilt reports which happened.
  ActionTable load_or_build(const HamiltonianTerms& h, const TruncatedBasis& basis,
                            TableLayout layout, ThreadPool* pool = nullptr,
                            bool* rebuilt = nullptr, std::string* reason = nullptr) const;

  std::vector<Entry> list() const;
  /// Removes every table file; returns the count removed.
  std::size_t purge() const;

 private:
  std::filesystem::path dir_;
};

}  // namespace nvlayer
