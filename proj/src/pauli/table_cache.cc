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

#include "nvlayer/pauli/table_cache.h"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "nvlayer/errors.h"

namespace nvlayer {

namespace {

constexpr char kMagic[8] = {'N', 'V', 'L', 'A', 'T', 'B', 'L', '1'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr const char* kSuffix = ".nvtbl";

class HashingWriter {
 public:
  explicit HashingWriter(std::ostream& os) : os_(os) {}
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= c[i];
      h_ *= 1099511628211ull;
    }
    os_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  template <typename T>
  void pod(const T& v) {
    bytes(&v, sizeof v);
  }
  std::uint64_t hash() const { return h_; }

 private:
  std::ostream& os_;
  std::uint64_t h_ = 1469598103934665603ull;
};

class HashingReader {
 public:
  explicit HashingReader(std::istream& is) : is_(is) {}
  void bytes(void* p, std::size_t n) {
    is_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is_.gcount()) != n) throw CacheError("truncated table file");
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= c[i];
      h_ *= 1099511628211ull;
    }
  }
  template <typename T>
  T pod() {
    T v;
    bytes(&v, sizeof v);
    return v;
  }
  std::uint64_t hash() const { return h_; }

 private:
  std::istream& is_;
  std::uint64_t h_ = 1469598103934665603ull;
};

struct Header {
  std::uint32_t layout = 0;
  std::uint64_t basis_hash = 0;
  std::uint64_t hamiltonian_hash = 0;
  std::string code_version;
  std::uint64_t dim = 0;
  std::uint64_t nnz = 0;
  ActionStats stats;
};

Header read_header(HashingReader& r) {
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof magic) != 0) throw CacheError("not an action-table file");
  if (r.pod<std::uint32_t>() != kFormatVersion) throw CacheError("unsupported table format");
  Header h;
  h.layout = r.pod<std::uint32_t>();
  if (h.layout > 1) throw CacheError("unknown table layout");
  h.basis_hash = r.pod<std::uint64_t>();
  h.hamiltonian_hash = r.pod<std::uint64_t>();
  const auto len = r.pod<std::uint32_t>();
  if (len > 256) throw CacheError("corrupt version string");
  h.code_version.resize(len);
  r.bytes(h.code_version.data(), len);
  h.dim = r.pod<std::uint64_t>();
  h.nnz = r.pod<std::uint64_t>();
  h.stats.n_entries = r.pod<std::uint64_t>();
  h.stats.n_dropped = r.pod<std::uint64_t>();
  h.stats.dropped_weight_fraction = r.pod<double>();
  return h;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string table_code_version() {
  return std::string("nvlayer-") + NVLAYER_VERSION + "/table-v" + std::to_string(kFormatVersion);
}

void write_table(std::ostream& os, const ActionTable& t) {
  HashingWriter w(os);
  w.bytes(kMagic, sizeof kMagic);
  w.pod(kFormatVersion);
  w.pod(static_cast<std::uint32_t>(t.layout() == TableLayout::kByTarget ? 0 : 1));
  w.pod(t.basis_hash());
  w.pod(t.hamiltonian_hash());
  const std::string ver = table_code_version();
  w.pod(static_cast<std::uint32_t>(ver.size()));
  w.bytes(ver.data(), ver.size());
  w.pod(static_cast<std::uint64_t>(t.dim()));
  w.pod(static_cast<std::uint64_t>(t.nnz()));
  w.pod(t.stats().n_entries);
  w.pod(t.stats().n_dropped);
  w.pod(t.stats().dropped_weight_fraction);
  w.bytes(t.row_ptr().data(), t.row_ptr().size() * sizeof(std::uint64_t));
  w.bytes(t.col().data(), t.col().size() * sizeof(std::uint32_t));
  w.bytes(t.val().data(), t.val().size() * sizeof(double));
  const std::uint64_t sum = w.hash();
  os.write(reinterpret_cast<const char*>(&sum), sizeof sum);
  if (!os) throw CacheError("failed writing action table");
}

ActionTable read_table(std::istream& is) {
  HashingReader r(is);
  const Header h = read_header(r);
  if (h.code_version != table_code_version()) {
    throw CacheError("table written by " + h.code_version + ", expected " + table_code_version());
  }
  if (h.dim >= (std::uint64_t{1} << 31) || h.nnz > (std::uint64_t{1} << 36)) {
    throw CacheError("implausible table dimensions");
  }
  std::vector<std::uint64_t> row_ptr(h.dim + 1);
  std::vector<std::uint32_t> col(h.nnz);
  std::vector<double> val(h.nnz);
  r.bytes(row_ptr.data(), row_ptr.size() * sizeof(std::uint64_t));
  r.bytes(col.data(), col.size() * sizeof(std::uint32_t));
  r.bytes(val.data(), val.size() * sizeof(double));
  const std::uint64_t expect = r.hash();
  std::uint64_t sum = 0;
  is.read(reinterpret_cast<char*>(&sum), sizeof sum);
  if (is.gcount() != sizeof sum || sum != expect) throw CacheError("table checksum mismatch");
  return ActionTable::from_csr(h.dim, h.layout == 0 ? TableLayout::kByTarget : TableLayout::kBySource,
                               std::move(row_ptr), std::move(col), std::move(val), h.basis_hash,
                               h.hamiltonian_hash, h.stats);
}

TableCache::TableCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path TableCache::default_dir() {
  if (const char* env = std::getenv("NVLAYER_CACHE_DIR"); env && *env) return env;
  return ".nvlayer-cache";
}

std::filesystem::path TableCache::path_for(std::uint64_t basis_hash, std::uint64_t hamiltonian_hash,
                                           TableLayout layout) const {
  return dir_ / (hex(basis_hash) + "-" + hex(hamiltonian_hash) +
                 (layout == TableLayout::kByTarget ? "-t" : "-s") + kSuffix);
}

std::optional<ActionTable> TableCache::load(std::uint64_t basis_hash,
                                            std::uint64_t hamiltonian_hash, TableLayout layout,
                                            std::string* reason) const {
  const auto path = path_for(basis_hash, hamiltonian_hash, layout);
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (reason) *reason = "not cached";
    return std::nullopt;
  }
  try {
    ActionTable t = read_table(in);
    if (t.basis_hash() != basis_hash || t.hamiltonian_hash() != hamiltonian_hash ||
        t.layout() != layout) {
      if (reason) *reason = "hash mismatch";
      return std::nullopt;
    }
    return t;
  } catch (const CacheError& e) {
    if (reason) *reason = e.what();
    return std::nullopt;
  }
}

void TableCache::store(const ActionTable& table) const {
  std::filesystem::create_directories(dir_);
  const auto path = path_for(table.basis_hash(), table.hamiltonian_hash(), table.layout());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CacheError("cannot write cache file " + tmp.string());
    write_table(out, table);
  }
  std::filesystem::rename(tmp, path);
}

ActionTable TableCache::load_or_build(const HamiltonianTerms& h, const TruncatedBasis& basis,
                                      TableLayout layout, ThreadPool* pool, bool* rebuilt,
                                      std::string* reason) const {
  if (auto t = load(basis.hash(), h.hash(), layout, reason)) {
    if (rebuilt) *rebuilt = false;
    return std::move(*t);
  }
  ActionTable t = ActionTable::build(h, basis, layout, pool);
  store(t);
  if (rebuilt) *rebuilt = true;
  return t;
}

std::vector<TableCache::Entry> TableCache::list() const {
  std::vector<Entry> out;
  std::error_code ec;
  if (!std::filesystem::is_directory(dir_, ec)) return out;
  for (const auto& de : std::filesystem::directory_iterator(dir_)) {
    if (de.path().extension() != kSuffix) continue;
    Entry e;
    e.path = de.path();
    e.bytes = de.file_size(ec);
    std::ifstream in(de.path(), std::ios::binary);
    try {
      HashingReader r(in);
      const Header h = read_header(r);
      e.basis_hash = h.basis_hash;
      e.hamiltonian_hash = h.hamiltonian_hash;
      e.code_version = h.code_version;
      e.dim = h.dim;
      e.nnz = h.nnz;
      in.seekg(0);
      read_table(in);
      e.valid = true;
    } catch (const CacheError& err) {
      e.problem = err.what();
    }
    out.push_back(std::move(e));
  }
  std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) { return a.path < b.path; });
  return out;
}

std::size_t TableCache::purge() const {
  std::size_t n = 0;
  std::error_code ec;
  if (!std::filesystem::is_directory(dir_, ec)) return 0;
  std::vector<std::filesystem::path> victims;
  for (const auto& de : std::filesystem::directory_iterator(dir_)) {
    const auto ext = de.path().extension();
    if (ext == kSuffix || ext == ".tmp") victims.push_back(de.path());
  }
  for (const auto& p : victims) n += std::filesystem::remove(p, ec) ? 1 : 0;
  return n;
}

}  // namespace nvlayer
