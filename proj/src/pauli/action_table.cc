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

#include "nvlayer/pauli/action_table.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nvlayer/errors.h"
#include "nvlayer/util/thread_pool.h"

namespace nvlayer {

namespace {

struct Entry {
  std::uint32_t tgt;
  std::uint32_t src;
  double coef;
};

struct Chunk {
  std::vector<Entry> entries;
  std::uint64_t dropped = 0;
  double dropped_weight = 0.0;
  double kept_weight = 0.0;
};

constexpr std::size_t kSourcesPerChunk = 2048;
constexpr std::uint64_t kParallelApplyNnz = std::uint64_t{1} << 18;
constexpr std::size_t kRowsPerTask = 4096;

}  // namespace

ActionTable ActionTable::build(const HamiltonianTerms& h, const TruncatedBasis& basis,
                               TableLayout layout, ThreadPool* pool) {
  if (h.num_sites() > basis.num_sites()) {
    throw ConfigError("Hamiltonian acts on " + std::to_string(h.num_sites()) +
                      " sites but the basis covers " + std::to_string(basis.num_sites()));
  }
  const auto& terms = h.terms();
  std::vector<double> weight(terms.size());
  std::vector<std::vector<std::uint32_t>> site_terms(basis.num_sites());
  for (std::size_t t = 0; t < terms.size(); ++t) {
    weight[t] = terms[t].pauli_weight();
    for (const auto& f : terms[t].product) site_terms[f.site].push_back(static_cast<std::uint32_t>(t));
  }

  const std::size_t dim = basis.size();
  const std::size_t n_chunks = (dim + kSourcesPerChunk - 1) / kSourcesPerChunk;
  std::vector<Chunk> chunks(n_chunks);
  const auto work = [&](std::size_t c) {
    Chunk& out = chunks[c];
    std::vector<std::uint32_t> stamp(terms.size(), 0xffffffffu);
    std::vector<std::uint32_t> cand;
    const std::size_t s0 = c * kSourcesPerChunk;
    const std::size_t s1 = std::min(dim, s0 + kSourcesPerChunk);
    for (std::size_t s = s0; s < s1; ++s) {
      const PauliString& q = basis.string(s);
      cand.clear();
      for (const auto& f : q) {
        for (std::uint32_t t : site_terms[f.site]) {
          if (stamp[t] != s) {
            stamp[t] = static_cast<std::uint32_t>(s);
            cand.push_back(t);
          }
        }
      }
      std::sort(cand.begin(), cand.end());
      for (std::uint32_t t : cand) {
        if (commutes(q, terms[t].product)) continue;
        const PauliProduct p = multiply(q, terms[t].product);
        // q h = i^p r with p odd; d<r>/dt gains 2 i (i^p) w <q>.
        const double coef = (p.phase == 1 ? -2.0 : 2.0) * weight[t];
        const auto r = basis.find(p.result);
        if (r) {
          out.entries.push_back(Entry{*r, static_cast<std::uint32_t>(s), coef});
          out.kept_weight += std::abs(coef);
        } else {
          ++out.dropped;
          out.dropped_weight += std::abs(coef);
        }
      }
    }
  };
  if (pool) {
    pool->parallel_for(n_chunks, work);
  } else {
    for (std::size_t c = 0; c < n_chunks; ++c) work(c);
  }

  ActionTable A;
  A.dim_ = dim;
  A.layout_ = layout;
  A.basis_hash_ = basis.hash();
  A.hamiltonian_hash_ = h.hash();
  std::uint64_t total = 0;
  double kept = 0.0, dropped = 0.0;
  for (const auto& c : chunks) {
    total += c.entries.size();
    A.stats_.n_dropped += c.dropped;
    kept += c.kept_weight;
    dropped += c.dropped_weight;
  }
  A.stats_.n_entries = total;
  A.stats_.dropped_weight_fraction = (kept + dropped) > 0 ? dropped / (kept + dropped) : 0.0;

  A.row_ptr_.assign(dim + 1, 0);
  for (const auto& c : chunks) {
    for (const auto& e : c.entries) {
      ++A.row_ptr_[(layout == TableLayout::kByTarget ? e.tgt : e.src) + 1];
    }
  }
  std::partial_sum(A.row_ptr_.begin(), A.row_ptr_.end(), A.row_ptr_.begin());
  A.col_.resize(total);
  A.val_.resize(total);
  std::vector<std::uint64_t> fill(A.row_ptr_.begin(), A.row_ptr_.end() - 1);
  for (auto& c : chunks) {
    for (const auto& e : c.entries) {
      const std::uint32_t row = layout == TableLayout::kByTarget ? e.tgt : e.src;
      const std::uint64_t k = fill[row]++;
      A.col_[k] = layout == TableLayout::kByTarget ? e.src : e.tgt;
      A.val_[k] = e.coef;
    }
    std::vector<Entry>().swap(c.entries);
  }
  A.finish();
  return A;
}

ActionTable ActionTable::from_csr(std::size_t dim, TableLayout layout,
                                  std::vector<std::uint64_t> row_ptr, std::vector<std::uint32_t> col,
                                  std::vector<double> val, std::uint64_t basis_hash,
                                  std::uint64_t hamiltonian_hash, const ActionStats& stats) {
  if (row_ptr.size() != dim + 1 || col.size() != val.size() || row_ptr.back() != val.size()) {
    throw CacheError("inconsistent compressed-row arrays");
  }
  for (std::size_t r = 0; r < dim; ++r) {
    if (row_ptr[r] > row_ptr[r + 1]) throw CacheError("row pointers are not monotone");
  }
  for (std::uint32_t c : col) {
    if (c >= dim) throw CacheError("column index out of range");
  }
  ActionTable A;
  A.dim_ = dim;
  A.layout_ = layout;
  A.row_ptr_ = std::move(row_ptr);
  A.col_ = std::move(col);
  A.val_ = std::move(val);
  A.basis_hash_ = basis_hash;
  A.hamiltonian_hash_ = hamiltonian_hash;
  A.stats_ = stats;
  A.finish();
  return A;
}

void ActionTable::finish() {
  std::vector<double> row_sum(dim_, 0.0), col_sum(dim_, 0.0);
  for (std::size_t r = 0; r < dim_; ++r) {
    for (std::uint64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      row_sum[r] += std::abs(val_[k]);
      col_sum[col_[k]] += std::abs(val_[k]);
    }
  }
  lambda_ = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) lambda_ = std::max({lambda_, row_sum[i], col_sum[i]});
}

ActionTable ActionTable::with_layout(TableLayout layout) const {
  if (layout == layout_) return *this;
  ActionTable A;
  A.dim_ = dim_;
  A.layout_ = layout;
  A.basis_hash_ = basis_hash_;
  A.hamiltonian_hash_ = hamiltonian_hash_;
  A.stats_ = stats_;
  A.row_ptr_.assign(dim_ + 1, 0);
  for (std::uint32_t c : col_) ++A.row_ptr_[c + 1];
  std::partial_sum(A.row_ptr_.begin(), A.row_ptr_.end(), A.row_ptr_.begin());
  A.col_.resize(col_.size());
  A.val_.resize(val_.size());
  std::vector<std::uint64_t> fill(A.row_ptr_.begin(), A.row_ptr_.end() - 1);
  for (std::size_t r = 0; r < dim_; ++r) {
    for (std::uint64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const std::uint64_t d = fill[col_[k]]++;
      A.col_[d] = static_cast<std::uint32_t>(r);
      A.val_[d] = val_[k];
    }
  }
  A.lambda_ = lambda_;
  return A;
}

void ActionTable::apply(const double* x, double* y, KernelChoice kernel, ThreadPool* pool) const {
  const KernelChoice k = resolve_kernel(kernel);
  const CsrView v = view();
  if (layout_ == TableLayout::kBySource) {
    std::fill(y, y + dim_, 0.0);
    kernels::scatter_scalar(v, x, y, 0, dim_);
    return;
  }
  const auto run = [&](std::size_t r0, std::size_t r1) {
    switch (k) {
#if defined(NVLAYER_HAVE_AVX2_KERNELS)
      case KernelChoice::kAvx2:
        kernels::gather_avx2(v, x, y, r0, r1);
        return;
#endif
#if defined(NVLAYER_HAVE_NEON_KERNELS)
      case KernelChoice::kNeon:
        kernels::gather_neon(v, x, y, r0, r1);
        return;
#endif
      default:
        kernels::gather_scalar(v, x, y, r0, r1);
    }
  };
  if (pool && pool->size() > 1 && nnz() >= kParallelApplyNnz) {
    const std::size_t n_tasks = (dim_ + kRowsPerTask - 1) / kRowsPerTask;
    pool->parallel_for(n_tasks, [&](std::size_t t) {
      run(t * kRowsPerTask, std::min(dim_, (t + 1) * kRowsPerTask));
    });
  } else {
    run(0, dim_);
  }
}

void ActionTable::apply_batched(const double* x, double* y, std::size_t lanes, const double* alpha,
                                KernelChoice kernel, ThreadPool* pool) const {
  KernelChoice k = resolve_kernel(kernel);
  if (lanes % 4 != 0) k = KernelChoice::kScalar;
  const CsrView v = view();
  if (layout_ == TableLayout::kBySource) {
    std::fill(y, y + dim_ * lanes, 0.0);
    switch (k) {
#if defined(NVLAYER_HAVE_AVX2_KERNELS)
      case KernelChoice::kAvx2:
        kernels::scatter_batched_avx2(v, x, y, lanes, 0, dim_);
        break;
#endif
#if defined(NVLAYER_HAVE_NEON_KERNELS)
      case KernelChoice::kNeon:
        kernels::scatter_batched_neon(v, x, y, lanes, 0, dim_);
        break;
#endif
      default:
        kernels::scatter_batched_scalar(v, x, y, lanes, 0, dim_);
    }
    for (std::size_t r = 0; r < dim_; ++r) {
      for (std::size_t b = 0; b < lanes; ++b) y[r * lanes + b] *= alpha[b];
    }
    return;
  }
  const auto run = [&](std::size_t r0, std::size_t r1) {
    switch (k) {
#if defined(NVLAYER_HAVE_AVX2_KERNELS)
      case KernelChoice::kAvx2:
        kernels::gather_batched_avx2(v, x, y, lanes, alpha, r0, r1);
        return;
#endif
#if defined(NVLAYER_HAVE_NEON_KERNELS)
      case KernelChoice::kNeon:
        kernels::gather_batched_neon(v, x, y, lanes, alpha, r0, r1);
        return;
#endif
      default:
        kernels::gather_batched_scalar(v, x, y, lanes, alpha, r0, r1);
    }
  };
  if (pool && pool->size() > 1 && nnz() * lanes >= kParallelApplyNnz) {
    const std::size_t rows = std::max<std::size_t>(64, kRowsPerTask / lanes);
    const std::size_t n_tasks = (dim_ + rows - 1) / rows;
    pool->parallel_for(n_tasks, [&](std::size_t t) {
      run(t * rows, std::min(dim_, (t + 1) * rows));
    });
  } else {
    run(0, dim_);
  }
}

Eigen::MatrixXd ActionTable::dense() const {
  if (dim_ > 8192) throw CapacityError("dense generator requested for a large basis", dim_);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim_),
                                            static_cast<Eigen::Index>(dim_));
  for (std::size_t r = 0; r < dim_; ++r) {
    for (std::uint64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const auto a = static_cast<Eigen::Index>(r);
      const auto b = static_cast<Eigen::Index>(col_[k]);
      if (layout_ == TableLayout::kByTarget) {
        M(a, b) += val_[k];
      } else {
        M(b, a) += val_[k];
      }
    }
  }
  return M;
}

}  // namespace nvlayer
