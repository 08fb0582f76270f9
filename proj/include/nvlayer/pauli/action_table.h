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
#include <vector>

#include <Eigen/Core>

#include "nvlayer/hamiltonian/terms.h"
#include "nvlayer/pauli/basis.h"
#include "nvlayer/pauli/kernels.h"

namespace nvlayer {

class ThreadPool;

enum class TableLayout {
  kByTarget,  // gather: rows are target strings
  kBySource,  // scatter: rows are source strings
};

struct ActionStats {
  std::uint64_t n_entries = 0;
  std::uint64_t n_dropped = 0;
  // Sum of |coefficient| on dropped (truncated-out) targets over the total.
  double dropped_weight_fraction = 0.0;
};

/// Sparse real generator A with dc/dt = A c for Pauli expectation values c_P = <P>.
/// Stored in compressed rows; the row index is the target (gather) or the source (scatter).
class ActionTable {
 public:
  ActionTable() = default;

  /// Builds the table for `h` on `basis`. Uses `pool` for the per-source sweep when given.
  static ActionTable build(const HamiltonianTerms& h, const TruncatedBasis& basis,
                           TableLayout layout = TableLayout::kByTarget, ThreadPool* pool = nullptr);

  /// Assembles from explicit arrays (used by the cache loader).
  static ActionTable from_csr(std::size_t dim, TableLayout layout, std::vector<std::uint64_t> row_ptr,
                              std::vector<std::uint32_t> col, std::vector<double> val,
                              std::uint64_t basis_hash, std::uint64_t hamiltonian_hash,
                              const ActionStats& stats);

  std::size_t dim() const { return dim_; }
  TableLayout layout() const { return layout_; }
  std::size_t nnz() const { return val_.size(); }
  const ActionStats& stats() const { return stats_; }
  std::uint64_t basis_hash() const { return basis_hash_; }
  std::uint64_t hamiltonian_hash() const { return hamiltonian_hash_; }

  /// Max over strings of the larger of incoming and outgoing absolute coefficient sums.
  double lambda() const { return lambda_; }

  CsrView view() const { return CsrView{dim_, row_ptr_.data(), col_.data(), val_.data()}; }
  const std::vector<std::uint64_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::uint32_t>& col() const { return col_; }
  const std::vector<double>& val() const { return val_; }

  ActionTable with_layout(TableLayout layout) const;

  /// y = A x.
  void apply(const double* x, double* y, KernelChoice kernel = KernelChoice::kAuto,
             ThreadPool* pool = nullptr) const;
  /// y_b = alpha_b A x_b over `lanes` interleaved states.
  void apply_batched(const double* x, double* y, std::size_t lanes, const double* alpha,
                     KernelChoice kernel = KernelChoice::kAuto, ThreadPool* pool = nullptr) const;

  /// Dense generator (A(target, source)); small bases only.
  Eigen::MatrixXd dense() const;

 private:
  void finish();

  std::size_t dim_ = 0;
  TableLayout layout_ = TableLayout::kByTarget;
  std::vector<std::uint64_t> row_ptr_;
  std::vector<std::uint32_t> col_;
  std::vector<double> val_;
  std::uint64_t basis_hash_ = 0;
  std::uint64_t hamiltonian_hash_ = 0;
  ActionStats stats_;
  double lambda_ = 0.0;
};

}  // namespace nvlayer
