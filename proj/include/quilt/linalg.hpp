/**
 * Exact sparse/dense linear algebra over the rationals.
 *
 * Everything here is plain Gaussian elimination with full back-substitution
 * (reduced row echelon form), kept exact with GMP rationals.  The library
 * leans on three entry points:
 *
 *   RowReducer    — incremental RREF of a growing row space; used both to
 *                   reduce vectors modulo a subspace (normal forms) and to
 *                   canonicalize bases deterministically.
 *   solve_linear  — affine systems A x = b with an explicit inconsistency
 *                   witness and a particular solution that sets every free
 *                   variable to zero (the library-wide tie-break policy).
 *   DenseMat      — small dense matrices with exact multiply / inverse,
 *                   reporting a kernel witness when the inverse fails.
 *
 * Column indices are plain ints; callers fix the semantic ordering by how
 * they enumerate their domain.  Pivoting always prefers the smallest column
 * index, so "index 0 = most-eliminated element" is the contract.
 */
#pragma once

#include <map>
#include <optional>
#include <vector>

#include "quilt/error.hpp"
#include "quilt/rational.hpp"

namespace quilt {

/// Sparse rational vector: column index -> nonzero coefficient.
using SparseVec = std::map<int, Rat>;

/// dst += c * src, dropping entries that cancel to zero.
inline void axpy(SparseVec& dst, const Rat& c, const SparseVec& src) {
  if (c == 0) return;
  for (const auto& [j, v] : src) {
    auto it = dst.find(j);
    if (it == dst.end()) {
      dst.emplace(j, c * v);
    } else {
      it->second += c * v;
      if (it->second == 0) dst.erase(it);
    }
  }
}

inline SparseVec scaled(const SparseVec& v, const Rat& c) {
  SparseVec out;
  axpy(out, c, v);
  return out;
}

/// Incremental reduced row echelon form.  Rows are stored fully reduced
/// against each other, keyed by pivot column; each stored row has a leading
/// coefficient of 1 at its pivot (the smallest column index it touches).
class RowReducer {
public:
  /// Reduce v modulo the current row space; the result has no support on
  /// pivot columns.
  SparseVec reduce(SparseVec v) const {
    for (auto it = v.begin(); it != v.end();) {
      auto row = rows_.find(it->first);
      if (row == rows_.end()) {
        ++it;
        continue;
      }
      Rat c = -it->second;
      axpy(v, c, row->second);
      // The pivot entry cancelled; restart from the next surviving column.
      it = v.upper_bound(row->first);
    }
    return v;
  }

  /// Insert v's residue as a new row if it is nonzero.  Keeps full RREF by
  /// eliminating the new pivot from all previously stored rows.  Returns
  /// true when the rank grew.
  bool add_row(SparseVec v) {
    v = reduce(std::move(v));
    if (v.empty()) return false;
    int pivot = v.begin()->first;
    Rat inv = 1 / v.begin()->second;
    v = scaled(v, inv);
    for (auto& [p, row] : rows_) {
      auto hit = row.find(pivot);
      if (hit == row.end()) continue;
      Rat c = -hit->second;
      axpy(row, c, v);
    }
    rows_.emplace(pivot, std::move(v));
    return true;
  }

  bool contains(const SparseVec& v) const { return reduce(v).empty(); }
  int rank() const { return static_cast<int>(rows_.size()); }
  bool is_pivot(int col) const { return rows_.count(col) != 0; }
  /// pivot column -> normalized reduced row, ascending by pivot.
  const std::map<int, SparseVec>& rows() const { return rows_; }

private:
  std::map<int, SparseVec> rows_;
};

/// Result of an affine solve.  `particular` sets every free variable to
/// zero; `kernel` holds one homogeneous solution per free column, in
/// ascending free-column order, normalized to 1 at that column.
struct LinearSolution {
  bool consistent = true;
  SparseVec particular;
  std::vector<int> free_columns;
  std::vector<SparseVec> kernel;
  int witness_row = -1;  ///< index of an equation proving inconsistency
};

/// Solve the system given by `rows` (equations over columns 0..ncols-1)
/// against `rhs`.  When rhs is omitted the system is homogeneous and
/// `kernel` is a basis of the null space.
inline LinearSolution solve_linear(int ncols, const std::vector<SparseVec>& rows,
                                   const std::vector<Rat>& rhs = {}) {
  // Augment with the RHS in column `ncols`; an RREF row whose pivot lands
  // there reads 0 = 1 and certifies inconsistency.
  RowReducer red;
  LinearSolution sol;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    SparseVec r = rows[i];
    if (i < rhs.size() && rhs[i] != 0) r[ncols] = -rhs[i];
    SparseVec residue = red.reduce(r);
    if (!residue.empty() && residue.begin()->first == ncols) {
      sol.consistent = false;
      sol.witness_row = static_cast<int>(i);
      return sol;
    }
    red.add_row(std::move(r));
  }
  // Particular solution: pivot variable = RHS entry of its row (free = 0).
  for (const auto& [p, row] : red.rows()) {
    auto b = row.find(ncols);
    if (b != row.end()) sol.particular[p] = -b->second;
  }
  for (int j = 0; j < ncols; ++j)
    if (!red.is_pivot(j)) sol.free_columns.push_back(j);
  for (int f : sol.free_columns) {
    SparseVec k;
    k[f] = 1;
    for (const auto& [p, row] : red.rows()) {
      auto hit = row.find(f);
      if (hit != row.end()) k[p] = -hit->second;
    }
    sol.kernel.push_back(std::move(k));
  }
  return sol;
}

/// Basis of { x : A x = 0 } for the sparse row list A.
inline std::vector<SparseVec> kernel_basis(int ncols,
                                           const std::vector<SparseVec>& rows) {
  return solve_linear(ncols, rows).kernel;
}

/// Small dense exact matrix, row-major.
struct DenseMat {
  int nrows = 0;
  int ncols = 0;
  std::vector<Rat> a;

  DenseMat() = default;
  DenseMat(int r, int c) : nrows(r), ncols(c), a(static_cast<std::size_t>(r) * c) {}

  Rat& at(int i, int j) { return a[static_cast<std::size_t>(i) * ncols + j]; }
  const Rat& at(int i, int j) const {
    return a[static_cast<std::size_t>(i) * ncols + j];
  }

  static DenseMat identity(int n) {
    DenseMat m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
  }

  bool operator==(const DenseMat& o) const {
    return nrows == o.nrows && ncols == o.ncols && a == o.a;
  }
};

inline DenseMat mat_mul(const DenseMat& x, const DenseMat& y) {
  if (x.ncols != y.nrows)
    throw std::logic_error("mat_mul: incompatible shapes");
  DenseMat out(x.nrows, y.ncols);
  for (int i = 0; i < x.nrows; ++i)
    for (int k = 0; k < x.ncols; ++k) {
      const Rat& c = x.at(i, k);
      if (c == 0) continue;
      for (int j = 0; j < y.ncols; ++j) {
        const Rat& v = y.at(k, j);
        if (v != 0) out.at(i, j) += c * v;
      }
    }
  return out;
}

inline SparseVec mat_apply(const DenseMat& m, const SparseVec& v) {
  SparseVec out;
  for (const auto& [j, c] : v)
    for (int i = 0; i < m.nrows; ++i) {
      const Rat& mij = m.at(i, j);
      if (mij == 0) continue;
      Rat& o = out[i];
      o += mij * c;
      if (o == 0) out.erase(i);
    }
  return out;
}

/// Exact inverse by Gauss–Jordan.  On a singular input returns nullopt and,
/// if requested, stores one nonzero kernel vector in *kernel_witness.
inline std::optional<DenseMat> mat_inverse(const DenseMat& m,
                                           std::vector<Rat>* kernel_witness = nullptr) {
  if (m.nrows != m.ncols) throw std::logic_error("mat_inverse: not square");
  int n = m.nrows;
  std::vector<SparseVec> rows(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (m.at(i, j) != 0) rows[i][j] = m.at(i, j);
  LinearSolution hom = solve_linear(n, rows);
  if (!hom.kernel.empty()) {
    if (kernel_witness) {
      kernel_witness->assign(n, Rat(0));
      for (const auto& [j, c] : hom.kernel.front()) (*kernel_witness)[j] = c;
    }
    return std::nullopt;
  }
  // Nonsingular: solve A x = e_k column by column through one shared RREF.
  RowReducer red;
  for (int i = 0; i < n; ++i) {
    SparseVec r = rows[i];
    r[n + i] = 1;  // carry the full identity block alongside
    red.add_row(std::move(r));
  }
  DenseMat inv(n, n);
  for (const auto& [p, row] : red.rows()) {
    if (p >= n) throw std::logic_error("mat_inverse: rank bookkeeping failed");
    for (const auto& [j, c] : row)
      if (j >= n) inv.at(p, j - n) = c;
  }
  return inv;
}

}  // namespace quilt
