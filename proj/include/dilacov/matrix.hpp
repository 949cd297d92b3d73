#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <vector>

namespace dilacov {

using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Dense integer matrix with arbitrary-precision entries. Row-major.
class IntMatrix {
 public:
  IntMatrix() = default;
  IntMatrix(long rows, long cols) : rows_(rows), cols_(cols), a_(rows * cols) {}
  IntMatrix(std::initializer_list<std::initializer_list<long long>> init);

  static IntMatrix identity(long n);
  static IntMatrix diagonal(const std::vector<Int>& d);

  long rows() const { return rows_; }
  long cols() const { return cols_; }
  Int& at(long i, long j) { return a_[i * cols_ + j]; }
  const Int& at(long i, long j) const { return a_[i * cols_ + j]; }

  IntMatrix operator*(const IntMatrix& rhs) const;
  bool operator==(const IntMatrix& rhs) const = default;

  void swap_rows(long i, long j);
  void swap_cols(long i, long j);
  // row i -= q * row j, col i -= q * col j
  void add_row(long i, long j, const Int& q);
  void add_col(long i, long j, const Int& q);
  void negate_row(long i);
  void negate_col(long i);

  std::vector<Int> column(long j) const;
  void set_column(long j, const std::vector<Int>& v);
  // Horizontal concatenation [*this | rhs]; row counts must agree.
  IntMatrix hconcat(const IntMatrix& rhs) const;
  IntMatrix transpose() const;

 private:
  long rows_ = 0, cols_ = 0;
  std::vector<Int> a_;
};

struct SmithForm {
  IntMatrix S;  // diagonal with s1 | s2 | ..., nonnegative
  IntMatrix U;  // unimodular, rows
  IntMatrix V;  // unimodular, cols; S = U * M * V
  std::vector<Int> diagonal;  // min(rows, cols) entries in divisibility order
  long rank = 0;              // number of nonzero diagonal entries
};

// S = U * M * V with U, V unimodular, S diagonal, s1 | s2 | ..., all >= 0.
// Empty dimensions are handled. Throws ResourceError if intermediate entries
// blow past the precision budget.
SmithForm smith_normal_form(const IntMatrix& m);

// Column-style Hermite normal form of a full-column-rank lattice basis.
// Input: k x m matrix whose columns span a rank-k lattice in Z^k.
// Output: unique k x k lower-triangular basis with positive diagonal and
// 0 <= h[i][j] < h[i][i] for j < i.
IntMatrix column_hnf(const IntMatrix& m);

// Basis of { x : M x = 0 } as matrix columns (may have zero columns count).
IntMatrix kernel_basis(const IntMatrix& m);

// Solve H x = b for lower-triangular H with nonzero diagonal.
// Returns nullopt if there is no integer solution.
std::optional<std::vector<Int>> solve_lower_triangular(const IntMatrix& h,
                                                       const std::vector<Int>& b);

// Solve H W = B columnwise; every column must be solvable.
IntMatrix solve_lower_triangular_matrix(const IntMatrix& h, const IntMatrix& b);

// Invariant factors (> 1) of Z^n / colspan(m); requires the quotient finite.
std::vector<Int> finite_cokernel_invariants(long n, const IntMatrix& m);

// Exact determinant by fraction-free elimination (test and certification use).
Int determinant(IntMatrix m);

}  // namespace dilacov
