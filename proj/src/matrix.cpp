#include "dilacov/matrix.hpp"

#include <algorithm>
#include <cstdlib>

#include "dilacov/errors.hpp"

namespace dilacov {

namespace {

// Generous ceiling on entry growth; SNF pivots shrink fast at desk scale so
// hitting this means something ran away.
constexpr unsigned kMaxBits = 1u << 20;

void check_budget(const Int& v) {
  if (msb(abs(v) + 1) > kMaxBits) {
    throw ResourceError("integer entry exceeded the precision budget in normal-form computation");
  }
}

}  // namespace

IntMatrix::IntMatrix(std::initializer_list<std::initializer_list<long long>> init) {
  rows_ = static_cast<long>(init.size());
  cols_ = rows_ ? static_cast<long>(init.begin()->size()) : 0;
  a_.resize(rows_ * cols_);
  long i = 0;
  for (const auto& row : init) {
    long j = 0;
    for (long long v : row) at(i, j++) = v;
    ++i;
  }
}

IntMatrix IntMatrix::identity(long n) {
  IntMatrix m(n, n);
  for (long i = 0; i < n; ++i) m.at(i, i) = 1;
  return m;
}

IntMatrix IntMatrix::diagonal(const std::vector<Int>& d) {
  IntMatrix m(static_cast<long>(d.size()), static_cast<long>(d.size()));
  for (long i = 0; i < m.rows(); ++i) m.at(i, i) = d[i];
  return m;
}

IntMatrix IntMatrix::operator*(const IntMatrix& rhs) const {
  IntMatrix out(rows_, rhs.cols_);
  for (long i = 0; i < rows_; ++i)
    for (long k = 0; k < cols_; ++k) {
      const Int& v = at(i, k);
      if (v == 0) continue;
      for (long j = 0; j < rhs.cols_; ++j) out.at(i, j) += v * rhs.at(k, j);
    }
  return out;
}

void IntMatrix::swap_rows(long i, long j) {
  if (i == j) return;
  for (long c = 0; c < cols_; ++c) std::swap(at(i, c), at(j, c));
}

void IntMatrix::swap_cols(long i, long j) {
  if (i == j) return;
  for (long r = 0; r < rows_; ++r) std::swap(at(r, i), at(r, j));
}

void IntMatrix::add_row(long i, long j, const Int& q) {
  if (q == 0) return;
  for (long c = 0; c < cols_; ++c) at(i, c) -= q * at(j, c);
}

void IntMatrix::add_col(long i, long j, const Int& q) {
  if (q == 0) return;
  for (long r = 0; r < rows_; ++r) at(r, i) -= q * at(r, j);
}

void IntMatrix::negate_row(long i) {
  for (long c = 0; c < cols_; ++c) at(i, c) = -at(i, c);
}

void IntMatrix::negate_col(long i) {
  for (long r = 0; r < rows_; ++r) at(r, i) = -at(r, i);
}

std::vector<Int> IntMatrix::column(long j) const {
  std::vector<Int> v(rows_);
  for (long i = 0; i < rows_; ++i) v[i] = at(i, j);
  return v;
}

void IntMatrix::set_column(long j, const std::vector<Int>& v) {
  for (long i = 0; i < rows_; ++i) at(i, j) = v[i];
}

IntMatrix IntMatrix::hconcat(const IntMatrix& rhs) const {
  IntMatrix out(rows_, cols_ + rhs.cols_);
  for (long i = 0; i < rows_; ++i) {
    for (long j = 0; j < cols_; ++j) out.at(i, j) = at(i, j);
    for (long j = 0; j < rhs.cols_; ++j) out.at(i, cols_ + j) = rhs.at(i, j);
  }
  return out;
}

IntMatrix IntMatrix::transpose() const {
  IntMatrix out(cols_, rows_);
  for (long i = 0; i < rows_; ++i)
    for (long j = 0; j < cols_; ++j) out.at(j, i) = at(i, j);
  return out;
}

SmithForm smith_normal_form(const IntMatrix& input) {
  SmithForm f;
  f.S = input;
  f.U = IntMatrix::identity(input.rows());
  f.V = IntMatrix::identity(input.cols());
  IntMatrix& S = f.S;
  const long n = S.rows(), m = S.cols();

  for (long t = 0; t < std::min(n, m); ++t) {
    // Pivot: smallest nonzero magnitude in the trailing submatrix.
    long pi = -1, pj = -1;
    for (long i = t; i < n; ++i)
      for (long j = t; j < m; ++j) {
        if (S.at(i, j) == 0) continue;
        if (pi < 0 || abs(S.at(i, j)) < abs(S.at(pi, pj))) { pi = i; pj = j; }
      }
    if (pi < 0) break;  // trailing submatrix is zero
    S.swap_rows(t, pi);
    f.U.swap_rows(t, pi);
    S.swap_cols(t, pj);
    f.V.swap_cols(t, pj);

    for (;;) {
      bool restart = false;
      // Clear column t below the pivot.
      for (long i = t + 1; i < n && !restart; ++i) {
        if (S.at(i, t) == 0) continue;
        Int q = S.at(i, t) / S.at(t, t);
        S.add_row(i, t, q);
        f.U.add_row(i, t, q);
        check_budget(S.at(i, t));
        if (S.at(i, t) != 0) {  // remainder is a smaller pivot candidate
          S.swap_rows(t, i);
          f.U.swap_rows(t, i);
          restart = true;
        }
      }
      if (restart) continue;
      // Clear row t right of the pivot.
      for (long j = t + 1; j < m && !restart; ++j) {
        if (S.at(t, j) == 0) continue;
        Int q = S.at(t, j) / S.at(t, t);
        S.add_col(j, t, q);
        f.V.add_col(j, t, q);
        check_budget(S.at(t, j));
        if (S.at(t, j) != 0) {
          S.swap_cols(t, j);
          f.V.swap_cols(t, j);
          restart = true;
        }
      }
      if (restart) continue;
      // Enforce that the pivot divides the whole trailing submatrix.
      long bi = -1, bj = -1;
      for (long i = t + 1; i < n && bi < 0; ++i)
        for (long j = t + 1; j < m; ++j)
          if (S.at(i, j) % S.at(t, t) != 0) { bi = i; bj = j; break; }
      if (bi < 0) break;
      S.add_row(t, bi, Int(-1));  // row t += row bi, reintroducing column work
      f.U.add_row(t, bi, Int(-1));
      (void)bj;
    }
    if (S.at(t, t) < 0) {
      S.negate_row(t);
      f.U.negate_row(t);
    }
  }

  for (long i = 0; i < std::min(n, m); ++i) {
    f.diagonal.push_back(S.at(i, i));
    if (S.at(i, i) != 0) ++f.rank;
  }
  return f;
}

IntMatrix column_hnf(const IntMatrix& input) {
  IntMatrix a = input;
  const long k = a.rows(), m = a.cols();
  long c = 0;  // next pivot column slot
  for (long i = 0; i < k; ++i) {
    // Gather the gcd of row i over columns c..m-1 into column c.
    long nz = -1;
    for (long j = c; j < m; ++j)
      if (a.at(i, j) != 0 && (nz < 0 || abs(a.at(i, j)) < abs(a.at(i, nz)))) nz = j;
    if (nz < 0) throw DomainError("column_hnf: input lattice is not full rank");
    a.swap_cols(c, nz);
    for (;;) {
      long best = -1;
      for (long j = c + 1; j < m; ++j) {
        if (a.at(i, j) == 0) continue;
        Int q = a.at(i, j) / a.at(i, c);
        a.add_col(j, c, q);
        check_budget(a.at(i, j));
        if (a.at(i, j) != 0 && (best < 0 || abs(a.at(i, j)) < abs(a.at(i, best)))) best = j;
      }
      if (best < 0) break;
      a.swap_cols(c, best);
    }
    if (a.at(i, c) < 0) a.negate_col(c);
    // Reduce earlier pivot columns against this one: 0 <= a[i][j] < a[i][c].
    for (long j = 0; j < c; ++j) {
      Int q = a.at(i, j) / a.at(i, c);
      if (a.at(i, j) - q * a.at(i, c) < 0) q -= 1;
      a.add_col(j, c, q);
    }
    ++c;
  }
  IntMatrix h(k, k);
  for (long i = 0; i < k; ++i)
    for (long j = 0; j < k; ++j) h.at(i, j) = a.at(i, j);
  return h;
}

IntMatrix kernel_basis(const IntMatrix& m) {
  SmithForm f = smith_normal_form(m);
  std::vector<long> zero_cols;
  for (long j = 0; j < m.cols(); ++j) {
    bool in_diag = j < static_cast<long>(f.diagonal.size());
    if (!in_diag || f.diagonal[j] == 0) zero_cols.push_back(j);
  }
  IntMatrix out(m.cols(), static_cast<long>(zero_cols.size()));
  for (long c = 0; c < out.cols(); ++c)
    for (long i = 0; i < m.cols(); ++i) out.at(i, c) = f.V.at(i, zero_cols[c]);
  return out;
}

std::optional<std::vector<Int>> solve_lower_triangular(const IntMatrix& h,
                                                       const std::vector<Int>& b) {
  const long n = h.rows();
  std::vector<Int> x(n), r = b;
  for (long i = 0; i < n; ++i) {
    if (r[i] % h.at(i, i) != 0) return std::nullopt;
    x[i] = r[i] / h.at(i, i);
    if (x[i] == 0) continue;
    for (long k = i; k < n; ++k) r[k] -= x[i] * h.at(k, i);
  }
  return x;
}

IntMatrix solve_lower_triangular_matrix(const IntMatrix& h, const IntMatrix& b) {
  IntMatrix w(h.cols(), b.cols());
  for (long j = 0; j < b.cols(); ++j) {
    auto x = solve_lower_triangular(h, b.column(j));
    if (!x) throw DomainError("solve_lower_triangular_matrix: column is not in the lattice");
    w.set_column(j, *x);
  }
  return w;
}

std::vector<Int> finite_cokernel_invariants(long n, const IntMatrix& m) {
  SmithForm f = smith_normal_form(m);
  if (f.rank < n) throw DomainError("finite_cokernel_invariants: quotient is infinite");
  std::vector<Int> out;
  for (const Int& d : f.diagonal)
    if (d > 1) out.push_back(d);
  return out;
}

Int determinant(IntMatrix m) {
  const long n = m.rows();
  if (n != m.cols()) throw DomainError("determinant: matrix not square");
  if (n == 0) return 1;
  // Bareiss fraction-free elimination.
  Int prev = 1;
  int sign = 1;
  for (long t = 0; t < n - 1; ++t) {
    if (m.at(t, t) == 0) {
      long p = -1;
      for (long i = t + 1; i < n; ++i)
        if (m.at(i, t) != 0) { p = i; break; }
      if (p < 0) return 0;
      m.swap_rows(t, p);
      sign = -sign;
    }
    for (long i = t + 1; i < n; ++i)
      for (long j = t + 1; j < n; ++j)
        m.at(i, j) = (m.at(i, j) * m.at(t, t) - m.at(i, t) * m.at(t, j)) / prev;
    prev = m.at(t, t);
  }
  return sign * m.at(n - 1, n - 1);
}

}  // namespace dilacov
