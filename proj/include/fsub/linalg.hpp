#pragma once

// Small dense linear algebra over either plain doubles or jets.  Dimensions
// here are tiny (n <= 4), so naive Gaussian elimination with value-level
// partial pivoting is both adequate and smooth in the jet coefficients as
// long as the pivot pattern is locally constant.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fsub/jets.hpp"

namespace finsub {

inline double pivot_size(double s) { return std::abs(s); }
inline double pivot_size(const Jet& j) { return std::abs(j.value()); }

struct SingularMatrix : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Solves A X = B in place; A is n x n row-major, B is n x k row-major.
template <class S>
void gauss_solve(std::vector<S> A, std::vector<S>& B, int n, int k,
                 double tol = 1e-13) {
  double scale = 0.0;
  for (const S& a : A) scale = std::max(scale, pivot_size(a));
  if (scale == 0.0) throw SingularMatrix("zero matrix");
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  for (int col = 0; col < n; ++col) {
    int best = col;
    for (int r = col + 1; r < n; ++r)
      if (pivot_size(A[perm[r] * n + col]) > pivot_size(A[perm[best] * n + col]))
        best = r;
    std::swap(perm[col], perm[best]);
    const S& piv = A[perm[col] * n + col];
    if (pivot_size(piv) < tol * scale)
      throw SingularMatrix("numerically singular pivot");
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      S f = A[perm[r] * n + col] / piv;
      for (int c = col; c < n; ++c)
        A[perm[r] * n + c] -= f * A[perm[col] * n + c];
      for (int c = 0; c < k; ++c)
        B[perm[r] * k + c] -= f * B[perm[col] * k + c];
    }
  }
  std::vector<S> X(B.begin(), B.end());
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < k; ++c)
      X[i * k + c] = B[perm[i] * k + c] / A[perm[i] * n + i];
  B = std::move(X);
}

template <class S>
std::vector<S> matrix_inverse(const std::vector<S>& A, int n, const S& one,
                              const S& zero, double tol = 1e-13) {
  std::vector<S> I(n * n, zero);
  for (int i = 0; i < n; ++i) I[i * n + i] = one;
  gauss_solve(A, I, n, n, tol);
  return I;
}

// Basis of the kernel of the m x n matrix J (row-major), assuming rank m.
// Column pivoting keeps the basis smooth in the jet coefficients.
template <class S>
std::vector<std::vector<S>> kernel_basis(std::vector<S> J, int m, int n,
                                         const S& one, const S& zero,
                                         double tol = 1e-10) {
  double scale = 0.0;
  for (const S& a : J) scale = std::max(scale, pivot_size(a));
  std::vector<int> pivot_col(m, -1);
  std::vector<bool> used(n, false);
  for (int r = 0; r < m; ++r) {
    int best = -1;
    for (int c = 0; c < n; ++c)
      if (!used[c] && (best < 0 ||
                       pivot_size(J[r * n + c]) > pivot_size(J[r * n + best])))
        best = c;
    if (best < 0 || pivot_size(J[r * n + best]) < tol * std::max(scale, 1.0))
      throw SingularMatrix("rank-deficient matrix in kernel computation");
    used[best] = true;
    pivot_col[r] = best;
    const S piv = J[r * n + best];
    for (int rr = 0; rr < m; ++rr) {
      if (rr == r) continue;
      S f = J[rr * n + best] / piv;
      for (int c = 0; c < n; ++c) J[rr * n + c] -= f * J[r * n + c];
    }
  }
  std::vector<std::vector<S>> basis;
  for (int f = 0; f < n; ++f) {
    if (used[f]) continue;
    std::vector<S> v(n, zero);
    v[f] = one;
    for (int r = 0; r < m; ++r)
      v[pivot_col[r]] = zero - J[r * n + f] / J[r * n + pivot_col[r]];
    basis.push_back(std::move(v));
  }
  return basis;
}

// Component-wise vector helpers for jet vectors.
inline JetVec operator+(const JetVec& a, const JetVec& b) {
  JetVec r = a;
  for (size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}
inline JetVec operator-(const JetVec& a, const JetVec& b) {
  JetVec r = a;
  for (size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}
inline JetVec operator-(const JetVec& a) {
  JetVec r;
  r.reserve(a.size());
  for (const Jet& j : a) r.push_back(-j);
  return r;
}
inline JetVec operator*(double s, const JetVec& a) {
  JetVec r = a;
  for (Jet& j : r) j *= s;
  return r;
}
inline JetVec operator*(const Jet& s, const JetVec& a) {
  JetVec r;
  r.reserve(a.size());
  for (const Jet& j : a) r.push_back(s * j);
  return r;
}

}  // namespace finsub
