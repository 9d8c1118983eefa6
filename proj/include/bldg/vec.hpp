#pragma once

#include "bldg/rational.hpp"

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace bldg {

// Exact rational vectors in the ambient Euclidean realization. All pairings of
// apartment geometry go through these; floating point enters only in the
// analytic layer.
using RVec = std::vector<Rational>;

inline RVec rvec(std::initializer_list<long long> xs) {
  RVec v;
  v.reserve(xs.size());
  for (auto x : xs) v.emplace_back(x);
  return v;
}

inline RVec zero_vec(std::size_t n) { return RVec(n, Rational(0)); }

inline Rational dot(const RVec& a, const RVec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline RVec add(const RVec& a, const RVec& b) {
  RVec c(a);
  for (std::size_t i = 0; i < a.size(); ++i) c[i] += b[i];
  return c;
}

inline RVec sub(const RVec& a, const RVec& b) {
  RVec c(a);
  for (std::size_t i = 0; i < a.size(); ++i) c[i] -= b[i];
  return c;
}

inline RVec scale(const Rational& t, const RVec& a) {
  RVec c(a);
  for (auto& x : c) x *= t;
  return c;
}

inline RVec neg(const RVec& a) { return scale(Rational(-1), a); }

inline bool is_zero(const RVec& a) {
  for (const auto& x : a)
    if (x != 0) return false;
  return true;
}

inline Rational norm2(const RVec& a) { return dot(a, a); }

inline std::string vec_str(const RVec& a) {
  std::string s = "(";
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i) s += ",";
    s += a[i].str();
  }
  return s + ")";
}

// Square matrices with exact entries, row major.
struct RMat {
  std::size_t n = 0;
  std::vector<Rational> a;

  RMat() = default;
  explicit RMat(std::size_t n_) : n(n_), a(n_ * n_, Rational(0)) {}

  Rational& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
  const Rational& operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }

  static RMat identity(std::size_t n_) {
    RMat m(n_);
    for (std::size_t i = 0; i < n_; ++i) m(i, i) = 1;
    return m;
  }

  RVec apply(const RVec& v) const {
    RVec w(n, Rational(0));
    for (std::size_t i = 0; i < n; ++i) {
      Rational s = 0;
      for (std::size_t j = 0; j < n; ++j) s += a[i * n + j] * v[j];
      w[i] = s;
    }
    return w;
  }

  RMat mul(const RMat& o) const {
    RMat m(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        const Rational& x = a[i * n + k];
        if (x == 0) continue;
        for (std::size_t j = 0; j < n; ++j) m(i, j) += x * o(k, j);
      }
    return m;
  }

  bool operator==(const RMat& o) const { return n == o.n && a == o.a; }
};

// Solve A x = b exactly by Gaussian elimination with exact pivoting.
// A is m x k given as rows; returns any solution, throws if inconsistent.
inline RVec solve_exact(std::vector<RVec> rows, RVec rhs) {
  const std::size_t m = rows.size();
  if (m == 0) return {};
  const std::size_t k = rows[0].size();
  std::vector<std::size_t> pivot_col;
  std::size_t r = 0;
  for (std::size_t c = 0; c < k && r < m; ++c) {
    std::size_t p = r;
    while (p < m && rows[p][c] == 0) ++p;
    if (p == m) continue;
    std::swap(rows[p], rows[r]);
    std::swap(rhs[p], rhs[r]);
    const Rational inv = Rational(1) / rows[r][c];
    for (std::size_t j = c; j < k; ++j) rows[r][j] *= inv;
    rhs[r] *= inv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == r || rows[i][c] == 0) continue;
      const Rational f = rows[i][c];
      for (std::size_t j = c; j < k; ++j) rows[i][j] -= f * rows[r][j];
      rhs[i] -= f * rhs[r];
    }
    pivot_col.push_back(c);
    ++r;
  }
  for (std::size_t i = r; i < m; ++i)
    if (rhs[i] != 0) throw std::domain_error("solve_exact: inconsistent system");
  RVec x(k, Rational(0));
  for (std::size_t i = 0; i < pivot_col.size(); ++i) x[pivot_col[i]] = rhs[i];
  return x;
}

// Hash exact vectors (for memo tables keyed on lattice data).
inline std::size_t hash_rvec(const RVec& v) {
  std::size_t h = 1469598103934665603ULL;
  std::hash<std::string> hs;
  for (const auto& x : v) {
    h ^= hs(x.str());
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace bldg
