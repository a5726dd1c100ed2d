#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "mf/errors.hpp"

namespace mf {

// Dense primal simplex for
//     max c.x   s.t.   A x <= b,  x >= 0,
// with b >= 0 so the slack basis is feasible and no phase-1 is needed.
//
// Pricing is steepest-coefficient (Dantzig); after a long degenerate stall it
// drops to Bland's rule, which guarantees termination. The returned solution
// is refactorized: the final basis system is re-solved from the original
// coefficients with a pivoted LU, so roundoff accumulated across tableau
// pivots does not leak into the reported point.
struct LpProblem {
  std::vector<std::vector<double>> a;  // m rows of n coefficients
  std::vector<double> b;               // m, all >= 0
  std::vector<double> c;               // n
};

struct LpSolution {
  std::vector<double> x;
  double objective = 0.0;
  long iterations = 0;
};

namespace detail {

// Solves B y = rhs in place with partial pivoting; B is overwritten.
inline std::vector<double> lu_solve(std::vector<std::vector<double>> bmat,
                                    std::vector<double> rhs) {
  const std::size_t m = bmat.size();
  for (std::size_t k = 0; k < m; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < m; ++i)
      if (std::abs(bmat[i][k]) > std::abs(bmat[piv][k])) piv = i;
    if (bmat[piv][k] == 0.0)
      throw Error(Errc::numerical_failure, "lp: singular basis at refactorization");
    std::swap(bmat[k], bmat[piv]);
    std::swap(rhs[k], rhs[piv]);
    for (std::size_t i = k + 1; i < m; ++i) {
      double f = bmat[i][k] / bmat[k][k];
      if (f == 0.0) continue;
      for (std::size_t j = k + 1; j < m; ++j) bmat[i][j] -= f * bmat[k][j];
      rhs[i] -= f * rhs[k];
    }
  }
  for (std::size_t k = m; k-- > 0;) {
    double s = rhs[k];
    for (std::size_t j = k + 1; j < m; ++j) s -= bmat[k][j] * rhs[j];
    rhs[k] = s / bmat[k][k];
  }
  return rhs;
}

}  // namespace detail

inline LpSolution solve_lp_max(const LpProblem& p, double tol = 1e-9, long max_iters = 100000) {
  const std::size_t m = p.a.size();
  const std::size_t n = p.c.size();
  for (std::size_t i = 0; i < m; ++i) {
    if (p.a[i].size() != n) throw std::invalid_argument("lp: row size mismatch");
    if (!(p.b[i] >= 0.0)) throw std::invalid_argument("lp: rhs must be nonnegative");
  }

  const std::size_t cols = n + m;
  std::vector<std::vector<double>> t(m, std::vector<double>(cols + 1, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) t[i][j] = p.a[i][j];
    t[i][n + i] = 1.0;
    t[i][cols] = p.b[i];
  }
  std::vector<double> z(cols + 1, 0.0);  // reduced costs; z[cols] = -objective
  for (std::size_t j = 0; j < n; ++j) z[j] = p.c[j];
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) basis[i] = n + i;

  long iters = 0;
  long stalled = 0;
  bool bland = false;
  const long stall_cap = 4 * static_cast<long>(m) + 16;

  for (;;) {
    std::size_t enter = cols;
    if (bland) {
      for (std::size_t j = 0; j < cols; ++j)
        if (z[j] > tol) {
          enter = j;
          break;
        }
    } else {
      double best = tol;
      for (std::size_t j = 0; j < cols; ++j)
        if (z[j] > best) {
          best = z[j];
          enter = j;
        }
    }
    if (enter == cols) break;  // optimal

    // exact min ratio; ties to the smallest basis index
    std::size_t leave = m;
    double best_ratio = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (t[i][enter] > tol) {
        double ratio = t[i][cols] / t[i][enter];
        if (leave == m || ratio < best_ratio ||
            (ratio == best_ratio && basis[i] < basis[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
    }
    if (leave == m)
      throw Error(Errc::numerical_failure, "lp: unbounded direction encountered");

    double piv = t[leave][enter];
    for (std::size_t j = 0; j <= cols; ++j) t[leave][j] /= piv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == leave) continue;
      double f = t[i][enter];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= cols; ++j) t[i][j] -= f * t[leave][j];
    }
    double f = z[enter];
    for (std::size_t j = 0; j <= cols; ++j) z[j] -= f * t[leave][j];
    basis[leave] = enter;

    stalled = best_ratio == 0.0 ? stalled + 1 : 0;
    if (stalled > stall_cap) bland = true;

    if (++iters > max_iters)
      throw Error(Errc::numerical_failure, "lp: iteration cap exceeded");
  }

  // refactorize: solve the final basis system from the original coefficients
  std::vector<std::vector<double>> bmat(m, std::vector<double>(m, 0.0));
  for (std::size_t k = 0; k < m; ++k) {
    std::size_t j = basis[k];
    if (j < n)
      for (std::size_t i = 0; i < m; ++i) bmat[i][k] = p.a[i][j];
    else
      bmat[j - n][k] = 1.0;
  }
  std::vector<double> xb = detail::lu_solve(std::move(bmat), p.b);

  LpSolution s;
  s.x.assign(n, 0.0);
  for (std::size_t k = 0; k < m; ++k)
    if (basis[k] < n) s.x[basis[k]] = xb[k];
  s.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) s.objective += p.c[j] * s.x[j];
  s.iterations = iters;
  return s;
}

}  // namespace mf
