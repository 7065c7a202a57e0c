#include "twistlab/simplex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace twistlab {

namespace {
constexpr double kEps = 1e-11;
}

LpResult simplexSolve(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                      const std::vector<double>& c, int maxIter) {
  const int m = static_cast<int>(A.size());
  const int n = static_cast<int>(c.size());
  for (double bi : b) {
    if (bi < -kEps) throw std::invalid_argument("simplexSolve: requires b >= 0");
  }

  // Tableau: m rows x (n + m + 1) columns, last column is the rhs.
  std::vector<std::vector<double>> t(m, std::vector<double>(n + m + 1, 0.0));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) t[i][j] = A[i][j];
    t[i][n + i] = 1.0;
    t[i][n + m] = std::max(b[i], 0.0);
  }
  std::vector<double> z(n + m + 1, 0.0);  // reduced costs row (for max: keep c, pivot while > 0)
  for (int j = 0; j < n; ++j) z[j] = c[j];
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;

  int iter = 0;
  bool bland = false;
  LpResult res;
  while (true) {
    if (++iter > maxIter) {
      res.status = LpResult::Status::IterLimit;
      break;
    }
    if (iter > maxIter / 2) bland = true;  // switch pricing if we are grinding

    // entering column
    int enter = -1;
    if (bland) {
      for (int j = 0; j < n + m; ++j) {
        if (z[j] > kEps) {
          enter = j;
          break;
        }
      }
    } else {
      double best = kEps;
      for (int j = 0; j < n + m; ++j) {
        if (z[j] > best) {
          best = z[j];
          enter = j;
        }
      }
    }
    if (enter < 0) {
      res.status = LpResult::Status::Optimal;
      break;
    }

    // ratio test
    int leave = -1;
    double bestRatio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      if (t[i][enter] > kEps) {
        double r = t[i][n + m] / t[i][enter];
        if (r < bestRatio - kEps || (r < bestRatio + kEps && (leave < 0 || basis[i] < basis[leave]))) {
          bestRatio = r;
          leave = i;
        }
      }
    }
    if (leave < 0) {
      res.status = LpResult::Status::Unbounded;
      break;
    }

    // pivot
    double piv = t[leave][enter];
    for (double& v : t[leave]) v /= piv;
    for (int i = 0; i < m; ++i) {
      if (i == leave) continue;
      double f = t[i][enter];
      if (f == 0.0) continue;
      for (int j = 0; j <= n + m; ++j) t[i][j] -= f * t[leave][j];
    }
    double fz = z[enter];
    if (fz != 0.0) {
      for (int j = 0; j < n + m; ++j) z[j] -= fz * t[leave][j];
      res.value += fz * t[leave][n + m];
    }
    basis[leave] = enter;
  }

  res.x.assign(n, 0.0);
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n) res.x[basis[i]] = t[i][n + m];
  }
  res.dual.assign(m, 0.0);
  for (int i = 0; i < m; ++i) res.dual[i] = -z[n + i];
  double v = 0.0;
  for (int j = 0; j < n; ++j) v += c[j] * res.x[j];
  res.value = v;
  return res;
}

}  // namespace twistlab
